#pragma once

// Model file layout (all integers and floats little-endian):
//
//   "CNNTAG" | u32 version
//   model config | train config | u8 task
//   vocabulary: words (string, u64 freq), chars (u32 code point), tags (string)
//   u32 tensor count, then per tensor: string name, u8 embedding flag,
//   u32 rank, u32 dims..., f32 data
//
// Strings are u32 byte length followed by the bytes. Only the averaged
// weights are stored; a loaded model has value == avg.

#include <bit>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cnntag/conllu.hpp"
#include "cnntag/training.hpp"

namespace cnntag {

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kModelMagic = "CNNTAG";
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void size(std::size_t v) {
    if (v > UINT32_MAX) throw std::length_error("value too large for model file");
    u32(static_cast<std::uint32_t>(v));
  }
  void str(std::string_view s) {
    size(s.size());
    buf_.append(s);
  }
  void raw(std::string_view s) { buf_.append(s); }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() {
    const auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t size() { return u32(); }
  std::string str() {
    const std::size_t n = size();
    return std::string(take(n));
  }
  std::string_view take(std::size_t n) {
    if (n > data_.size() - pos_)
      throw ModelFormatError("truncated model file at byte " + std::to_string(pos_) + " (need " +
                             std::to_string(n) + " more bytes)");
    const auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == data_.size(); }
  std::size_t position() const { return pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

inline void write_sizes(Writer& w, const std::vector<std::size_t>& xs) {
  w.size(xs.size());
  for (auto x : xs) w.size(x);
}

inline std::vector<std::size_t> read_sizes(Reader& r) {
  const std::size_t n = r.size();
  if (n > 64) throw ModelFormatError("implausible filter list length " + std::to_string(n));
  std::vector<std::size_t> xs;
  for (std::size_t i = 0; i < n; ++i) xs.push_back(r.size());
  return xs;
}

}  // namespace detail

/// Serializes a model to bytes; deterministic for a given model.
inline std::string serialize_model(const TrainedModel& m) {
  detail::Writer w;
  w.raw(kModelMagic);
  w.u32(kModelVersion);

  const ModelConfig& c = m.tagger.config();
  w.u8(static_cast<std::uint8_t>(c.mode));
  w.size(c.char_input_len);
  detail::write_sizes(w, c.char_filter_sizes);
  w.size(c.char_out_channels);
  w.size(c.char_emb_dim);
  w.size(c.word_dim);
  w.size(c.window_half);
  detail::write_sizes(w, c.ctx_filter_sizes);
  w.size(c.ctx_out_channels);
  w.size(c.hidden_dim);
  w.f64(c.dropout_p);
  w.f64(c.noise_sigma);
  w.size(c.pos_emb_dim);
  w.size(c.tag_count);

  const TrainConfig& t = m.train_config;
  w.size(t.batch_size);
  w.f64(t.lr);
  w.f64(t.momentum);
  w.f64(t.l2);
  w.size(t.max_epochs);
  w.size(t.patience);
  w.u64(t.seed);

  w.u8(static_cast<std::uint8_t>(m.task));

  const Vocabulary& v = m.vocab;
  w.size(v.word_count() - 2);
  for (std::size_t i = 2; i < v.word_count(); ++i) {
    w.str(v.word(static_cast<int>(i)));
    w.u64(v.word_freq(static_cast<int>(i)));
  }
  w.size(v.char_count() - 2);
  for (std::size_t i = 2; i < v.char_count(); ++i)
    w.u32(static_cast<std::uint32_t>(v.character(static_cast<int>(i))));
  w.size(v.tag_count());
  for (std::size_t i = 0; i < v.tag_count(); ++i) w.str(v.tag(static_cast<int>(i)));

  const auto params = m.tagger.params().list();
  w.size(params.size());
  for (const Param<float>* p : params) {
    w.str(p->name);
    w.u8(p->is_embedding ? 1 : 0);
    detail::write_sizes(w, p->value.shape());
    for (float x : p->value.values()) w.f32(x);
  }
  return w.take();
}

inline TrainedModel deserialize_model(std::string_view bytes) {
  detail::Reader r(bytes);
  if (bytes.size() < kModelMagic.size() || r.take(kModelMagic.size()) != kModelMagic)
    throw ModelFormatError("bad magic: not a model file");
  if (const auto version = r.u32(); version != kModelVersion)
    throw ModelFormatError("unsupported model format version " + std::to_string(version));

  ModelConfig c;
  const auto mode = r.u8();
  if (mode > 2) throw ModelFormatError("bad input mode " + std::to_string(mode));
  c.mode = static_cast<InputMode>(mode);
  c.char_input_len = r.size();
  c.char_filter_sizes = detail::read_sizes(r);
  c.char_out_channels = r.size();
  c.char_emb_dim = r.size();
  c.word_dim = r.size();
  c.window_half = r.size();
  c.ctx_filter_sizes = detail::read_sizes(r);
  c.ctx_out_channels = r.size();
  c.hidden_dim = r.size();
  c.dropout_p = r.f64();
  c.noise_sigma = r.f64();
  c.pos_emb_dim = r.size();
  c.tag_count = r.size();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("bad model config: ") + e.what());
  }

  TrainedModel m;
  m.train_config.batch_size = r.size();
  m.train_config.lr = r.f64();
  m.train_config.momentum = r.f64();
  m.train_config.l2 = r.f64();
  m.train_config.max_epochs = r.size();
  m.train_config.patience = r.size();
  m.train_config.seed = r.u64();

  const auto task = r.u8();
  if (task > 2) throw ModelFormatError("bad task " + std::to_string(task));
  m.task = static_cast<Task>(task);

  const std::size_t words = r.size();
  for (std::size_t i = 0; i < words; ++i) {
    const std::string w = r.str();
    const std::uint64_t freq = r.u64();
    if (m.vocab.add_word(w, freq) != static_cast<int>(i + 2))
      throw ModelFormatError("duplicate word in vocabulary: " + w);
  }
  const std::size_t chars = r.size();
  for (std::size_t i = 0; i < chars; ++i)
    if (m.vocab.add_char(static_cast<char32_t>(r.u32())) != static_cast<int>(i + 2))
      throw ModelFormatError("duplicate character in vocabulary");
  const std::size_t tags = r.size();
  for (std::size_t i = 0; i < tags; ++i)
    if (m.vocab.add_tag(r.str()) != static_cast<int>(i))
      throw ModelFormatError("duplicate tag in vocabulary");
  if (tags != c.tag_count) throw ModelFormatError("tag count does not match model config");

  const auto layout = param_layout(c, m.vocab.word_count(), m.vocab.char_count());
  if (r.size() != layout.size()) throw ModelFormatError("unexpected parameter tensor count");
  std::vector<Param<float>> flat;
  for (const ParamSpec& spec : layout) {
    const std::string name = r.str();
    if (name != spec.name)
      throw ModelFormatError("expected tensor '" + spec.name + "', found '" + name + "'");
    const bool embedding = r.u8() != 0;
    const auto shape = detail::read_sizes(r);
    if (shape != spec.shape || embedding != spec.is_embedding)
      throw ModelFormatError("tensor '" + name + "' has shape " + shape_str(shape) +
                             ", expected " + shape_str(spec.shape));
    std::vector<float> data(shape_size(shape));
    const auto raw = r.take(data.size() * 4);
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b)
        bits |= std::uint32_t(static_cast<unsigned char>(raw[i * 4 + b])) << (8 * b);
      data[i] = std::bit_cast<float>(bits);
    }
    flat.emplace_back(name, Tensor<float>(shape, std::move(data)), embedding);
  }
  if (!r.done())
    throw ModelFormatError("trailing bytes after parameters at byte " +
                           std::to_string(r.position()));
  m.tagger = Tagger<float>(c, assemble_params<float>(c, std::move(flat)));
  return m;
}

inline void save_model(const TrainedModel& m, const std::string& path) {
  write_file(path, serialize_model(m));
}

inline TrainedModel load_model(const std::string& path) {
  const std::string bytes = read_file(path);
  try {
    return deserialize_model(bytes);
  } catch (const ModelFormatError& e) {
    throw ModelFormatError(path + ": " + e.what());
  }
}

}  // namespace cnntag
