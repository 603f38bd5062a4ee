#pragma once

// The CNN tagger: a character-composition CNN builds word vectors, a second
// CNN reads a fixed window of word vectors around the target token, and a
// hidden ReLU layer feeds the tag classifier.
//
//   chars[32] -> embed -> {conv k, relu, max}_{k=3,5,7,9} -> c[100] (+noise)
//   window rows [w | c | target flag | position embedding] x 15
//     -> {conv k, relu, conv k, relu, max}_{k=2,3,4,5} -> context[512]
//     -> affine, relu, dropout -> affine -> softmax

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cnntag/corpus.hpp"
#include "cnntag/layers.hpp"
#include "cnntag/optim.hpp"
#include "cnntag/random.hpp"
#include "cnntag/tensor.hpp"
#include "cnntag/utf8.hpp"

namespace cnntag {

/// Word representation fed to the context encoder: word embedding only,
/// composed character vector only, or their concatenation.
enum class InputMode : std::uint8_t { kWord = 0, kChar = 1, kWordChar = 2 };

inline std::string_view mode_name(InputMode m) {
  switch (m) {
    case InputMode::kWord: return "w";
    case InputMode::kChar: return "c";
    case InputMode::kWordChar: return "wc";
  }
  return "?";
}

inline std::optional<InputMode> parse_mode(std::string_view s) {
  if (s == "w") return InputMode::kWord;
  if (s == "c") return InputMode::kChar;
  if (s == "wc") return InputMode::kWordChar;
  return std::nullopt;
}

inline bool uses_words(InputMode m) { return m != InputMode::kChar; }
inline bool uses_chars(InputMode m) { return m != InputMode::kWord; }

struct ModelConfig {
  InputMode mode = InputMode::kWordChar;
  std::size_t char_input_len = 32;
  std::vector<std::size_t> char_filter_sizes{3, 5, 7, 9};
  std::size_t char_out_channels = 25;
  std::size_t char_emb_dim = 32;
  std::size_t word_dim = 64;
  std::size_t window_half = 7;
  std::vector<std::size_t> ctx_filter_sizes{2, 3, 4, 5};
  std::size_t ctx_out_channels = 128;
  std::size_t hidden_dim = 512;
  double dropout_p = 0.1;
  double noise_sigma = 0.1;
  std::size_t pos_emb_dim = 10;
  std::size_t tag_count = 0;

  std::size_t composed_dim() const { return char_filter_sizes.size() * char_out_channels; }
  std::size_t repr_dim() const {
    return (uses_words(mode) ? word_dim : 0) + (uses_chars(mode) ? composed_dim() : 0);
  }
  /// Window row: representation, target flag, position embedding.
  std::size_t row_dim() const { return repr_dim() + 1 + pos_emb_dim; }
  std::size_t window() const { return 2 * window_half + 1; }
  std::size_t context_dim() const { return ctx_filter_sizes.size() * ctx_out_channels; }

  void validate() const {
    auto positive = [](std::size_t v, const char* what) {
      if (v == 0) throw std::invalid_argument(std::string("ModelConfig: ") + what + " must be positive");
    };
    positive(char_input_len, "char_input_len");
    positive(char_out_channels, "char_out_channels");
    positive(char_emb_dim, "char_emb_dim");
    positive(word_dim, "word_dim");
    positive(ctx_out_channels, "ctx_out_channels");
    positive(hidden_dim, "hidden_dim");
    positive(pos_emb_dim, "pos_emb_dim");
    positive(tag_count, "tag_count");
    if (char_filter_sizes.empty() || ctx_filter_sizes.empty())
      throw std::invalid_argument("ModelConfig: filter size lists must be non-empty");
    for (auto k : char_filter_sizes) positive(k, "char filter size");
    for (auto k : ctx_filter_sizes) positive(k, "context filter size");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
      throw std::invalid_argument("ModelConfig: dropout_p must be in [0,1)");
    if (noise_sigma < 0.0) throw std::invalid_argument("ModelConfig: noise_sigma must be >= 0");
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Learnable tensors. Members absent for the configured mode stay empty.
template <typename T>
struct ModelParams {
  Param<T> word_emb;
  Param<T> char_emb;
  std::vector<Param<T>> char_conv_w, char_conv_b;
  Param<T> pos_emb;
  std::vector<Param<T>> ctx_conv1_w, ctx_conv1_b, ctx_conv2_w, ctx_conv2_b;
  Param<T> hidden_w, hidden_b;
  Param<T> out_w, out_b;

  /// Present parameters in canonical (initialization and file) order.
  std::vector<Param<T>*> list() {
    std::vector<Param<T>*> out;
    auto add = [&](Param<T>& p) {
      if (!p.value.empty()) out.push_back(&p);
    };
    add(word_emb);
    add(char_emb);
    for (std::size_t i = 0; i < char_conv_w.size(); ++i) {
      add(char_conv_w[i]);
      add(char_conv_b[i]);
    }
    add(pos_emb);
    for (std::size_t i = 0; i < ctx_conv1_w.size(); ++i) {
      add(ctx_conv1_w[i]);
      add(ctx_conv1_b[i]);
      add(ctx_conv2_w[i]);
      add(ctx_conv2_b[i]);
    }
    add(hidden_w);
    add(hidden_b);
    add(out_w);
    add(out_b);
    return out;
  }
  std::vector<const Param<T>*> list() const {
    auto ptrs = const_cast<ModelParams*>(this)->list();
    return {ptrs.begin(), ptrs.end()};
  }

  void zero_grads() {
    for (Param<T>* p : list()) p->grad.zero();
  }
};

/// Expected parameter layout for a config and vocabulary: (name, shape,
/// is_embedding) in canonical order. Used both to initialize and to validate
/// loaded models.
struct ParamSpec {
  std::string name;
  Shape shape;
  bool is_embedding;
  bool is_bias;
};

inline std::vector<ParamSpec> param_layout(const ModelConfig& c, std::size_t word_count,
                                           std::size_t char_count) {
  std::vector<ParamSpec> out;
  if (uses_words(c.mode)) out.push_back({"word_emb", {word_count, c.word_dim}, true, false});
  if (uses_chars(c.mode)) {
    out.push_back({"char_emb", {char_count, c.char_emb_dim}, true, false});
    for (std::size_t k : c.char_filter_sizes) {
      const std::string base = "char_conv" + std::to_string(k);
      out.push_back({base + ".w", {k, c.char_emb_dim, c.char_out_channels}, false, false});
      out.push_back({base + ".b", {c.char_out_channels}, false, true});
    }
  }
  out.push_back({"pos_emb", {c.window(), c.pos_emb_dim}, true, false});
  for (std::size_t k : c.ctx_filter_sizes) {
    const std::string base = "ctx_conv" + std::to_string(k);
    out.push_back({base + "a.w", {k, c.row_dim(), c.ctx_out_channels}, false, false});
    out.push_back({base + "a.b", {c.ctx_out_channels}, false, true});
    out.push_back({base + "b.w", {k, c.ctx_out_channels, c.ctx_out_channels}, false, false});
    out.push_back({base + "b.b", {c.ctx_out_channels}, false, true});
  }
  out.push_back({"hidden.w", {c.context_dim(), c.hidden_dim}, false, false});
  out.push_back({"hidden.b", {c.hidden_dim}, false, true});
  out.push_back({"output.w", {c.hidden_dim, c.tag_count}, false, false});
  out.push_back({"output.b", {c.tag_count}, false, true});
  return out;
}

/// Places tensors (in layout order) into the named slots of ModelParams.
template <typename T>
ModelParams<T> assemble_params(const ModelConfig& c, std::vector<Param<T>> flat) {
  ModelParams<T> p;
  std::size_t i = 0;
  auto next = [&]() -> Param<T> {
    if (i >= flat.size()) throw std::invalid_argument("too few parameter tensors");
    return std::move(flat[i++]);
  };
  if (uses_words(c.mode)) {
    p.word_emb = next();
    p.word_emb.frozen_rows = 1;
  }
  if (uses_chars(c.mode)) {
    p.char_emb = next();
    p.char_emb.frozen_rows = 1;
    for (std::size_t f = 0; f < c.char_filter_sizes.size(); ++f) {
      p.char_conv_w.push_back(next());
      p.char_conv_b.push_back(next());
    }
  }
  p.pos_emb = next();
  for (std::size_t f = 0; f < c.ctx_filter_sizes.size(); ++f) {
    p.ctx_conv1_w.push_back(next());
    p.ctx_conv1_b.push_back(next());
    p.ctx_conv2_w.push_back(next());
    p.ctx_conv2_b.push_back(next());
  }
  p.hidden_w = next();
  p.hidden_b = next();
  p.out_w = next();
  p.out_b = next();
  if (i != flat.size()) throw std::invalid_argument("too many parameter tensors");
  return p;
}

/// Embeddings ~ U(-0.1, 0.1) with the padding row zeroed; weights
/// ~ U(-s, s), s = sqrt(6 / (fan_in + fan_out)); biases zero. Draws follow
/// layout order.
template <typename T>
ModelParams<T> init_params(const ModelConfig& c, std::size_t word_count,
                           std::size_t char_count, Rng& rng) {
  c.validate();
  std::vector<Param<T>> flat;
  for (const ParamSpec& spec : param_layout(c, word_count, char_count)) {
    Tensor<T> v(spec.shape);
    if (spec.is_embedding) {
      for (T& x : v.values()) x = static_cast<T>(rng.uniform(-0.1, 0.1));
      if (spec.name != "pos_emb")
        for (T& x : v.row(Vocabulary::kPad)) x = T(0);
    } else if (!spec.is_bias) {
      std::size_t fan_in, fan_out;
      if (spec.shape.size() == 3) {
        fan_in = spec.shape[0] * spec.shape[1];
        fan_out = spec.shape[0] * spec.shape[2];
      } else {
        fan_in = spec.shape[0];
        fan_out = spec.shape[1];
      }
      const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (T& x : v.values()) x = static_cast<T>(rng.uniform(-s, s));
    }
    flat.emplace_back(spec.name, std::move(v), spec.is_embedding);
  }
  return assemble_params<T>(c, std::move(flat));
}

/// Fixed-length character ids: short words are centered between padding
/// (odd deficit puts the extra pad on the right); long words keep their
/// first and last halves.
inline std::vector<int> encode_chars(std::string_view form, const Vocabulary& vocab,
                                     std::size_t length = 32) {
  const std::u32string chars = utf8_decode(form);
  std::vector<int> ids(length, Vocabulary::kPad);
  if (chars.size() <= length) {
    const std::size_t left = (length - chars.size()) / 2;
    for (std::size_t i = 0; i < chars.size(); ++i) ids[left + i] = vocab.char_id(chars[i]);
  } else {
    const std::size_t head = length / 2;
    const std::size_t tail = length - head;
    for (std::size_t i = 0; i < head; ++i) ids[i] = vocab.char_id(chars[i]);
    for (std::size_t i = 0; i < tail; ++i)
      ids[head + i] = vocab.char_id(chars[chars.size() - tail + i]);
  }
  return ids;
}

/// A sentence mapped into vocabulary index space.
struct EncodedSentence {
  std::vector<int> word_ids;
  std::vector<std::vector<int>> char_ids;
  /// Words seen exactly once in training; candidates for UNK replacement.
  std::vector<bool> singleton;
  /// Gold tag ids; -1 where the gold tag is outside the training tag set.
  std::vector<int> gold;

  std::size_t size() const { return word_ids.size(); }
};

inline EncodedSentence encode_sentence(const Sentence& s, const Vocabulary& vocab,
                                       const ModelConfig& config,
                                       const std::vector<std::string>* tags = nullptr) {
  EncodedSentence e;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const std::string& form = s.tokens[i].form;
    const int id = vocab.word_id(form);
    e.word_ids.push_back(id);
    e.singleton.push_back(id != Vocabulary::kUnk && vocab.word_freq(id) == 1);
    e.char_ids.push_back(encode_chars(form, vocab, config.char_input_len));
    if (tags) e.gold.push_back(vocab.tag_id((*tags)[i]).value_or(-1));
  }
  return e;
}

/// Probability that a training occurrence of a singleton word is replaced by
/// the unknown-word id.
inline constexpr double kSingletonUnkProb = 0.25;

template <typename T>
class Tagger {
 public:
  Tagger() = default;
  Tagger(ModelConfig config, ModelParams<T> params)
      : config_(std::move(config)), params_(std::move(params)) {
    config_.validate();
  }

  static Tagger initialize(const ModelConfig& config, std::size_t word_count,
                           std::size_t char_count, std::uint64_t seed) {
    Rng rng(seed);
    return Tagger(config, init_params<T>(config, word_count, char_count, rng));
  }

  const ModelConfig& config() const { return config_; }
  ModelParams<T>& params() { return params_; }
  const ModelParams<T>& params() const { return params_; }

  struct ComposeCache {
    std::vector<int> char_ids;
    Tensor<T> embedded;
    std::vector<Tensor<T>> activations;
    std::vector<std::vector<std::size_t>> argmax;
  };

  /// Character composition of one word: a `composed_dim()` vector.
  Tensor<T> compose_word(std::span<const int> char_ids, bool training, Rng& rng,
                         ComposeCache* cache = nullptr) const {
    const auto& emb = params_.char_emb.value;
    Tensor<T> x({char_ids.size(), config_.char_emb_dim});
    for (std::size_t t = 0; t < char_ids.size(); ++t) {
      const auto src = emb.row(static_cast<std::size_t>(char_ids[t]));
      std::copy(src.begin(), src.end(), x.row(t).begin());
    }
    const std::size_t ch = config_.char_out_channels;
    Tensor<T> out({config_.composed_dim()});
    for (std::size_t f = 0; f < config_.char_filter_sizes.size(); ++f) {
      Tensor<T> y = relu(conv1d(x, params_.char_conv_w[f].value, params_.char_conv_b[f].value));
      Pooled<T> pooled = max_over_time(y);
      std::copy_n(pooled.values.data(), ch, out.data() + f * ch);
      if (cache) {
        cache->activations.push_back(std::move(y));
        cache->argmax.push_back(std::move(pooled.argmax));
      }
    }
    if (cache) {
      cache->char_ids.assign(char_ids.begin(), char_ids.end());
      cache->embedded = std::move(x);
    }
    return gaussian_noise(std::move(out), config_.noise_sigma, rng, training);
  }

  void compose_backward(const ComposeCache& cache, std::span<const T> dcomposed) {
    const std::size_t ch = config_.char_out_channels;
    Tensor<T> dx(cache.embedded.shape());
    for (std::size_t f = 0; f < config_.char_filter_sizes.size(); ++f) {
      const Tensor<T>& y = cache.activations[f];
      Tensor<T> dy = max_over_time_backward<T>(cache.argmax[f], dcomposed.subspan(f * ch, ch),
                                               y.rows());
      dy = relu_backward(y, std::move(dy));
      dx.vec() += conv1d_backward(cache.embedded, params_.char_conv_w[f].value, dy,
                                  params_.char_conv_w[f].grad, params_.char_conv_b[f].grad)
                      .vec();
    }
    auto& g = params_.char_emb.grad;
    for (std::size_t t = 0; t < cache.char_ids.size(); ++t) {
      const int id = cache.char_ids[t];
      if (id == Vocabulary::kPad) continue;
      auto dst = g.row(static_cast<std::size_t>(id));
      const auto src = dx.row(t);
      for (std::size_t d = 0; d < dst.size(); ++d) dst[d] += src[d];
    }
  }

  struct WordCache {
    int word_id = Vocabulary::kPad;
    ComposeCache compose;
  };

  /// Representation of token i. While training, singleton words are replaced
  /// by UNK with probability kSingletonUnkProb and the composed vector is
  /// noised.
  Tensor<T> word_repr(const EncodedSentence& s, std::size_t i, bool training, Rng& rng,
                      WordCache* cache = nullptr) const {
    Tensor<T> out({config_.repr_dim()});
    std::size_t offset = 0;
    if (uses_words(config_.mode)) {
      int id = s.word_ids[i];
      if (training && s.singleton[i] && rng.bernoulli(kSingletonUnkProb)) id = Vocabulary::kUnk;
      const auto row = params_.word_emb.value.row(static_cast<std::size_t>(id));
      std::copy(row.begin(), row.end(), out.data());
      offset = config_.word_dim;
      if (cache) cache->word_id = id;
    }
    if (uses_chars(config_.mode)) {
      const Tensor<T> c =
          compose_word(s.char_ids[i], training, rng, cache ? &cache->compose : nullptr);
      std::copy_n(c.data(), c.size(), out.data() + offset);
    }
    return out;
  }

  void word_repr_backward(const WordCache& cache, std::span<const T> drepr) {
    std::size_t offset = 0;
    if (uses_words(config_.mode)) {
      auto dst = params_.word_emb.grad.row(static_cast<std::size_t>(cache.word_id));
      for (std::size_t d = 0; d < config_.word_dim; ++d) dst[d] += drepr[d];
      offset = config_.word_dim;
    }
    if (uses_chars(config_.mode))
      compose_backward(cache.compose, drepr.subspan(offset, config_.composed_dim()));
  }

  /// Window of `window()` rows centered on `target`. `reprs` is indexed by
  /// sentence position and only entries inside the window are read; rows
  /// outside the sentence carry a zero representation.
  Tensor<T> build_window(std::size_t sentence_len, std::size_t target,
                         std::span<const Tensor<T>> reprs) const {
    const std::size_t rd = config_.repr_dim();
    Tensor<T> win({config_.window(), config_.row_dim()});
    for (std::size_t r = 0; r < config_.window(); ++r) {
      const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(target + r) -
                                 static_cast<std::ptrdiff_t>(config_.window_half);
      auto row = win.row(r);
      if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(sentence_len)) {
        const Tensor<T>& rep = reprs[static_cast<std::size_t>(pos)];
        std::copy_n(rep.data(), rd, row.begin());
      }
      row[rd] = r == config_.window_half ? T(1) : T(0);
      const auto pe = params_.pos_emb.value.row(r);
      std::copy(pe.begin(), pe.end(), row.begin() + static_cast<std::ptrdiff_t>(rd + 1));
    }
    return win;
  }

  struct ContextCache {
    Tensor<T> window;
    std::vector<Tensor<T>> h1, h2;
    std::vector<std::vector<std::size_t>> argmax;
    Tensor<T> context, hidden, dropped, mask;
  };

  /// Context encoder and classifier: window -> unnormalized tag scores.
  Tensor<T> window_logits(const Tensor<T>& window, bool training, Rng& rng,
                          ContextCache* cache = nullptr) const {
    const std::size_t ch = config_.ctx_out_channels;
    Tensor<T> context({config_.context_dim()});
    for (std::size_t f = 0; f < config_.ctx_filter_sizes.size(); ++f) {
      Tensor<T> h1 = relu(conv1d(window, params_.ctx_conv1_w[f].value, params_.ctx_conv1_b[f].value));
      Tensor<T> h2 = relu(conv1d(h1, params_.ctx_conv2_w[f].value, params_.ctx_conv2_b[f].value));
      Pooled<T> pooled = max_over_time(h2);
      std::copy_n(pooled.values.data(), ch, context.data() + f * ch);
      if (cache) {
        cache->h1.push_back(std::move(h1));
        cache->h2.push_back(std::move(h2));
        cache->argmax.push_back(std::move(pooled.argmax));
      }
    }
    Tensor<T> hidden = relu(affine(context, params_.hidden_w.value, params_.hidden_b.value));
    Dropped<T> dropped = dropout(hidden, config_.dropout_p, rng, training);
    Tensor<T> logits = affine(dropped.values, params_.out_w.value, params_.out_b.value);
    if (cache) {
      cache->window = window;
      cache->context = std::move(context);
      cache->hidden = std::move(hidden);
      cache->dropped = std::move(dropped.values);
      cache->mask = std::move(dropped.mask);
    }
    return logits;
  }

  /// Backpropagates d(loss)/d(logits); returns the gradient w.r.t. the window.
  Tensor<T> window_backward(const ContextCache& cache, const Tensor<T>& dlogits) {
    Tensor<T> ddrop =
        affine_backward(cache.dropped, params_.out_w.value, dlogits, params_.out_w.grad, params_.out_b.grad);
    Tensor<T> dhidden = relu_backward(cache.hidden, dropout_backward(cache.mask, std::move(ddrop)));
    const Tensor<T> dcontext = affine_backward(cache.context, params_.hidden_w.value, dhidden,
                                               params_.hidden_w.grad, params_.hidden_b.grad);
    const std::size_t ch = config_.ctx_out_channels;
    Tensor<T> dwindow(cache.window.shape());
    for (std::size_t f = 0; f < config_.ctx_filter_sizes.size(); ++f) {
      const Tensor<T>& h2 = cache.h2[f];
      Tensor<T> d = max_over_time_backward<T>(cache.argmax[f], dcontext.values().subspan(f * ch, ch),
                                              h2.rows());
      d = relu_backward(h2, std::move(d));
      Tensor<T> dh1 = conv1d_backward(cache.h1[f], params_.ctx_conv2_w[f].value, d,
                                      params_.ctx_conv2_w[f].grad, params_.ctx_conv2_b[f].grad);
      dh1 = relu_backward(cache.h1[f], std::move(dh1));
      dwindow.vec() += conv1d_backward(cache.window, params_.ctx_conv1_w[f].value, dh1,
                                       params_.ctx_conv1_w[f].grad, params_.ctx_conv1_b[f].grad)
                           .vec();
    }
    return dwindow;
  }

  /// Unnormalized scores for one target token.
  Tensor<T> logits(const EncodedSentence& s, std::size_t target, bool training, Rng& rng) const {
    std::vector<Tensor<T>> reprs(s.size());
    for (std::size_t p : window_positions(s.size(), target))
      reprs[p] = word_repr(s, p, training, rng);
    return window_logits(build_window(s.size(), target, reprs), training, rng);
  }

  /// Tag probabilities for one target token.
  Tensor<T> forward(const EncodedSentence& s, std::size_t target, bool training, Rng& rng) const {
    return softmax(logits(s, target, training, rng));
  }

  /// Forward and backward for one (sentence, target) instance. Gradients of
  /// `scale * loss` are accumulated into the parameters; returns the
  /// unscaled loss.
  T accumulate_gradients(const EncodedSentence& s, std::size_t target, std::size_t gold,
                         T scale, bool training, Rng& rng) {
    const auto positions = window_positions(s.size(), target);
    std::vector<Tensor<T>> reprs(s.size());
    std::vector<WordCache> word_caches(s.size());
    for (std::size_t p : positions) reprs[p] = word_repr(s, p, training, rng, &word_caches[p]);
    ContextCache cache;
    const Tensor<T> scores =
        window_logits(build_window(s.size(), target, reprs), training, rng, &cache);
    XentResult<T> xent = softmax_xent(scores, gold);
    for (T& g : xent.dlogits.values()) g *= scale;
    const Tensor<T> dwindow = window_backward(cache, xent.dlogits);

    const std::size_t rd = config_.repr_dim();
    auto& pos_grad = params_.pos_emb.grad;
    for (std::size_t r = 0; r < config_.window(); ++r) {
      const auto src = dwindow.row(r);
      auto dst = pos_grad.row(r);
      for (std::size_t d = 0; d < config_.pos_emb_dim; ++d) dst[d] += src[rd + 1 + d];
    }
    for (std::size_t p : positions) {
      const std::size_t r = p + config_.window_half - target;
      word_repr_backward(word_caches[p], dwindow.row(r).subspan(0, rd));
    }
    return xent.loss;
  }

  /// Which linear piece the inference forward pass lies on for one target:
  /// every ReLU on/off bit and every max-over-time argmax, flattened. Two
  /// parameter settings with equal patterns share one smooth region.
  std::vector<std::uint32_t> activation_pattern(const EncodedSentence& s, std::size_t target) const {
    Rng unused(0);
    std::vector<std::uint32_t> out;
    auto add_relu = [&](const Tensor<T>& y) {
      for (T v : y.values()) out.push_back(v > T(0) ? 1u : 0u);
    };
    auto add_argmax = [&](const std::vector<std::size_t>& am) {
      for (std::size_t a : am) out.push_back(static_cast<std::uint32_t>(a));
    };
    std::vector<Tensor<T>> reprs(s.size());
    for (std::size_t p : window_positions(s.size(), target)) {
      WordCache wc;
      reprs[p] = word_repr(s, p, false, unused, &wc);
      for (const auto& y : wc.compose.activations) add_relu(y);
      for (const auto& am : wc.compose.argmax) add_argmax(am);
    }
    ContextCache cache;
    window_logits(build_window(s.size(), target, reprs), false, unused, &cache);
    for (std::size_t f = 0; f < cache.h1.size(); ++f) {
      add_relu(cache.h1[f]);
      add_relu(cache.h2[f]);
      add_argmax(cache.argmax[f]);
    }
    add_relu(cache.hidden);
    return out;
  }

  /// Argmax tag id per token at inference (ties to the lowest id).
  std::vector<int> predict(const EncodedSentence& s) const {
    Rng unused(0);
    std::vector<Tensor<T>> reprs(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) reprs[i] = word_repr(s, i, false, unused);
    std::vector<int> out;
    out.reserve(s.size());
    for (std::size_t t = 0; t < s.size(); ++t) {
      const Tensor<T> scores = window_logits(build_window(s.size(), t, reprs), false, unused);
      std::size_t best = 0;
      for (std::size_t k = 1; k < scores.size(); ++k)
        if (scores[k] > scores[best]) best = k;
      out.push_back(static_cast<int>(best));
    }
    return out;
  }

  /// Sentence positions covered by the window around `target`, ascending.
  std::vector<std::size_t> window_positions(std::size_t sentence_len, std::size_t target) const {
    const std::size_t lo = target >= config_.window_half ? target - config_.window_half : 0;
    const std::size_t hi = std::min(sentence_len, target + config_.window_half + 1);
    std::vector<std::size_t> out;
    for (std::size_t p = lo; p < hi; ++p) out.push_back(p);
    return out;
  }

 private:
  ModelConfig config_;
  ModelParams<T> params_;
};

/// Predicted tag strings for a parsed sentence.
template <typename T>
std::vector<std::string> predict_sentence(const Tagger<T>& tagger, const Vocabulary& vocab,
                                          const Sentence& s) {
  const EncodedSentence e = encode_sentence(s, vocab, tagger.config());
  std::vector<std::string> tags;
  for (int id : tagger.predict(e)) tags.push_back(vocab.tag(id));
  return tags;
}

}  // namespace cnntag
