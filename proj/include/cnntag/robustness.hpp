#pragma once

// Synthetic misspellings: one insertion, deletion or substitution per edited
// word, and the sweep that measures tagging accuracy on corrupted dev data.

#include <array>
#include <cstdio>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cnntag/conllu.hpp"
#include "cnntag/random.hpp"
#include "cnntag/training.hpp"
#include "cnntag/utf8.hpp"

namespace cnntag {

enum class EditOp : std::uint8_t { kInsert = 0, kDelete = 1, kSubstitute = 2 };

inline constexpr std::array<EditOp, 3> kEditOps{EditOp::kInsert, EditOp::kDelete,
                                                 EditOp::kSubstitute};
inline constexpr std::array<double, 4> kEditProbs{0.25, 0.5, 0.75, 1.0};

inline std::string_view op_name(EditOp op) {
  switch (op) {
    case EditOp::kInsert: return "insert";
    case EditOp::kDelete: return "delete";
    case EditOp::kSubstitute: return "substitute";
  }
  return "?";
}

inline std::optional<EditOp> parse_op(std::string_view s) {
  if (s == "insert") return EditOp::kInsert;
  if (s == "delete") return EditOp::kDelete;
  if (s == "substitute") return EditOp::kSubstitute;
  return std::nullopt;
}

struct CorruptionSpec {
  EditOp op = EditOp::kSubstitute;
  double prob = 1.0;
  std::uint64_t seed = 1;
  std::u32string alphabet;

  void validate() const {
    if (alphabet.empty()) throw std::invalid_argument("corruption alphabet is empty");
    if (!(prob >= 0.0 && prob <= 1.0))
      throw std::invalid_argument("corruption probability must be in [0,1]");
  }
};

/// Applies one edit at `position` (insert before it, delete it, or replace
/// it). Operates on code points.
inline std::u32string corrupt_word(std::u32string word, EditOp op, std::size_t position,
                                   char32_t rand_char = U'\0') {
  if (position >= word.size())
    throw std::out_of_range("edit position " + std::to_string(position) +
                            " out of range for word of length " + std::to_string(word.size()));
  switch (op) {
    case EditOp::kInsert: word.insert(word.begin() + static_cast<std::ptrdiff_t>(position), rand_char); break;
    case EditOp::kDelete: word.erase(word.begin() + static_cast<std::ptrdiff_t>(position)); break;
    case EditOp::kSubstitute: word[position] = rand_char; break;
  }
  return word;
}

inline std::string corrupt_word(std::string_view word, EditOp op, std::size_t position,
                                char32_t rand_char = U'\0') {
  return utf8_encode(corrupt_word(utf8_decode(word), op, position, rand_char));
}

inline bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' || c == U'\f' ||
         c == 0x85 || c == 0xA0 || c == 0x1680 || (c >= 0x2000 && c <= 0x200A) ||
         c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

/// Distinct non-whitespace characters of all word forms, in first-occurrence
/// order.
inline std::u32string default_alphabet(const std::vector<Sentence>& sentences) {
  std::u32string out;
  std::set<char32_t> seen;
  for (const Sentence& s : sentences)
    for (const Token& t : s.tokens)
      for (char32_t c : utf8_decode(t.form))
        if (!is_space(c) && seen.insert(c).second) out.push_back(c);
  return out;
}

/// Training alphabet recovered from a model's character vocabulary.
inline std::u32string vocab_alphabet(const Vocabulary& v) {
  std::u32string out;
  for (std::size_t i = 2; i < v.char_count(); ++i) {
    const char32_t c = v.character(static_cast<int>(i));
    if (!is_space(c)) out.push_back(c);
  }
  return out;
}

/// Edits one word under `spec` using `rng`; returns nullopt when the word is
/// left untouched. Draw order per eligible word: selection, position, char.
inline std::optional<std::string> maybe_corrupt(std::string_view form, const CorruptionSpec& spec,
                                                Rng& rng) {
  std::u32string w = utf8_decode(form);
  if (w.size() <= 2) return std::nullopt;
  if (!(rng.uniform() < spec.prob)) return std::nullopt;
  const std::size_t pos = rng.uniform_int(w.size());
  char32_t c = U'\0';
  if (spec.op == EditOp::kInsert) {
    c = spec.alphabet[rng.uniform_int(spec.alphabet.size())];
  } else if (spec.op == EditOp::kSubstitute) {
    // Uniform over the alphabet minus the character being replaced.
    std::u32string choices;
    for (char32_t a : spec.alphabet)
      if (a != w[pos]) choices.push_back(a);
    if (choices.empty())
      throw std::invalid_argument("alphabet has no substitute for an existing character");
    c = choices[rng.uniform_int(choices.size())];
  }
  return utf8_encode(corrupt_word(std::move(w), spec.op, pos, c));
}

/// Corrupted copy of `sentences`; only FORM changes. Every word longer than
/// two characters is edited independently with probability spec.prob.
inline std::vector<Sentence> corrupt_corpus(std::vector<Sentence> sentences,
                                            const CorruptionSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  for (Sentence& s : sentences)
    for (Token& t : s.tokens)
      if (auto edited = maybe_corrupt(t.form, spec, rng)) t.form = std::move(*edited);
  return sentences;
}

/// Same edits as corrupt_corpus, applied to CoNLL-U text in place: only the
/// FORM column of token rows is rewritten.
inline std::string corrupt_conllu_text(std::string_view text, const CorruptionSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  return rewrite_column(text, Column::kForm,
                        [&](std::size_t, std::size_t, std::string_view form) {
                          auto edited = maybe_corrupt(form, spec, rng);
                          return edited ? *edited : std::string(form);
                        });
}

struct RobustnessTable {
  double baseline = 0.0;
  /// accuracy[op][prob] following kEditOps x kEditProbs.
  std::array<std::array<double, 4>, 3> accuracy{};

  std::string to_tsv() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "baseline\t%.4f\n", baseline);
    std::string out = buf;
    out += "op";
    for (double p : kEditProbs) {
      std::snprintf(buf, sizeof buf, "\t%.2f", p);
      out += buf;
    }
    out += '\n';
    for (std::size_t o = 0; o < kEditOps.size(); ++o) {
      out += op_name(kEditOps[o]);
      for (double a : accuracy[o]) {
        std::snprintf(buf, sizeof buf, "\t%.4f", a);
        out += buf;
      }
      out += '\n';
    }
    return out;
  }

  /// Accuracy at each probability averaged over the three operations.
  std::array<double, 4> mean_by_prob() const {
    std::array<double, 4> out{};
    for (std::size_t p = 0; p < 4; ++p) {
      for (std::size_t o = 0; o < 3; ++o) out[p] += accuracy[o][p];
      out[p] /= 3.0;
    }
    return out;
  }
};

/// Evaluates `model` on `dev` uncorrupted and under every (op, prob) pair,
/// each corruption drawn from its own seed derived from `seed`.
inline RobustnessTable robustness_experiment(const TrainedModel& model,
                                             const std::vector<Sentence>& dev,
                                             const std::u32string& alphabet, std::uint64_t seed) {
  RobustnessTable table;
  table.baseline = evaluate(model, dev).accuracy;
  for (std::size_t o = 0; o < kEditOps.size(); ++o) {
    for (std::size_t p = 0; p < kEditProbs.size(); ++p) {
      CorruptionSpec spec{kEditOps[o], kEditProbs[p], derive_seed(seed, {o, p}), alphabet};
      table.accuracy[o][p] = evaluate(model, corrupt_corpus(dev, spec)).accuracy;
    }
  }
  return table;
}

}  // namespace cnntag
