#pragma once

#include <string>
#include <vector>

#include "cnntag/conllu.hpp"
#include "cnntag/random.hpp"

namespace cnntag::testing {

/// Random lowercase word of length [min_len, max_len].
inline std::string random_word(Rng& rng, std::size_t min_len, std::size_t max_len) {
  const std::size_t len = min_len + rng.uniform_int(max_len - min_len + 1);
  std::string w;
  for (std::size_t i = 0; i < len; ++i)
    w.push_back(static_cast<char>('a' + rng.uniform_int(26)));
  return w;
}

/// Tag determined by the final character: four classes of unequal size.
inline std::string final_char_tag(const std::string& w) {
  const char c = w.back();
  if (c <= 'f') return "A";
  if (c <= 'm') return "B";
  if (c <= 's') return "C";
  return "D";
}

/// Sentences of random words tagged (UPOS) by their final character. Heads
/// form a right-branching chain so supertags are also defined.
inline std::vector<Sentence> toy_corpus(std::size_t sentences, std::uint64_t seed,
                                        std::size_t min_len = 3, std::size_t max_len = 8) {
  Rng rng(seed);
  std::vector<Sentence> out;
  for (std::size_t s = 0; s < sentences; ++s) {
    Sentence sent;
    const std::size_t n = min_len + rng.uniform_int(max_len - min_len + 1);
    for (std::size_t i = 0; i < n; ++i) {
      Token t;
      t.form = random_word(rng, 1, 9);
      t.upos = final_char_tag(t.form);
      t.feats = "Final=" + std::string(1, t.form.back());
      t.head = i == 0 ? 0 : static_cast<int>(i);
      t.deprel = i == 0 ? "root" : "dep";
      sent.tokens.push_back(std::move(t));
    }
    out.push_back(std::move(sent));
  }
  return out;
}

/// Words are random stems over 'a'..'t' closed by one of "wxyz"; the closing
/// letter picks the UPOS tag, so only the final character carries the label.
inline std::vector<Sentence> suffix_corpus(std::size_t sentences, std::uint64_t seed,
                                           std::size_t min_len = 8, std::size_t max_len = 15) {
  static const char* const kTags[] = {"A", "B", "C", "D"};
  Rng rng(seed);
  std::vector<Sentence> out;
  for (std::size_t s = 0; s < sentences; ++s) {
    Sentence sent;
    const std::size_t n = min_len + rng.uniform_int(max_len - min_len + 1);
    for (std::size_t i = 0; i < n; ++i) {
      Token t;
      const std::size_t stem = 1 + rng.uniform_int(8);
      for (std::size_t j = 0; j < stem; ++j)
        t.form.push_back(static_cast<char>('a' + rng.uniform_int(20)));
      const std::size_t k = rng.uniform_int(4);
      t.form.push_back(static_cast<char>('w' + k));
      t.upos = kTags[k];
      t.head = i == 0 ? 0 : static_cast<int>(i);
      t.deprel = i == 0 ? "root" : "dep";
      sent.tokens.push_back(std::move(t));
    }
    out.push_back(std::move(sent));
  }
  return out;
}

inline Sentence make_sentence(const std::vector<std::string>& forms, const std::vector<int>& heads,
                       const std::vector<std::string>& deprels) {
  Sentence s;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    Token t;
    t.form = forms[i];
    t.upos = "U" + std::to_string(i);
    t.head = heads[i];
    t.deprel = deprels[i];
    s.tokens.push_back(t);
  }
  return s;
}

// Random rooted tree: node i attaches to a random earlier node of a random
// permutation, so every tree shape and order is reachable.
inline Sentence random_tree(Rng& rng, std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);
  std::vector<int> heads(n, 0);
  for (std::size_t i = 1; i < n; ++i)
    heads[order[i]] = static_cast<int>(order[rng.uniform_int(i)]) + 1;
  std::vector<std::string> forms(n, "w"), deprels;
  for (std::size_t i = 0; i < n; ++i) deprels.push_back("d" + std::to_string(rng.uniform_int(3)));
  return make_sentence(forms, heads, deprels);
}

/// Supertag of token i by a direct scan over all tokens.
inline std::string scan_supertag(const Sentence& s, std::size_t i) {
  const int head = s.tokens[i].head;
  bool left = false, right = false;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s.tokens[j].head != static_cast<int>(i) + 1) continue;
    (j < i ? left : right) = true;
  }
  std::string out = s.tokens[i].deprel + "/" +
                    (head == 0 ? "N" : (head - 1 < static_cast<int>(i) ? "L" : "R"));
  if (left) out += "+L";
  if (right) out += "+R";
  return out;
}

}  // namespace cnntag::testing
