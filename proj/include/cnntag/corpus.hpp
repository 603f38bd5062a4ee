#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cnntag/conllu.hpp"
#include "cnntag/utf8.hpp"

namespace cnntag {

enum class Task : std::uint8_t { kPos = 0, kMorph = 1, kStag = 2 };

inline std::string_view task_name(Task t) {
  switch (t) {
    case Task::kPos: return "pos";
    case Task::kMorph: return "morph";
    case Task::kStag: return "stag";
  }
  return "?";
}

inline std::optional<Task> parse_task(std::string_view s) {
  if (s == "pos") return Task::kPos;
  if (s == "morph") return Task::kMorph;
  if (s == "stag") return Task::kStag;
  return std::nullopt;
}

/// Raised when supertags are requested for a sentence whose heads do not form
/// a single-rooted tree.
class TreeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Returns an empty string if `s` is a single-rooted acyclic tree, otherwise a
/// description of the first defect found.
inline std::string tree_defect(const Sentence& s) {
  const int n = static_cast<int>(s.tokens.size());
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const int h = s.tokens[i].head;
    if (h < 0 || h > n) return "head out of range at token " + std::to_string(i + 1);
    if (h == i + 1) return "self-loop at token " + std::to_string(i + 1);
    if (h == 0) ++roots;
  }
  if (roots != 1) return std::to_string(roots) + " roots";
  // Every token must reach the root within n steps.
  for (int i = 0; i < n; ++i) {
    int cur = i + 1;
    int steps = 0;
    while (cur != 0 && steps <= n) {
      cur = s.tokens[cur - 1].head;
      ++steps;
    }
    if (cur != 0) return "cycle through token " + std::to_string(i + 1);
  }
  return {};
}

/// Model-1 supertags: `<deprel>/<L|R|N>` then "+L" if the token has a
/// dependent on its left and "+R" if it has one on its right.
inline std::vector<std::string> supertags(const Sentence& s) {
  if (auto defect = tree_defect(s); !defect.empty())
    throw TreeError("sentence at line " + std::to_string(s.first_line) +
                    " is not a single-rooted tree: " + defect);
  const std::size_t n = s.tokens.size();
  std::vector<bool> left_dep(n, false), right_dep(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const int h = s.tokens[i].head;
    if (h == 0) continue;
    const std::size_t head = static_cast<std::size_t>(h - 1);
    if (i < head) left_dep[head] = true;
    else right_dep[head] = true;
  }
  std::vector<std::string> tags;
  tags.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int h = s.tokens[i].head;
    std::string tag = s.tokens[i].deprel;
    tag += '/';
    tag += h == 0 ? 'N' : (static_cast<std::size_t>(h - 1) < i ? 'L' : 'R');
    if (left_dep[i]) tag += "+L";
    if (right_dep[i]) tag += "+R";
    tags.push_back(std::move(tag));
  }
  return tags;
}

inline std::vector<std::string> gold_tags(const Sentence& s, Task task) {
  if (task == Task::kStag) return supertags(s);
  std::vector<std::string> tags;
  tags.reserve(s.tokens.size());
  for (const Token& t : s.tokens)
    tags.push_back(task == Task::kPos ? t.upos : t.feats);
  return tags;
}

/// Word, character and tag index spaces. Words and characters reserve
/// id 0 (padding) and id 1 (unknown); tags have no reserved ids.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary() : words_{"<pad>", "<unk>"}, word_freq_{0, 0}, chars_{0, 0} {}

  int add_word(std::string_view w, std::uint64_t count = 1) {
    auto it = word_ids_.find(w);
    if (it == word_ids_.end()) {
      const int id = static_cast<int>(words_.size());
      word_ids_.emplace(std::string(w), id);
      words_.emplace_back(w);
      word_freq_.push_back(count);
      return id;
    }
    word_freq_[static_cast<std::size_t>(it->second)] += count;
    return it->second;
  }

  int add_char(char32_t c) {
    auto it = char_ids_.find(c);
    if (it != char_ids_.end()) return it->second;
    const int id = static_cast<int>(chars_.size());
    char_ids_.emplace(c, id);
    chars_.push_back(c);
    return id;
  }

  int add_tag(std::string_view t) {
    auto it = tag_ids_.find(t);
    if (it != tag_ids_.end()) return it->second;
    const int id = static_cast<int>(tags_.size());
    tag_ids_.emplace(std::string(t), id);
    tags_.emplace_back(t);
    return id;
  }

  int word_id(std::string_view w) const {
    auto it = word_ids_.find(w);
    return it == word_ids_.end() ? kUnk : it->second;
  }
  int char_id(char32_t c) const {
    auto it = char_ids_.find(c);
    return it == char_ids_.end() ? kUnk : it->second;
  }
  std::optional<int> tag_id(std::string_view t) const {
    auto it = tag_ids_.find(t);
    if (it == tag_ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  char32_t character(int id) const { return chars_.at(static_cast<std::size_t>(id)); }
  const std::string& tag(int id) const { return tags_.at(static_cast<std::size_t>(id)); }

  std::uint64_t word_freq(int id) const { return word_freq_.at(static_cast<std::size_t>(id)); }
  std::uint64_t word_freq(std::string_view w) const {
    auto it = word_ids_.find(w);
    return it == word_ids_.end() ? 0 : word_freq_[static_cast<std::size_t>(it->second)];
  }

  /// Sizes include the two reserved ids.
  std::size_t word_count() const { return words_.size(); }
  std::size_t char_count() const { return chars_.size(); }
  std::size_t tag_count() const { return tags_.size(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.word_freq_ == b.word_freq_ &&
           a.chars_ == b.chars_ && a.tags_ == b.tags_;
  }

 private:
  std::map<std::string, int, std::less<>> word_ids_;
  std::vector<std::string> words_;
  std::vector<std::uint64_t> word_freq_;
  std::map<char32_t, int> char_ids_;
  std::vector<char32_t> chars_;
  std::map<std::string, int, std::less<>> tag_ids_;
  std::vector<std::string> tags_;
};

/// Ids are assigned in first-occurrence order.
inline Vocabulary build_vocab(const std::vector<Sentence>& sentences, Task task) {
  Vocabulary v;
  for (const Sentence& s : sentences) {
    for (const Token& t : s.tokens) {
      v.add_word(t.form);
      for (char32_t c : utf8_decode(t.form)) v.add_char(c);
    }
    for (const std::string& tag : gold_tags(s, task)) v.add_tag(tag);
  }
  return v;
}

struct TagsetStats {
  std::size_t distinct = 0;
  /// (tag, count) in first-occurrence order.
  std::vector<std::pair<std::string, std::size_t>> histogram;
};

inline TagsetStats tagset_stats(const std::vector<Sentence>& sentences, Task task) {
  TagsetStats stats;
  std::map<std::string, std::size_t, std::less<>> index;
  for (const Sentence& s : sentences) {
    for (std::string& tag : gold_tags(s, task)) {
      auto it = index.find(tag);
      if (it == index.end()) {
        index.emplace(tag, stats.histogram.size());
        stats.histogram.emplace_back(std::move(tag), 1);
      } else {
        ++stats.histogram[it->second].second;
      }
    }
  }
  stats.distinct = stats.histogram.size();
  return stats;
}

}  // namespace cnntag
