#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cnntag {

/// Thrown for malformed CoNLL-U input. `line()` is 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message,
             const std::string& file = "")
      : std::runtime_error((file.empty() ? "" : file + ": ") + "line " +
                           std::to_string(line) + ": " + message),
        line_(line),
        message_(message) {}
  std::size_t line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::string message_;
};

/// One syntactic word. Columns other than form/upos/feats/head/deprel are
/// carried along so that written files keep them.
struct Token {
  std::string form;
  std::string lemma = "_";
  std::string upos = "_";
  std::string xpos = "_";
  std::string feats = "_";
  int head = 0;
  std::string deprel = "_";
  std::string deps = "_";
  std::string misc = "_";

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;
  /// Line number of the first token row, for error messages.
  std::size_t first_line = 0;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

// Column indices of the 10-column format.
enum class Column : int {
  kId = 0, kForm, kLemma, kUpos, kXpos, kFeats, kHead, kDeprel, kDeps, kMisc
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

inline bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

// Calls `on_line(number, content)` for each line with '\r' stripped.
template <typename F>
void for_each_line(std::string_view text, F&& on_line) {
  std::size_t start = 0;
  std::size_t number = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    on_line(++number, line);
    start = nl + 1;
  }
}

enum class RowKind { kBlank, kComment, kSkip, kToken };

inline RowKind classify(std::string_view line) {
  if (line.empty()) return RowKind::kBlank;
  if (line.front() == '#') return RowKind::kComment;
  const std::string_view id = line.substr(0, line.find('\t'));
  if (id.find('-') != std::string_view::npos ||
      id.find('.') != std::string_view::npos)
    return RowKind::kSkip;
  return RowKind::kToken;
}

}  // namespace detail

/// Parses CoNLL-U text. Comments, multiword-token ranges and empty nodes are
/// skipped. Empty input yields an empty list.
inline std::vector<Sentence> parse_conllu(std::string_view text) {
  std::vector<Sentence> out;
  Sentence current;

  auto flush = [&]() {
    if (current.tokens.empty()) return;
    const int n = static_cast<int>(current.tokens.size());
    for (std::size_t i = 0; i < current.tokens.size(); ++i) {
      const int h = current.tokens[i].head;
      if (h < 0 || h > n)
        throw ParseError(current.first_line + i,
                         "HEAD " + std::to_string(h) +
                             " outside sentence of length " +
                             std::to_string(n));
    }
    out.push_back(std::move(current));
    current = Sentence{};
  };

  detail::for_each_line(text, [&](std::size_t no, std::string_view line) {
    switch (detail::classify(line)) {
      case detail::RowKind::kBlank:
        flush();
        return;
      case detail::RowKind::kComment:
        return;
      case detail::RowKind::kSkip:
        if (detail::split_tabs(line).size() != 10)
          throw ParseError(no, "expected 10 tab-separated columns");
        return;
      case detail::RowKind::kToken:
        break;
    }
    const auto cols = detail::split_tabs(line);
    if (cols.size() != 10)
      throw ParseError(no, "expected 10 tab-separated columns, got " +
                               std::to_string(cols.size()));
    int id = 0;
    if (!detail::parse_int(cols[0], id) || id < 1)
      throw ParseError(no, "unparsable ID '" + std::string(cols[0]) + "'");
    if (id != static_cast<int>(current.tokens.size()) + 1)
      throw ParseError(no, "ID " + std::to_string(id) + " out of sequence");
    Token tok;
    if (cols[1].empty()) throw ParseError(no, "empty FORM");
    tok.form = cols[1];
    tok.lemma = cols[2];
    tok.upos = cols[3];
    tok.xpos = cols[4];
    tok.feats = cols[5];
    if (!detail::parse_int(cols[6], tok.head) || tok.head < 0)
      throw ParseError(no, "unparsable HEAD '" + std::string(cols[6]) + "'");
    tok.deprel = cols[7];
    tok.deps = cols[8];
    tok.misc = cols[9];
    if (current.tokens.empty()) current.first_line = no;
    current.tokens.push_back(std::move(tok));
  });
  flush();
  return out;
}

/// Writes sentences as CoNLL-U, one blank line after each sentence.
inline std::string write_conllu(const std::vector<Sentence>& sentences) {
  std::string out;
  for (const Sentence& s : sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const Token& t = s.tokens[i];
      out += std::to_string(i + 1);
      for (const std::string* col :
           {&t.form, &t.lemma, &t.upos, &t.xpos, &t.feats}) {
        out += '\t';
        out += *col;
      }
      out += '\t';
      out += std::to_string(t.head);
      for (const std::string* col : {&t.deprel, &t.deps, &t.misc}) {
        out += '\t';
        out += *col;
      }
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

/// Rewrites one column of every token row in `text`, leaving every other byte
/// untouched. `value(sentence_index, token_index, old_value)` supplies the
/// replacement. Token rows are numbered exactly as parse_conllu numbers them.
template <typename F>
std::string rewrite_column(std::string_view text, Column column, F&& value) {
  std::string out;
  out.reserve(text.size() + text.size() / 8);
  std::size_t sentence = 0;
  std::size_t token = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    const bool has_nl = nl != std::string_view::npos;
    if (!has_nl) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    std::string_view eol = has_nl ? "\n" : "";
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
      eol = has_nl ? "\r\n" : "\r";
    }
    const auto kind = detail::classify(line);
    if (kind == detail::RowKind::kBlank) {
      if (token > 0) {
        ++sentence;
        token = 0;
      }
      out += line;
    } else if (kind == detail::RowKind::kToken) {
      auto cols = detail::split_tabs(line);
      const auto c = static_cast<std::size_t>(column);
      if (cols.size() != 10) throw ParseError(0, "expected 10 columns");
      const std::string replacement =
          value(sentence, token, std::string_view(cols[c]));
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out += '\t';
        out += (i == c) ? std::string_view(replacement) : cols[i];
      }
      ++token;
    } else {
      out += line;
    }
    out += eol;
    start = nl + 1;
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Reads and parses a CoNLL-U file; parse errors are prefixed with the path.
inline std::vector<Sentence> read_conllu(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_conllu(text);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.message(), path);
  }
}

}  // namespace cnntag
