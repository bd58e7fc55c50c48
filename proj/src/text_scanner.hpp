#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mindet/wavefunction.hpp"

namespace mindet::detail {

struct Record {
  std::size_t line = 0;
  std::vector<std::string> tokens;
};

/// Splits text into whitespace-separated records, skipping blanks and `#` comments.
class LineScanner {
 public:
  explicit LineScanner(std::string_view text) : text_(text) {}

  std::optional<Record> next_record() {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view raw = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      Record rec;
      rec.line = line_;
      std::size_t k = 0;
      while (k < raw.size()) {
        while (k < raw.size() && is_space(raw[k])) ++k;
        std::size_t start = k;
        while (k < raw.size() && !is_space(raw[k])) ++k;
        if (k > start) rec.tokens.emplace_back(raw.substr(start, k - start));
      }
      if (!rec.tokens.empty()) return rec;
    }
    return std::nullopt;
  }

  /// Reads a mandatory `key <int>` record.
  int keyed_int(std::string_view key);

  std::size_t line() const noexcept { return line_; }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

inline int to_int(const std::string& tok, std::size_t line) {
  int value = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError(line, "expected an integer, got '" + tok + "'");
  return value;
}

inline double to_real(const std::string& tok, std::size_t line) {
  if (tok.find_first_of("ijIJ(),") != std::string::npos && tok != "inf" && tok != "-inf")
    throw ParseError(line, "complex or malformed coefficient '" + tok + "' (real values only)");
  double value = 0.0;
  const char* first = tok.data();
  if (!tok.empty() && tok[0] == '+') ++first;
  auto res = std::from_chars(first, tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError(line, "expected a real number, got '" + tok + "'");
  if (!std::isfinite(value)) throw ParseError(line, "non-finite coefficient");
  return value;
}

inline int LineScanner::keyed_int(std::string_view key) {
  auto rec = next_record();
  if (!rec || rec->tokens.size() != 2 || rec->tokens[0] != key)
    throw ParseError(rec ? rec->line : line_, "expected '" + std::string(key) + " <int>'");
  return to_int(rec->tokens[1], rec->line);
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mindet::detail
