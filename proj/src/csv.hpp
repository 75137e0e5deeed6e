#pragma once

// Minimal comma-separated reader shared by the price and earnings loaders.
// No quoting: none of the file formats carry commas inside fields.

#include <charconv>
#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "earnvol/errors.hpp"

namespace earnvol::csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    fields.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

class Reader {
 public:
  // The header must begin with `required`; further columns are tolerated
  // only when `allow_extra` is set.
  Reader(std::istream& in, std::vector<std::string> required, bool allow_extra = false)
      : in_(in) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (trim(line).empty()) continue;
      if (line_ == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      header_ = split(line);
      bool ok = header_.size() >= required.size() && (allow_extra || header_.size() == required.size());
      for (std::size_t i = 0; ok && i < required.size(); ++i) ok = header_[i] == required[i];
      if (!ok) {
        std::string want;
        for (const auto& r : required) want += (want.empty() ? "" : ",") + r;
        throw Error(ErrorKind::Parse, "bad header at line " + std::to_string(line_) + ", expected '" + want + "'");
      }
      return;
    }
    throw Error(ErrorKind::EmptyInput, "empty file");
  }

  const std::vector<std::string>& header() const { return header_; }
  std::size_t line_number() const { return line_; }

  std::optional<std::vector<std::string>> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (trim(line).empty()) continue;
      return split(line);
    }
    return std::nullopt;
  }

 private:
  std::istream& in_;
  std::vector<std::string> header_;
  std::size_t line_ = 0;
};

}  // namespace earnvol::csv
