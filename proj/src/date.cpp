#include "earnvol/date.hpp"

#include <charconv>
#include <cstdio>

#include "earnvol/errors.hpp"

namespace earnvol {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotATradingDay: return "NotATradingDay";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::InsufficientFutureData: return "InsufficientFutureData";
    case ErrorKind::InsufficientHistory: return "InsufficientHistory";
    case ErrorKind::MissingPrices: return "MissingPrices";
    case ErrorKind::DataConflict: return "DataConflict";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::RaggedDimension: return "RaggedDimension";
    case ErrorKind::KeyMismatch: return "KeyMismatch";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

namespace {

bool parse_uint(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                  std::chrono::day{day}};
  if (!ymd.ok())
    throw Error(ErrorKind::Parse, "invalid calendar date " + std::to_string(year) + "-" +
                                      std::to_string(month) + "-" + std::to_string(day));
  days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      !parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) ||
      !parse_uint(text.substr(8, 2), d))
    throw Error(ErrorKind::Parse, "malformed date '" + std::string(text) + "', expected YYYY-MM-DD");
  return Date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string Date::iso() const {
  auto v = ymd();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(v.year()),
                static_cast<unsigned>(v.month()), static_cast<unsigned>(v.day()));
  return buf;
}

Quarter Quarter::parse(std::string_view text) {
  Quarter out;
  auto pos = text.find_first_of("Qq");
  if (pos != 4 || text.size() != 6 || !parse_uint(text.substr(0, pos), out.year) ||
      !parse_uint(text.substr(pos + 1), out.q) || out.q < 1 || out.q > 4)
    throw Error(ErrorKind::Parse, "malformed quarter '" + std::string(text) + "', expected e.g. 2021Q1");
  return out;
}

std::string Quarter::label() const { return std::to_string(year) + "Q" + std::to_string(q); }

Quarter Quarter::next() const { return q == 4 ? Quarter{year + 1, 1} : Quarter{year, q + 1}; }

Date Quarter::first_day() const { return Date(year, static_cast<unsigned>(3 * q - 2), 1); }

}  // namespace earnvol
