#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace earnvol {

// Calendar date with no time zone. Stored as days since the Unix epoch so
// comparisons and day arithmetic are integer operations.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days d) : days_(d) {}
  Date(int year, unsigned month, unsigned day);

  // Strict `YYYY-MM-DD`; throws Error(Parse) on anything else.
  static Date parse(std::string_view text);

  std::string iso() const;
  std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
  std::chrono::sys_days sys_days() const { return days_; }
  std::chrono::weekday weekday() const { return std::chrono::weekday{days_}; }

  Date plus_days(int n) const { return Date{days_ + std::chrono::days{n}}; }

  friend constexpr auto operator<=>(const Date&, const Date&) = default;
  friend constexpr bool operator==(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

// A release quarter label such as 2021Q1. Comes from the earnings metadata,
// never inferred from a date.
struct Quarter {
  int year = 0;
  int q = 1;  // 1..4

  static Quarter parse(std::string_view text);  // "2021Q1"
  std::string label() const;
  Quarter next() const;
  Date first_day() const;

  friend constexpr auto operator<=>(const Quarter&, const Quarter&) = default;
  friend constexpr bool operator==(const Quarter&, const Quarter&) = default;
};

}  // namespace earnvol
