#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "earnvol/date.hpp"

namespace earnvol {

// Ordered set of dates on which trading occurred. Derived from a price file;
// there is no exchange holiday table.
class TradingCalendar {
 public:
  TradingCalendar() = default;
  // Throws Error(InvalidArgument) unless `days` is strictly increasing.
  explicit TradingCalendar(std::vector<Date> days);

  std::size_t size() const { return days_.size(); }
  bool empty() const { return days_.empty(); }
  const Date& operator[](std::size_t i) const { return days_[i]; }
  std::span<const Date> days() const { return days_; }

  std::optional<std::size_t> index_of(Date d) const;
  bool contains(Date d) const { return index_of(d).has_value(); }
  // First trading day >= d (or > d when `strictly_after`).
  std::optional<std::size_t> first_index_from(Date d, bool strictly_after = false) const;

  friend bool operator==(const TradingCalendar&, const TradingCalendar&) = default;

 private:
  std::vector<Date> days_;
};

struct PricePoint {
  Date date;
  double close = 0.0;
  friend bool operator==(const PricePoint&, const PricePoint&) = default;
};

// Daily closes of one ticker. Closes are strictly positive and dates strictly
// increasing; the calendar is the list of those dates.
class PriceSeries {
 public:
  PriceSeries() = default;
  // Sorts by date, rejects duplicates and non-positive closes.
  PriceSeries(std::string ticker, std::vector<PricePoint> points);

  const std::string& ticker() const { return ticker_; }
  std::span<const PricePoint> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const TradingCalendar& calendar() const { return calendar_; }

  friend bool operator==(const PriceSeries& a, const PriceSeries& b) {
    return a.ticker_ == b.ticker_ && a.points_ == b.points_;
  }

 private:
  std::string ticker_;
  std::vector<PricePoint> points_;
  TradingCalendar calendar_;
};

struct ReturnPoint {
  Date date;
  double r = 0.0;
};

// Simple daily returns; point k is dated on the later of the two closes.
struct ReturnSeries {
  std::string ticker;
  std::vector<ReturnPoint> points;
};

// Price file: header `date,close`, one row per trading day.
PriceSeries parse_price_series(std::istream& in, const std::string& ticker);
// Ticker is the filename stem.
PriceSeries load_price_series(const std::filesystem::path& path);
void write_price_series(std::ostream& out, const PriceSeries& prices);
// Loads every `*.csv` in `dir`, keyed by ticker.
std::vector<PriceSeries> load_price_directory(const std::filesystem::path& dir);

ReturnSeries compute_returns(const PriceSeries& prices);

Date trading_day_at_offset(const TradingCalendar& cal, Date date, long offset);

}  // namespace earnvol
