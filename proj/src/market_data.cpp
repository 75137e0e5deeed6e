#include "earnvol/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "csv.hpp"
#include "earnvol/errors.hpp"

namespace earnvol {

TradingCalendar::TradingCalendar(std::vector<Date> days) : days_(std::move(days)) {
  for (std::size_t i = 1; i < days_.size(); ++i)
    if (!(days_[i - 1] < days_[i]))
      throw Error(ErrorKind::InvalidArgument,
                  "trading calendar not strictly increasing at " + days_[i].iso());
}

std::optional<std::size_t> TradingCalendar::index_of(Date d) const {
  auto it = std::lower_bound(days_.begin(), days_.end(), d);
  if (it == days_.end() || *it != d) return std::nullopt;
  return static_cast<std::size_t>(it - days_.begin());
}

std::optional<std::size_t> TradingCalendar::first_index_from(Date d, bool strictly_after) const {
  auto it = strictly_after ? std::upper_bound(days_.begin(), days_.end(), d)
                           : std::lower_bound(days_.begin(), days_.end(), d);
  if (it == days_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - days_.begin());
}

PriceSeries::PriceSeries(std::string ticker, std::vector<PricePoint> points)
    : ticker_(std::move(ticker)), points_(std::move(points)) {
  std::stable_sort(points_.begin(), points_.end(),
                   [](const PricePoint& a, const PricePoint& b) { return a.date < b.date; });
  std::vector<Date> days;
  days.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].close > 0.0) || !std::isfinite(points_[i].close))
      throw Error(ErrorKind::InvalidArgument,
                  ticker_ + ": non-positive close on " + points_[i].date.iso());
    if (i > 0 && points_[i].date == points_[i - 1].date)
      throw Error(ErrorKind::InvalidArgument,
                  ticker_ + ": duplicate date " + points_[i].date.iso());
    days.push_back(points_[i].date);
  }
  calendar_ = TradingCalendar(std::move(days));
}

PriceSeries parse_price_series(std::istream& in, const std::string& ticker) {
  std::vector<PricePoint> points;
  std::vector<std::size_t> lines;
  csv::Reader reader(in, {"date", "close"});
  while (auto row = reader.next()) {
    const auto line = reader.line_number();
    if (row->size() != 2)
      throw Error(ErrorKind::Parse, "malformed row at line " + std::to_string(line) +
                                        ": expected 2 fields, got " + std::to_string(row->size()));
    Date date;
    try {
      date = Date::parse((*row)[0]);
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, "malformed row at line " + std::to_string(line) + ": " + e.what());
    }
    auto close = csv::parse_double((*row)[1]);
    if (!close)
      throw Error(ErrorKind::Parse, "malformed close at line " + std::to_string(line));
    if (!(*close > 0.0))
      throw Error(ErrorKind::Parse, "non-positive close at line " + std::to_string(line));
    points.push_back({date, *close});
    lines.push_back(line);
  }
  if (points.empty()) throw Error(ErrorKind::EmptyInput, "price file for " + ticker + " has no rows");

  // Report duplicates by the line that introduced them.
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].date < points[b].date; });
  for (std::size_t k = 1; k < order.size(); ++k)
    if (points[order[k]].date == points[order[k - 1]].date)
      throw Error(ErrorKind::Parse, "duplicate date " + points[order[k]].date.iso() + " at line " +
                                        std::to_string(std::max(lines[order[k]], lines[order[k - 1]])));
  return PriceSeries(ticker, std::move(points));
}

PriceSeries load_price_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingPrices, "cannot open price file " + path.string());
  try {
    return parse_price_series(in, path.stem().string());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_price_series(std::ostream& out, const PriceSeries& prices) {
  out << "date,close\n";
  for (const auto& p : prices.points()) out << p.date.iso() << ',' << csv::format_double(p.close) << '\n';
}

std::vector<PriceSeries> load_price_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorKind::MissingPrices, "price directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<PriceSeries> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_price_series(f));
  return out;
}

ReturnSeries compute_returns(const PriceSeries& prices) {
  if (prices.size() < 2)
    throw Error(ErrorKind::InvalidArgument,
                prices.ticker() + ": need at least 2 closes to compute returns");
  ReturnSeries out{prices.ticker(), {}};
  const auto pts = prices.points();
  out.points.reserve(pts.size() - 1);
  for (std::size_t k = 1; k < pts.size(); ++k)
    out.points.push_back({pts[k].date, (pts[k].close - pts[k - 1].close) / pts[k - 1].close});
  return out;
}

Date trading_day_at_offset(const TradingCalendar& cal, Date date, long offset) {
  auto idx = cal.index_of(date);
  if (!idx) throw Error(ErrorKind::NotATradingDay, date.iso() + " is not a trading day");
  const long target = static_cast<long>(*idx) + offset;
  if (target < 0 || target >= static_cast<long>(cal.size()))
    throw Error(ErrorKind::OutOfRange, "offset " + std::to_string(offset) + " from " + date.iso() +
                                           " leaves the calendar");
  return cal[static_cast<std::size_t>(target)];
}

}  // namespace earnvol
