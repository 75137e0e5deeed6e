#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "earnvol/date.hpp"
#include "earnvol/market_data.hpp"

namespace earnvol {

// Whether the release happened before the open (the announcement day itself
// trades on the news) or after the close (the next trading day does).
enum class MarketSession { BeforeOpen, AfterClose };

MarketSession parse_session(std::string_view text);  // before_open | after_close
std::string_view to_string(MarketSession s);

// PaperLiteral: log sqrt(sum of squared deviations).
// SampleStd:    log sqrt(sum of squared deviations / n).
enum class VolConvention { PaperLiteral, SampleStd };

VolConvention parse_convention(std::string_view text);  // paper_literal | sample_std
std::string_view to_string(VolConvention c);

struct EarningsEvent {
  std::string ticker;
  Date announce_date;
  MarketSession session = MarketSession::AfterClose;
  Quarter quarter;
  std::string event_id;

  friend bool operator==(const EarningsEvent&, const EarningsEvent&) = default;
};

// Canonical id: "<TICKER>@<YYYY-MM-DD>". Sorts by ticker, then date.
std::string make_event_id(std::string_view ticker, Date announce_date);

inline constexpr int kStandardTaus[] = {3, 7, 15, 30};

struct VolatilityRecord {
  std::string event_id;
  int tau = 0;
  double value = 0.0;  // natural-log volatility
  VolConvention convention = VolConvention::PaperLiteral;

  friend bool operator==(const VolatilityRecord&, const VolatilityRecord&) = default;
};

// Sums of squared deviations below this are rejected instead of producing -inf.
inline constexpr double kDegenerateVarianceFloor = 1e-24;

Date first_post_day(const EarningsEvent& event, const TradingCalendar& cal);

double realized_volatility(std::span<const double> returns,
                           VolConvention convention = VolConvention::PaperLiteral);

// The tau returns that feed one post-earnings volatility, with their dates.
struct PostWindow {
  std::vector<Date> dates;
  std::vector<double> returns;
};

// `returns` must be compute_returns(prices).
PostWindow post_earnings_window(const EarningsEvent& event, const PriceSeries& prices,
                                const ReturnSeries& returns, int tau);

VolatilityRecord post_earnings_volatility(const EarningsEvent& event, const PriceSeries& prices,
                                          const ReturnSeries& returns, int tau,
                                          VolConvention convention = VolConvention::PaperLiteral);
VolatilityRecord post_earnings_volatility(const EarningsEvent& event, const PriceSeries& prices,
                                          int tau,
                                          VolConvention convention = VolConvention::PaperLiteral);

// Rolling volatility for each of the `lookback` trading days that end the day
// before the first post-earnings day. Element k uses the `window_len` returns
// ending on that day (inclusive). Chronological order.
std::vector<double> pre_earnings_volatility_series(
    const EarningsEvent& event, const PriceSeries& prices, int window_len, int lookback,
    VolConvention convention = VolConvention::PaperLiteral);

// Cross-event statistics around the announcement. Offsets run
// -k..-1 (past_k..past_1) then 1..k (future_1..future_k); future_1 is the
// first post-earnings trading day and past_1 the trading day before it.
struct DriftProfile {
  int horizon = 0;
  int tau = 0;
  VolConvention convention = VolConvention::PaperLiteral;
  std::vector<int> offsets;
  std::vector<std::string> labels;
  std::vector<double> mean_abs_return;      // NaN where no event contributed
  std::vector<double> mean_volatility;      // tau-day window starting on the offset day
  std::vector<std::size_t> n_events_per_offset;
  std::vector<std::size_t> n_volatility_per_offset;
  std::size_t skipped_abs_return = 0;
  std::size_t skipped_volatility = 0;
};

DriftProfile event_window_profile(std::span<const EarningsEvent> events,
                                  const std::map<std::string, PriceSeries>& prices_by_ticker,
                                  int horizon, int tau,
                                  VolConvention convention = VolConvention::PaperLiteral);

}  // namespace earnvol
