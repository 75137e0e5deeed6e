#include "earnvol/volatility.hpp"

#include <cmath>
#include <limits>

#include "earnvol/errors.hpp"

namespace earnvol {

MarketSession parse_session(std::string_view text) {
  if (text == "before_open") return MarketSession::BeforeOpen;
  if (text == "after_close") return MarketSession::AfterClose;
  throw Error(ErrorKind::Parse, "unknown session '" + std::string(text) +
                                    "', expected before_open or after_close");
}

std::string_view to_string(MarketSession s) {
  return s == MarketSession::BeforeOpen ? "before_open" : "after_close";
}

VolConvention parse_convention(std::string_view text) {
  if (text == "paper_literal") return VolConvention::PaperLiteral;
  if (text == "sample_std") return VolConvention::SampleStd;
  throw Error(ErrorKind::Parse, "unknown convention '" + std::string(text) +
                                    "', expected paper_literal or sample_std");
}

std::string_view to_string(VolConvention c) {
  return c == VolConvention::PaperLiteral ? "paper_literal" : "sample_std";
}

std::string make_event_id(std::string_view ticker, Date announce_date) {
  return std::string(ticker) + "@" + announce_date.iso();
}

Date first_post_day(const EarningsEvent& event, const TradingCalendar& cal) {
  const bool strictly_after = event.session == MarketSession::AfterClose;
  auto idx = cal.first_index_from(event.announce_date, strictly_after);
  if (!idx)
    throw Error(ErrorKind::InsufficientFutureData,
                event.event_id + ": no trading day " + (strictly_after ? "after " : "on or after ") +
                    event.announce_date.iso());
  return cal[*idx];
}

double realized_volatility(std::span<const double> returns, VolConvention convention) {
  const std::size_t n = returns.size();
  if (n < 2)
    throw Error(ErrorKind::InvalidArgument, "realized volatility needs at least 2 returns, got " +
                                                std::to_string(n));
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  if (!(ss >= kDegenerateVarianceFloor))
    throw Error(ErrorKind::DegenerateVariance, "zero variance in return window");
  if (convention == VolConvention::SampleStd) ss /= static_cast<double>(n);
  return std::log(std::sqrt(ss));
}

namespace {

std::size_t first_post_index(const EarningsEvent& event, const PriceSeries& prices) {
  return *prices.calendar().index_of(first_post_day(event, prices.calendar()));
}

void check_ticker(const EarningsEvent& event, const PriceSeries& prices) {
  if (!event.ticker.empty() && !prices.ticker().empty() && event.ticker != prices.ticker())
    throw Error(ErrorKind::InvalidArgument,
                event.event_id + ": prices belong to " + prices.ticker());
}

}  // namespace

PostWindow post_earnings_window(const EarningsEvent& event, const PriceSeries& prices,
                                const ReturnSeries& returns, int tau) {
  check_ticker(event, prices);
  if (tau < 2) throw Error(ErrorKind::InvalidArgument, "tau must be >= 2");
  const std::size_t f = first_post_index(event, prices);
  if (f == 0)
    throw Error(ErrorKind::InsufficientHistory,
                event.event_id + ": no close before the first post-earnings day");
  // Return dated on price day p sits at returns index p - 1.
  const std::size_t last = f + static_cast<std::size_t>(tau) - 1;
  if (last >= prices.size())
    throw Error(ErrorKind::InsufficientFutureData,
                event.event_id + ": " + std::to_string(prices.size() - f) + " post days available, tau=" +
                    std::to_string(tau));
  PostWindow w;
  for (std::size_t p = f; p <= last; ++p) {
    w.dates.push_back(returns.points[p - 1].date);
    w.returns.push_back(returns.points[p - 1].r);
  }
  return w;
}

VolatilityRecord post_earnings_volatility(const EarningsEvent& event, const PriceSeries& prices,
                                          const ReturnSeries& returns, int tau,
                                          VolConvention convention) {
  auto w = post_earnings_window(event, prices, returns, tau);
  try {
    return {event.event_id, tau, realized_volatility(w.returns, convention), convention};
  } catch (const Error& e) {
    throw Error(e.kind(), event.event_id + " tau=" + std::to_string(tau) + ": " + e.what());
  }
}

VolatilityRecord post_earnings_volatility(const EarningsEvent& event, const PriceSeries& prices,
                                          int tau, VolConvention convention) {
  return post_earnings_volatility(event, prices, compute_returns(prices), tau, convention);
}

std::vector<double> pre_earnings_volatility_series(const EarningsEvent& event,
                                                   const PriceSeries& prices, int window_len,
                                                   int lookback, VolConvention convention) {
  check_ticker(event, prices);
  if (window_len < 2 || lookback < 1)
    throw Error(ErrorKind::InvalidArgument, "window_len must be >= 2 and lookback >= 1");
  const auto returns = compute_returns(prices);
  const long f = static_cast<long>(first_post_index(event, prices));
  const long first_price_day = f - lookback - window_len + 1;
  if (first_price_day < 1)
    throw Error(ErrorKind::InsufficientHistory,
                event.event_id + ": " + std::to_string(f) + " pre-announcement closes, need " +
                    std::to_string(lookback + window_len));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(lookback));
  std::vector<double> window(static_cast<std::size_t>(window_len));
  for (long d = f - lookback; d <= f - 1; ++d) {
    for (long k = 0; k < window_len; ++k)
      window[static_cast<std::size_t>(k)] =
          returns.points[static_cast<std::size_t>(d - window_len + 1 + k - 1)].r;
    out.push_back(realized_volatility(window, convention));
  }
  return out;
}

DriftProfile event_window_profile(std::span<const EarningsEvent> events,
                                  const std::map<std::string, PriceSeries>& prices_by_ticker,
                                  int horizon, int tau, VolConvention convention) {
  if (events.empty()) throw Error(ErrorKind::EmptyInput, "drift profile needs at least one event");
  if (horizon < 1 || tau < 2) throw Error(ErrorKind::InvalidArgument, "need horizon >= 1 and tau >= 2");

  DriftProfile prof;
  prof.horizon = horizon;
  prof.tau = tau;
  prof.convention = convention;
  for (int j = horizon; j >= 1; --j) {
    prof.offsets.push_back(-j);
    prof.labels.push_back("past_" + std::to_string(j));
  }
  for (int j = 1; j <= horizon; ++j) {
    prof.offsets.push_back(j);
    prof.labels.push_back("future_" + std::to_string(j));
  }
  const std::size_t m = prof.offsets.size();
  std::vector<double> sum_abs(m, 0.0), sum_vol(m, 0.0);
  prof.n_events_per_offset.assign(m, 0);
  prof.n_volatility_per_offset.assign(m, 0);

  std::map<std::string, ReturnSeries> returns_cache;
  std::vector<double> window(static_cast<std::size_t>(tau));
  for (const auto& ev : events) {
    auto pit = prices_by_ticker.find(ev.ticker);
    if (pit == prices_by_ticker.end())
      throw Error(ErrorKind::MissingPrices, "no prices for ticker " + ev.ticker);
    const PriceSeries& prices = pit->second;
    if (prices.size() < 2) {
      prof.skipped_abs_return += m;
      prof.skipped_volatility += m;
      continue;
    }
    auto [rit, inserted] = returns_cache.try_emplace(ev.ticker);
    if (inserted) rit->second = compute_returns(prices);
    const auto& rets = rit->second.points;

    long f = 0;
    try {
      f = static_cast<long>(first_post_index(ev, prices));
    } catch (const Error&) {
      prof.skipped_abs_return += m;
      prof.skipped_volatility += m;
      continue;
    }
    const long n = static_cast<long>(prices.size());
    for (std::size_t i = 0; i < m; ++i) {
      const int off = prof.offsets[i];
      const long day = off > 0 ? f + off - 1 : f + off;
      if (day >= 1 && day < n) {
        sum_abs[i] += std::abs(rets[static_cast<std::size_t>(day - 1)].r);
        ++prof.n_events_per_offset[i];
      } else {
        ++prof.skipped_abs_return;
      }
      if (day >= 1 && day + tau - 1 < n) {
        for (int k = 0; k < tau; ++k) window[static_cast<std::size_t>(k)] = rets[static_cast<std::size_t>(day - 1 + k)].r;
        try {
          sum_vol[i] += realized_volatility(window, convention);
          ++prof.n_volatility_per_offset[i];
        } catch (const Error&) {
          ++prof.skipped_volatility;
        }
      } else {
        ++prof.skipped_volatility;
      }
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < m; ++i) {
    const auto na = prof.n_events_per_offset[i], nv = prof.n_volatility_per_offset[i];
    prof.mean_abs_return.push_back(na ? sum_abs[i] / static_cast<double>(na) : nan);
    prof.mean_volatility.push_back(nv ? sum_vol[i] / static_cast<double>(nv) : nan);
  }
  return prof;
}

}  // namespace earnvol
