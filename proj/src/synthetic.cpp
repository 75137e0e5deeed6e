#include "earnvol/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "earnvol/dataset.hpp"
#include "earnvol/errors.hpp"

namespace earnvol {

std::vector<Date> business_days(Date first, Date last) {
  std::vector<Date> out;
  for (Date d = first; d <= last; d = d.plus_days(1)) {
    const auto wd = d.weekday();
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(d);
  }
  return out;
}

namespace {

Quarter quarter_minus(Quarter q, std::size_t n) {
  int idx = q.year * 4 + (q.q - 1) - static_cast<int>(n);
  return Quarter{idx / 4, idx % 4 + 1};
}

Date next_weekday(Date d) {
  while (d.weekday() == std::chrono::Saturday || d.weekday() == std::chrono::Sunday) d = d.plus_days(1);
  return d;
}

}  // namespace

SyntheticMarket generate_market(const SyntheticConfig& cfg) {
  if (cfg.n_tickers == 0 || cfg.n_quarters == 0)
    throw Error(ErrorKind::InvalidArgument, "synthetic market needs at least one ticker and quarter");
  if (!(cfg.sigma_min > 0.0) || cfg.sigma_max < cfg.sigma_min)
    throw Error(ErrorKind::InvalidArgument, "invalid sigma range");

  const Quarter start = quarter_minus(cfg.first_quarter, cfg.history_quarters);
  const std::size_t total_quarters = cfg.history_quarters + cfg.n_quarters;
  Quarter end = start;
  for (std::size_t i = 1; i < total_quarters; ++i) end = end.next();
  // Room for pre-event windows before the first call and 30-day windows
  // after the last one.
  const auto days = business_days(start.first_day().plus_days(-150), end.next().first_day().plus_days(150));
  const TradingCalendar cal(days);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> offset(25, 65);
  std::bernoulli_distribution before_open(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticMarket market;
  for (std::size_t t = 0; t < cfg.n_tickers; ++t) {
    char name[16];
    std::snprintf(name, sizeof name, "S%03zu", t);
    const std::string ticker = name;
    const double sigma =
        std::exp(std::log(cfg.sigma_min) + unit(rng) * (std::log(cfg.sigma_max) - std::log(cfg.sigma_min)));
    market.sigma[ticker] = sigma;

    std::vector<double> scale(days.size(), 1.0);
    Quarter q = start;
    for (std::size_t i = 0; i < total_quarters; ++i, q = q.next()) {
      EarningsEvent e;
      e.ticker = ticker;
      e.announce_date = next_weekday(q.first_day().plus_days(offset(rng)));
      e.session = before_open(rng) ? MarketSession::BeforeOpen : MarketSession::AfterClose;
      e.quarter = q;
      e.event_id = make_event_id(ticker, e.announce_date);
      const Date f = first_post_day(e, cal);
      // The return dated on the first post day moves that day's close.
      scale[*cal.index_of(f)] = cfg.shock_multiplier;
      (i < cfg.history_quarters ? market.history_events : market.events).push_back(std::move(e));
    }

    std::vector<PricePoint> points;
    points.reserve(days.size());
    double close = 100.0;
    for (std::size_t d = 0; d < days.size(); ++d) {
      if (d > 0) close *= 1.0 + std::max(-0.5, sigma * scale[d] * normal(rng));
      points.push_back({days[d], close});
    }
    market.prices.emplace(ticker, PriceSeries(ticker, std::move(points)));
  }
  return market;
}

void write_market(const SyntheticMarket& market, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "prices");
  auto write_events = [&](const std::filesystem::path& p, const std::vector<EarningsEvent>& events) {
    std::ofstream out(p);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + p.string());
    write_earnings(out, events);
  };
  write_events(dir / "earnings.csv", market.events);
  if (!market.history_events.empty()) write_events(dir / "history_earnings.csv", market.history_events);
  for (const auto& [ticker, series] : market.prices) {
    std::ofstream out(dir / "prices" / (ticker + ".csv"));
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write prices for " + ticker);
    write_price_series(out, series);
  }
}

}  // namespace earnvol
