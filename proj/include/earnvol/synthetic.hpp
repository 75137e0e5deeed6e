#pragma once

// Synthetic markets for tests and demos. Each ticker follows a Gaussian
// return process with its own daily standard deviation; the first
// post-earnings return is scaled by `shock_multiplier`.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "earnvol/date.hpp"
#include "earnvol/market_data.hpp"
#include "earnvol/volatility.hpp"

namespace earnvol {

struct SyntheticConfig {
  std::size_t n_tickers = 90;
  Quarter first_quarter{2019, 1};
  std::size_t n_quarters = 20;
  // Extra quarters generated before `first_quarter`, returned separately as
  // an extended history.
  std::size_t history_quarters = 0;
  double sigma_min = 0.006;  // per-ticker daily sigma, log-uniform
  double sigma_max = 0.04;
  double shock_multiplier = 3.0;
  std::uint64_t seed = 1;
};

struct SyntheticMarket {
  std::vector<EarningsEvent> events;          // quarters from first_quarter on
  std::vector<EarningsEvent> history_events;  // the extra earlier quarters
  std::map<std::string, PriceSeries> prices;
  std::map<std::string, double> sigma;        // by ticker
};

// Monday-to-Friday dates in [first, last].
std::vector<Date> business_days(Date first, Date last);

SyntheticMarket generate_market(const SyntheticConfig& config);

// Writes `earnings.csv`, `history_earnings.csv` (when non-empty) and
// `prices/<TICKER>.csv` under `dir`.
void write_market(const SyntheticMarket& market, const std::filesystem::path& dir);

}  // namespace earnvol
