#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "earnvol/baselines.hpp"
#include "earnvol/errors.hpp"
#include "earnvol/evalharness.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace earnvol;
using earnvol::testing::make_event;
using earnvol::testing::thrown_kind;

namespace {

EventEntry entry(const std::string& ticker, Quarter q, double value_for_all_taus) {
  // One announcement per quarter, 40 days in.
  auto ev = make_event(ticker, q.first_day().plus_days(40).iso(), MarketSession::AfterClose, q.label());
  EventEntry e{ev, Provenance::Native, {}, {}};
  for (int tau : kStandardTaus) e.records.emplace(tau, VolatilityRecord{ev.event_id, tau, value_for_all_taus});
  return e;
}

// Tickers x quarters table where value(ticker, quarter) = f(t, qi).
template <class F>
EventTable grid_table(int tickers, int quarters, F f) {
  std::vector<EventEntry> entries;
  for (int t = 0; t < tickers; ++t) {
    Quarter q{2019, 1};
    for (int i = 0; i < quarters; ++i, q = q.next()) entries.push_back(entry("K" + std::to_string(t), q, f(t, i)));
  }
  return EventTable(std::move(entries));
}

double run_mse(const EventTable& table, const Split& split, const std::string& model, int tau = 3) {
  const auto run = run_baseline(table, split, std::vector<int>{tau}, *parse_model_spec(model));
  return mse(run.predictions, test_truth(table, split, tau), tau);
}

}  // namespace

TEST_CASE("aggregators") {
  CHECK(pev_predict(std::vector<double>{-2.0, -3.0}, MeanAgg{}) == -2.5);
  CHECK(pev_predict(std::vector<double>{-2.0, -3.0, -10.0}, MedianAgg{}) == -3.0);
  CHECK(pev_predict(std::vector<double>{-2.0, -3.0, -10.0, -1.0}, MedianAgg{}) == -2.5);
  CHECK(*stpev_predict(std::vector<double>{-2.726}, MeanAgg{}) == -2.726);
  CHECK(*stpev_predict(std::vector<double>{-2.0, -4.0}, MeanAgg{}) == -3.0);
  CHECK(*stpev_predict(std::vector<double>{-2.0, -4.0}, MedianAgg{}) == -3.0);
  CHECK_FALSE(stpev_predict(std::vector<double>{}, MeanAgg{}).has_value());
  CHECK(thrown_kind([] { pev_predict(std::vector<double>{}, MeanAgg{}); }) == ErrorKind::EmptyInput);
  CHECK(thrown_kind([] { aggregate(std::vector<double>{1.0}, LinearRegressionAgg{}); }) == ErrorKind::InvalidArgument);
  CHECK(is_training_free(MeanAgg{}));
  CHECK_FALSE(is_training_free(MlpAgg{}));
}

TEST_CASE("pev over a synthetic pool matches a one-line fold") {
  const auto& table = earnvol::testing::dec_table();
  std::vector<double> pool;
  for (const auto& e : table.entries()) pool.push_back(e.value(7));
  const double fold = std::accumulate(pool.begin(), pool.end(), 0.0) / static_cast<double>(pool.size());
  CHECK(pev_predict(pool, MeanAgg{}) == doctest::Approx(fold).epsilon(1e-13));
  auto sorted = pool;
  std::sort(sorted.begin(), sorted.end());
  CHECK(pev_predict(pool, MedianAgg{}) == 0.5 * (sorted[899] + sorted[900]));
}

TEST_CASE("property: containment and shift for Mean and Median") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z(-3.0, 0.7);
  std::uniform_real_distribution<double> shift(-2.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> h(1 + trial % 17);
    for (auto& x : h) x = z(rng);
    const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
    const double c = shift(rng);
    auto moved = h;
    for (auto& x : moved) x += c;
    for (Aggregator agg : {Aggregator{MeanAgg{}}, Aggregator{MedianAgg{}}}) {
      const double p = *stpev_predict(h, agg);
      CHECK(p >= *lo);
      CHECK(p <= *hi);
      CHECK(*stpev_predict(moved, agg) == doctest::Approx(p + c).epsilon(1e-12));
    }
  }
}

TEST_CASE("model names") {
  for (const char* name : {"PEV(Mean)", "PEV(Median)", "STPEV(Mean)", "STPEV(Median)", "STPEV(LR)", "STPEV(MLP)"}) {
    const auto spec = parse_model_spec(name);
    REQUIRE(spec);
    CHECK(spec->label() == name);
  }
  CHECK_FALSE(parse_model_spec("STPEV(mean)"));
  CHECK_FALSE(parse_model_spec("PEV"));
}

TEST_CASE("stationary signatures: STPEV(Mean) is exact, PEV(Mean) pays the between-ticker variance") {
  // Dyadic levels keep every sum exact.
  const std::vector<double> levels{-4.0, -3.5, -3.125, -2.25, -1.875, -2.75};
  const auto table = grid_table(6, 8, [&](int t, int) { return levels[t]; });
  const auto split = rolling_quarter_split(table, Quarter{2020, 4});
  CHECK(run_mse(table, split, "STPEV(Mean)") == 0.0);
  CHECK(run_mse(table, split, "STPEV(Median)") == 0.0);
  // Each ticker contributes equally to the pool, so PEV(Mean) predicts the
  // mean level; its MSE is the population variance of the levels.
  const double mean = std::accumulate(levels.begin(), levels.end(), 0.0) / 6.0;
  double var = 0.0;
  for (double l : levels) var += (l - mean) * (l - mean);
  var /= 6.0;
  CHECK(run_mse(table, split, "PEV(Mean)") == doctest::Approx(var).epsilon(1e-12));
}

TEST_CASE("heterogeneous signatures: STPEV beats PEV") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<double> level(30);
  for (int t = 0; t < 30; ++t) level[t] = -4.0 + 0.08 * t;
  std::vector<std::vector<double>> v(30, std::vector<double>(12));
  for (auto& row : v)
    for (auto& x : row) x = noise(rng);
  const auto table = grid_table(30, 12, [&](int t, int i) { return level[t] + v[t][i]; });
  const auto split = rolling_quarter_split(table, Quarter{2021, 4});
  CHECK(run_mse(table, split, "STPEV(Mean)") < run_mse(table, split, "PEV(Mean)"));
}

TEST_CASE("first-ever events fall back to PEV and are counted") {
  std::vector<EventEntry> entries{entry("OLD", Quarter{2019, 1}, -3.0), entry("OLD", Quarter{2019, 2}, -2.0),
                                  entry("OLD", Quarter{2019, 3}, -2.5), entry("NEW", Quarter{2019, 3}, -4.0)};
  const EventTable table(std::move(entries));
  const auto split = rolling_quarter_split(table, Quarter{2019, 3});
  const auto run = run_baseline(table, split, std::vector<int>{3, 7}, *parse_model_spec("STPEV(Mean)"));
  CHECK(run.fallbacks.at("PEV(Mean)") == 2);  // one event, two windows
  CHECK(run.predictions.values.at("NEW@2019-08-10").at(3) == -2.5);
  CHECK(run.predictions.values.at("OLD@2019-08-10").at(3) == -2.5);
}

TEST_CASE("training-free guarantee: other tickers never move an STPEV(Mean) prediction") {
  const auto& table = earnvol::testing::dec_table();
  const auto split = rolling_quarter_split(table, Quarter{2022, 2});
  const auto full = run_baseline(table, split, std::vector<int>{3, 30}, *parse_model_spec("STPEV(Mean)"));
  // Drop every pool event of half the tickers.
  Split reduced = split;
  auto keep = [](const std::string& id) { return id.substr(0, 4) < "S045"; };
  std::erase_if(reduced.train, [&](const std::string& id) { return !keep(id); });
  std::erase_if(reduced.val, [&](const std::string& id) { return !keep(id); });
  const auto part = run_baseline(table, reduced, std::vector<int>{3, 30}, *parse_model_spec("STPEV(Mean)"));
  for (const auto& [id, by_tau] : part.predictions.values)
    if (keep(id))
      for (const auto& [tau, v] : by_tau) CHECK(v == full.predictions.values.at(id).at(tau));
}

TEST_CASE("fit_quarter_model: identity map, L = 1") {
  std::vector<HistorySample> pool;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(-3.0, 0.5);
  for (int i = 0; i < 40; ++i) {
    const double h = z(rng);
    pool.push_back({{h}, h, i % 3 == 0});
  }
  const std::vector<std::vector<double>> test{{-2.0}, {-3.0}};
  const auto m = fit_quarter_model(test, pool, LinearRegressionAgg{});
  const auto& lin = std::get<LinearModel>(m.model);
  CHECK(m.feature_len == 1);
  CHECK(lin.weights[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(lin.bias) < 1e-6);
  double sse = 0.0;
  for (const auto& s : pool) sse += std::pow(m.predict(s.history) - s.target, 2);
  CHECK(sse / pool.size() < 1e-10);
}

TEST_CASE("fit_quarter_model: planted 0.5/0.5 model, L = 2") {
  std::vector<HistorySample> pool;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(-3.0, 0.5);
  for (int i = 0; i < 30; ++i) {
    const double a = z(rng), b = z(rng);
    pool.push_back({{z(rng), a, b}, 0.5 * a + 0.5 * b, false});  // longer histories use their last two
  }
  const std::vector<std::vector<double>> test{{-2.0, -3.0}, {-1.0, -2.0, -3.0}};
  const auto m = fit_quarter_model(test, pool, LinearRegressionAgg{0.0});
  const auto& lin = std::get<LinearModel>(m.model);
  CHECK(m.feature_len == 2);
  CHECK(lin.weights[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(lin.weights[1] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(lin.bias) < 1e-6);
  CHECK_FALSE(m.warnings.empty());  // unequal test history lengths
  CHECK(*stpev_predict(std::vector<double>{-1.0, -2.0, -3.0}, m) == doctest::Approx(-2.5).epsilon(1e-9));
}

TEST_CASE("fit_quarter_model: single pool event interpolates with a warning") {
  const std::vector<HistorySample> pool{{{-2.0}, -2.5, false}};
  const std::vector<std::vector<double>> test{{-3.0}};
  const auto m = fit_quarter_model(test, pool, LinearRegressionAgg{0.0});
  CHECK(m.predict(std::vector<double>{-2.0}) == -2.5);
  REQUIRE_FALSE(m.warnings.empty());
  CHECK(m.warnings.front().find("interpolation") != std::string::npos);
}

TEST_CASE("fit_quarter_model: huge ridge predicts the pool mean") {
  std::vector<HistorySample> pool;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(-3.0, 0.5);
  double mean = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double a = z(rng), b = z(rng);
    pool.push_back({{a, b}, 0.3 * a - 0.2 * b + z(rng) * 0.1, false});
    mean += pool.back().target;
  }
  mean /= 50.0;
  const std::vector<std::vector<double>> test{{-2.0, -3.0}};
  const auto m = fit_quarter_model(test, pool, LinearRegressionAgg{1e8});
  CHECK(std::abs(m.predict(std::vector<double>{-2.0, -3.0}) - mean) < 1e-3);
  CHECK(std::abs(m.predict(std::vector<double>{-5.0, -1.0}) - mean) < 1e-3);
}

TEST_CASE("fit_quarter_model: errors") {
  const std::vector<HistorySample> pool{{{-2.0}, -2.5, false}};
  const std::vector<std::vector<double>> empty_test{{}};
  CHECK(thrown_kind([&] { fit_quarter_model(empty_test, pool, LinearRegressionAgg{}); }) == ErrorKind::EmptyInput);
  const std::vector<HistorySample> no_history{{{}, -2.5, false}};
  CHECK(thrown_kind([&] { fit_quarter_model(std::vector<std::vector<double>>{{-1.0}}, no_history, LinearRegressionAgg{}); }) ==
        ErrorKind::EmptyInput);
  CHECK(thrown_kind([&] { fit_quarter_model(std::vector<std::vector<double>>{{-1.0}}, pool, MeanAgg{}); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("STPEV(LR) on a planted persistence market is near exact") {
  // Each ticker's volatility follows v_q = 0.5 v_{q-1} + 0.5 v_{q-2} exactly.
  std::vector<double> seed_a(8), seed_b(8);
  for (int t = 0; t < 8; ++t) {
    seed_a[t] = -4.0 + 0.3 * t;
    seed_b[t] = -2.0 - 0.2 * t + 0.05 * t * t;
  }
  std::vector<std::vector<double>> v(8);
  for (int t = 0; t < 8; ++t) {
    v[t] = {seed_a[t], seed_b[t]};
    for (int i = 2; i < 10; ++i) v[t].push_back(0.5 * v[t][i - 1] + 0.5 * v[t][i - 2]);
  }
  const auto table = grid_table(8, 10, [&](int t, int i) { return v[t][i]; });
  // Test quarter 2019Q4: three priors per ticker, while the pool reaches two,
  // so the features are the two most recent values.
  const auto split = rolling_quarter_split(table, Quarter{2019, 4});
  CHECK(run_mse(table, split, "STPEV(LR)") < 1e-10);
}

TEST_CASE("STPEV(MLP) runs and is deterministic") {
  const auto& table = earnvol::testing::dec_table();
  const auto split = rolling_quarter_split(table, Quarter{2021, 3});
  ModelSpec spec{BaselineMode::Stpev, MlpAgg{TrainConfig{}}};
  std::get<MlpAgg>(spec.agg).config.hidden = 32;
  const auto a = run_baseline(table, split, std::vector<int>{3}, spec);
  const auto b = run_baseline(table, split, std::vector<int>{3}, spec);
  CHECK(a.predictions == b.predictions);
  CHECK(a.predictions.size() == 90);
  CHECK(thrown_kind([&] { run_baseline(table, split, std::vector<int>{3}, ModelSpec{BaselineMode::Pev, MlpAgg{}}); }) ==
        ErrorKind::InvalidArgument);
}
