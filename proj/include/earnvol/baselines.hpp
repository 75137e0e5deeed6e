#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "earnvol/dataset.hpp"
#include "earnvol/regressor.hpp"

namespace earnvol {

struct MeanAgg {};
struct MedianAgg {};
// nullopt ridge: chosen by cross-validation over kRidgeGrid.
struct LinearRegressionAgg {
  std::optional<double> ridge;
};
struct MlpAgg {
  TrainConfig config;
};

using Aggregator = std::variant<MeanAgg, MedianAgg, LinearRegressionAgg, MlpAgg>;

inline constexpr double kRidgeGrid[] = {0.0, 1e-4, 1e-2, 1.0, 10.0};

std::string aggregator_name(const Aggregator& agg);  // Mean | Median | LR | MLP
bool is_training_free(const Aggregator& agg);

// Mean or Median of `values`; throws for the fitted aggregators.
double aggregate(std::span<const double> values, const Aggregator& agg);

// Pooled prediction: the aggregator over every training volatility for a
// window, regardless of ticker.
double pev_predict(std::span<const double> pool, const Aggregator& agg);

// Same-ticker prediction from the ticker's prior volatilities. nullopt means
// no history; the caller falls back to PEV.
std::optional<double> stpev_predict(std::span<const double> history, const Aggregator& agg);

// One training example for the fitted aggregators: the event's prior
// same-ticker volatilities (oldest first) and its own volatility.
struct HistorySample {
  std::vector<double> history;
  double target = 0.0;
  bool validation = false;
};

struct QuarterModel {
  std::variant<LinearModel, MlpModel> model;
  std::size_t feature_len = 0;   // most recent `feature_len` history values are the features
  std::size_t n_samples = 0;
  double cv_mse = 0.0;           // LR with cross-validation only
  std::vector<std::string> warnings;

  double predict(std::span<const double> history) const;
};

// Fits LR or MLP for one (quarter, tau). The feature length is the shortest
// non-empty test history, capped by the longest history available in the
// pool; pool samples with at least that many priors use their most recent
// ones. LR ridge is chosen by k-fold CV (k = 5, leave-one-out below 10).
QuarterModel fit_quarter_model(std::span<const std::vector<double>> test_histories,
                               std::span<const HistorySample> pool, const Aggregator& agg);

std::optional<double> stpev_predict(std::span<const double> history, const QuarterModel& model);

struct PredictionSet {
  std::string model;
  std::map<std::string, std::map<int, double>> values;  // event id -> tau -> log volatility

  std::size_t size() const;
  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

enum class BaselineMode { Pev, Stpev };

struct ModelSpec {
  BaselineMode mode = BaselineMode::Stpev;
  Aggregator agg = MeanAgg{};
  std::string label() const;  // e.g. "STPEV(Mean)"
};

std::optional<ModelSpec> parse_model_spec(std::string_view name);

struct BaselineRun {
  PredictionSet predictions;
  std::map<std::string, std::size_t> fallbacks;  // fallback name -> (event, tau) count
  std::vector<std::string> warnings;
};

BaselineRun run_baseline(const EventTable& table, const Split& split, std::span<const int> taus,
                         const ModelSpec& spec);

// Chronological same-ticker history of `event` restricted to `pool_ids`
// (sorted), for one window.
std::vector<double> pooled_history(const EventTable& table, const EarningsEvent& event,
                                   std::span<const std::string> pool_ids, int tau);

}  // namespace earnvol
