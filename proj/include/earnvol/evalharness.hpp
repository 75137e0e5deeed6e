#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "earnvol/analysis.hpp"
#include "earnvol/baselines.hpp"
#include "earnvol/dataset.hpp"
#include "earnvol/regressor.hpp"
#include "earnvol/volatility.hpp"

namespace earnvol {

// Mean squared error over `truth`; every truth event needs a prediction.
double mse(const PredictionSet& preds, std::span<const VolatilityRecord> truth, int tau);

// Truth records of a split's test events for one window.
std::vector<VolatilityRecord> test_truth(const EventTable& table, const Split& split, int tau);

struct ExperimentConfig {
  std::filesystem::path earnings;
  std::filesystem::path prices_dir;
  std::optional<std::filesystem::path> augment_earnings;
  std::optional<std::filesystem::path> augment_prices_dir;
  int augment_years = 5;

  VolConvention convention = VolConvention::PaperLiteral;
  std::vector<int> taus{3, 7, 15, 30};
  std::vector<std::string> models;
  std::vector<Quarter> quarters;
  std::uint64_t split_seed = kDefaultSplitSeed;
  SplitRatio ratio;
  unsigned threads = 1;
  TrainConfig mlp;

  // Embedding-regression models: "Random(Ticker)", "Random(All)", "Embedding".
  std::optional<std::filesystem::path> embeddings_file;
  std::size_t random_dim = 512;
  std::uint64_t embedding_seed = 42;
  double embedding_ridge = 1.0;

  bool drift = false;
  int drift_horizon = 5;
  int drift_tau = 3;
  bool similarity = false;
  bool similarity_exclude_same_ticker = false;
  bool correlation = false;
  std::string correlation_reference = "STPEV(Mean)";
};

// TOML-style document: `key = value` lines, `[section]` headers, `#`
// comments; values are quoted strings, integers, floats, booleans or flat
// arrays. Relative paths resolve against `base_dir`. Unknown keys and model
// names are rejected here, before any computation.
ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

bool is_known_model(const std::string& name);

struct ReportRow {
  std::string model;
  Quarter quarter;
  std::map<int, double> mse;
  double mean_mse = 0.0;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t n_test = 0;
  std::map<std::string, std::size_t> fallbacks;
  std::vector<std::string> warnings;
  std::optional<std::string> error;
};

struct CorrelationRow {
  std::string model;
  std::string reference;
  Quarter quarter;
  std::map<int, double> coef;
  double mean_coef = 0.0;
  std::optional<std::string> error;
};

struct EvalReport {
  ExperimentConfig config;
  std::size_t n_events = 0;
  std::size_t n_incomplete = 0;
  std::size_t n_augmented = 0;
  std::vector<ReportRow> rows;  // quarter-major, models in config order
  std::optional<DriftProfile> drift;
  std::vector<GroupSimilarityReport> similarity;
  std::vector<CorrelationRow> correlations;
};

// Unweighted mean of the per-window values.
double mean_over_taus(const std::map<int, double>& per_tau);

EvalReport run_experiment(const ExperimentConfig& config);

}  // namespace earnvol
