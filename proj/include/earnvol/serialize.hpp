#pragma once

// JSON forms of the library's values. Object keys are emitted in sorted
// order, so equal values always serialize to identical bytes.

#include <string>

#include "earnvol/analysis.hpp"
#include "earnvol/baselines.hpp"
#include "earnvol/dataset.hpp"
#include "earnvol/evalharness.hpp"
#include "earnvol/volatility.hpp"
#include "json.hpp"

namespace earnvol {

nlohmann::json to_json(const EarningsEvent& e);
nlohmann::json to_json(const EventTable& table);
nlohmann::json to_json(const Split& split);
nlohmann::json to_json(const PredictionSet& preds);
nlohmann::json to_json(const DriftProfile& profile);
nlohmann::json to_json(const GroupSimilarityReport& rep);
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const EvalReport& report);

// Two-space indented JSON with a trailing newline; what the CLI writes.
std::string json_text(const nlohmann::json& j);

PredictionSet prediction_set_from_json(const nlohmann::json& j);
PredictionSet load_prediction_set(const std::string& path);

// Aligned text tables in the layout of the MSE and correlation tables.
std::string render_report_text(const EvalReport& report);

}  // namespace earnvol
