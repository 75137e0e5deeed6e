#include "earnvol/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "earnvol/errors.hpp"

namespace earnvol {

using nlohmann::json;

namespace {

json per_tau(const std::map<int, double>& m) {
  json j = json::object();
  for (const auto& [tau, v] : m) j[std::to_string(tau)] = v;
  return j;
}

std::string fixed3(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

json to_json(const EarningsEvent& e) {
  return {{"event_id", e.event_id},
          {"ticker", e.ticker},
          {"date", e.announce_date.iso()},
          {"session", to_string(e.session)},
          {"quarter", e.quarter.label()}};
}

json to_json(const EventTable& table) {
  json events = json::array();
  for (const auto& entry : table.entries()) {
    json j = to_json(entry.event);
    j["provenance"] = to_string(entry.provenance);
    j["complete"] = entry.complete();
    json vol = json::object();
    for (const auto& [tau, rec] : entry.records) vol[std::to_string(tau)] = rec.value;
    j["volatility"] = vol;
    json missing = json::object();
    for (const auto& [tau, why] : entry.missing) missing[std::to_string(tau)] = why;
    j["missing"] = missing;
    events.push_back(std::move(j));
  }
  return {{"convention", to_string(table.convention())},
          {"n_events", table.entries().size()},
          {"n_incomplete", table.incomplete_count()},
          {"events", std::move(events)}};
}

json to_json(const Split& split) {
  return {{"target_quarter", split.target.label()},
          {"seed", split.seed},
          {"train", split.train},
          {"val", split.val},
          {"test", split.test}};
}

json to_json(const PredictionSet& preds) {
  json rows = json::array();
  for (const auto& [id, by_tau] : preds.values)
    for (const auto& [tau, v] : by_tau) rows.push_back({{"event_id", id}, {"tau", tau}, {"value", v}});
  return {{"model", preds.model}, {"predictions", std::move(rows)}};
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

PredictionSet prediction_set_from_json(const json& j) {
  try {
    PredictionSet p;
    p.model = j.at("model").get<std::string>();
    for (const auto& row : j.at("predictions")) {
      const auto id = row.at("event_id").get<std::string>();
      const int tau = row.at("tau").get<int>();
      if (row.at("value").is_null()) throw Error(ErrorKind::Parse, "null prediction for " + id);
      if (!p.values[id].emplace(tau, row.at("value").get<double>()).second)
        throw Error(ErrorKind::Parse, "duplicate prediction for " + id + " tau=" + std::to_string(tau));
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed prediction set: ") + e.what());
  }
}

PredictionSet load_prediction_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open prediction file " + path);
  try {
    return prediction_set_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, path + ": " + e.what());
  }
}

json to_json(const DriftProfile& p) {
  return {{"horizon", p.horizon},
          {"tau", p.tau},
          {"convention", to_string(p.convention)},
          {"offsets", p.offsets},
          {"labels", p.labels},
          {"mean_abs_return", p.mean_abs_return},
          {"mean_volatility", p.mean_volatility},
          {"n_events_per_offset", p.n_events_per_offset},
          {"n_volatility_per_offset", p.n_volatility_per_offset},
          {"skipped_abs_return", p.skipped_abs_return},
          {"skipped_volatility", p.skipped_volatility}};
}

json to_json(const GroupSimilarityReport& r) {
  return {{"source", r.source},
          {"within_ticker", r.within_ticker},
          {"all_dataset", r.all_dataset},
          {"within_pairs", r.within_pairs},
          {"all_pairs", r.all_pairs},
          {"singleton_tickers", r.singleton_tickers},
          {"all_excludes_same_ticker", r.all_excludes_same_ticker}};
}

json to_json(const ExperimentConfig& c) {
  json quarters = json::array();
  for (const auto& q : c.quarters) quarters.push_back(q.label());
  json j = {{"earnings", c.earnings.generic_string()},
            {"prices_dir", c.prices_dir.generic_string()},
            {"convention", to_string(c.convention)},
            {"taus", c.taus},
            {"models", c.models},
            {"quarters", quarters},
            {"split_seed", c.split_seed},
            {"ratio", {c.ratio.train, c.ratio.val}},
            {"mlp", {{"learning_rate", c.mlp.learning_rate},
                     {"batch_size", c.mlp.batch_size},
                     {"max_epochs", c.mlp.max_epochs},
                     {"seed", c.mlp.seed},
                     {"patience", c.mlp.patience},
                     {"hidden", c.mlp.hidden}}},
            {"embeddings", {{"dim", c.random_dim}, {"seed", c.embedding_seed}, {"ridge", c.embedding_ridge}}},
            {"analysis", {{"drift", c.drift},
                          {"drift_horizon", c.drift_horizon},
                          {"drift_tau", c.drift_tau},
                          {"similarity", c.similarity},
                          {"correlation", c.correlation},
                          {"correlation_reference", c.correlation_reference}}}};
  // Thread count is deliberately absent: reports must not depend on it.
  if (c.augment_earnings)
    j["augment"] = {{"earnings", c.augment_earnings->generic_string()},
                    {"prices_dir", c.augment_prices_dir->generic_string()},
                    {"years", c.augment_years}};
  if (c.embeddings_file) j["embeddings"]["file"] = c.embeddings_file->generic_string();
  return j;
}

json to_json(const EvalReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j = {{"model", row.model},
              {"quarter", row.quarter.label()},
              {"n_train", row.n_train},
              {"n_val", row.n_val},
              {"n_test", row.n_test},
              {"fallbacks", row.fallbacks},
              {"warnings", row.warnings}};
    if (row.error) {
      j["error"] = *row.error;
    } else {
      j["mse"] = per_tau(row.mse);
      j["mean_mse"] = row.mean_mse;
    }
    rows.push_back(std::move(j));
  }
  json out = {{"config", to_json(r.config)},
              {"n_events", r.n_events},
              {"n_incomplete", r.n_incomplete},
              {"n_augmented", r.n_augmented},
              {"rows", std::move(rows)}};
  if (r.drift) out["drift"] = to_json(*r.drift);
  if (!r.similarity.empty()) {
    json sims = json::array();
    for (const auto& s : r.similarity) sims.push_back(to_json(s));
    out["similarity"] = std::move(sims);
  }
  if (!r.correlations.empty()) {
    json corr = json::array();
    for (const auto& c : r.correlations) {
      json j = {{"model", c.model}, {"reference", c.reference}, {"quarter", c.quarter.label()}};
      if (c.error) {
        j["error"] = *c.error;
      } else {
        j["coef"] = per_tau(c.coef);
        j["mean_coef"] = c.mean_coef;
      }
      corr.push_back(std::move(j));
    }
    out["correlations"] = std::move(corr);
  }
  return out;
}

std::string render_report_text(const EvalReport& r) {
  std::ostringstream os;
  char buf[256];
  os << "events: " << r.n_events << " (incomplete " << r.n_incomplete << ", augmented " << r.n_augmented << ")\n\n";
  std::snprintf(buf, sizeof buf, "%-8s %-16s %8s", "Quarter", "Model", "MSE");
  os << buf;
  for (int tau : r.config.taus) {
    std::snprintf(buf, sizeof buf, " %8s", ("MSE_" + std::to_string(tau)).c_str());
    os << buf;
  }
  os << '\n';
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%-8s %-16s ", row.quarter.label().c_str(), row.model.c_str());
    os << buf;
    if (row.error) {
      os << "error: " << *row.error << '\n';
      continue;
    }
    std::snprintf(buf, sizeof buf, "%8s", fixed3(row.mean_mse).c_str());
    os << buf;
    for (int tau : r.config.taus) {
      std::snprintf(buf, sizeof buf, " %8s", fixed3(row.mse.at(tau)).c_str());
      os << buf;
    }
    os << '\n';
  }
  if (!r.correlations.empty()) {
    os << "\nPearson vs " << r.correlations.front().reference << '\n';
    for (const auto& c : r.correlations) {
      std::snprintf(buf, sizeof buf, "%-8s %-16s ", c.quarter.label().c_str(), c.model.c_str());
      os << buf;
      if (c.error) {
        os << "error: " << *c.error << '\n';
        continue;
      }
      std::snprintf(buf, sizeof buf, "%8s", fixed3(c.mean_coef).c_str());
      os << buf;
      for (const auto& [tau, v] : c.coef) {
        std::snprintf(buf, sizeof buf, " %8s", fixed3(v).c_str());
        os << buf;
      }
      os << '\n';
    }
  }
  if (!r.similarity.empty()) {
    os << "\nCosine similarity      Within-Ticker  All-dataset\n";
    for (const auto& s : r.similarity) {
      std::snprintf(buf, sizeof buf, "%-22s %13s %12s\n", s.source.c_str(), fixed3(s.within_ticker).c_str(),
                    fixed3(s.all_dataset).c_str());
      os << buf;
    }
  }
  if (r.drift) {
    os << "\nDrift profile (tau=" << r.drift->tau << ")\n";
    for (std::size_t i = 0; i < r.drift->labels.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%-10s |r|=%s vol=%s\n", r.drift->labels[i].c_str(),
                    fixed3(r.drift->mean_abs_return[i]).c_str(), fixed3(r.drift->mean_volatility[i]).c_str());
      os << buf;
    }
  }
  return os.str();
}

}  // namespace earnvol
