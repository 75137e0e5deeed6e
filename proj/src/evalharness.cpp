#include "earnvol/evalharness.hpp"

#include <algorithm>
#include <cmath>

#include "earnvol/errors.hpp"
#include "earnvol/parallel.hpp"

namespace earnvol {

double mse(const PredictionSet& preds, std::span<const VolatilityRecord> truth, int tau) {
  if (truth.empty()) throw Error(ErrorKind::EmptyInput, "mse over an empty test set");
  double sum = 0.0;
  for (const auto& rec : truth) {
    if (rec.tau != tau) throw Error(ErrorKind::KeyMismatch, "truth record " + rec.event_id + " is not tau=" + std::to_string(tau));
    auto it = preds.values.find(rec.event_id);
    if (it == preds.values.end() || !it->second.contains(tau))
      throw Error(ErrorKind::KeyMismatch, "missing prediction for " + rec.event_id + " tau=" + std::to_string(tau));
    const double e = it->second.at(tau) - rec.value;
    sum += e * e;
  }
  return sum / static_cast<double>(truth.size());
}

std::vector<VolatilityRecord> test_truth(const EventTable& table, const Split& split, int tau) {
  std::vector<VolatilityRecord> out;
  out.reserve(split.test.size());
  for (const auto& id : split.test) {
    const auto& entry = table.at(id);
    auto it = entry.records.find(tau);
    if (it == entry.records.end()) throw Error(ErrorKind::KeyMismatch, id + " has no record for tau=" + std::to_string(tau));
    out.push_back(it->second);
  }
  return out;
}

double mean_over_taus(const std::map<int, double>& per_tau) {
  if (per_tau.empty()) return std::nan("");
  double s = 0.0;
  for (const auto& [tau, v] : per_tau) s += v;
  return s / static_cast<double>(per_tau.size());
}

namespace {

struct Cell {
  std::size_t quarter_index = 0;
  std::string model;
  bool emit = true;  // false: computed only as the correlation reference
};

struct CellResult {
  ReportRow row;
  std::optional<PredictionSet> predictions;
};

const EmbeddingSet& embedding_for(const std::string& model, const EmbeddingSet* ticker, const EmbeddingSet* all,
                                  const EmbeddingSet* file) {
  const EmbeddingSet* e = model == "Random(Ticker)" ? ticker : model == "Random(All)" ? all : file;
  if (!e) throw Error(ErrorKind::Config, "no embeddings available for " + model);
  return *e;
}

}  // namespace

EvalReport run_experiment(const ExperimentConfig& config) {
  for (const auto& m : config.models)
    if (!is_known_model(m)) throw Error(ErrorKind::Config, "unknown model '" + m + "'");

  EvalReport report;
  report.config = config;

  EventTable table = build_event_table(config.earnings, config.prices_dir, config.convention);
  if (config.augment_earnings)
    table = augment_history(table, *config.augment_prices_dir, *config.augment_earnings, config.augment_years);
  report.n_events = table.entries().size();
  report.n_incomplete = table.incomplete_count();
  for (const auto& e : table.entries())
    if (e.provenance == Provenance::Augmented) ++report.n_augmented;

  std::vector<EarningsEvent> complete_events;
  for (const auto& e : table.entries())
    if (e.complete()) complete_events.push_back(e.event);

  auto uses = [&](const std::string& name) {
    return std::find(config.models.begin(), config.models.end(), name) != config.models.end() ||
           (config.correlation && config.correlation_reference == name);
  };
  std::optional<EmbeddingSet> emb_ticker, emb_all, emb_file;
  if (uses("Random(Ticker)") || config.similarity)
    emb_ticker = random_embeddings(complete_events, RandomMode::Ticker, config.random_dim, config.embedding_seed);
  if (uses("Random(All)") || config.similarity)
    emb_all = random_embeddings(complete_events, RandomMode::All, config.random_dim, config.embedding_seed);
  if (config.embeddings_file) emb_file = load_embeddings(*config.embeddings_file);

  std::vector<std::optional<Split>> splits;
  std::vector<std::string> split_errors;
  for (const auto& q : config.quarters) {
    try {
      auto s = rolling_quarter_split(table, q, config.ratio, config.split_seed);
      if (s.test.empty()) throw Error(ErrorKind::EmptyInput, "no complete test events in " + q.label());
      splits.emplace_back(std::move(s));
      split_errors.emplace_back();
    } catch (const Error& e) {
      splits.emplace_back(std::nullopt);
      split_errors.push_back(std::string(to_string(e.kind())) + ": " + e.what());
    }
  }

  std::vector<Cell> cells;
  for (std::size_t qi = 0; qi < config.quarters.size(); ++qi) {
    for (const auto& m : config.models) cells.push_back({qi, m, true});
    if (config.correlation && !std::count(config.models.begin(), config.models.end(), config.correlation_reference))
      cells.push_back({qi, config.correlation_reference, false});
  }

  std::vector<CellResult> results(cells.size());
  parallel_for(cells.size(), config.threads, [&](std::size_t i) {
    const Cell& cell = cells[i];
    CellResult& out = results[i];
    out.row.model = cell.model;
    out.row.quarter = config.quarters[cell.quarter_index];
    const auto& split = splits[cell.quarter_index];
    if (!split) {
      out.row.error = split_errors[cell.quarter_index];
      return;
    }
    out.row.n_train = split->train.size();
    out.row.n_val = split->val.size();
    out.row.n_test = split->test.size();
    try {
      PredictionSet preds;
      if (auto spec = parse_model_spec(cell.model)) {
        ModelSpec s = *spec;
        if (auto* mlp = std::get_if<MlpAgg>(&s.agg)) mlp->config = config.mlp;
        auto run = run_baseline(table, *split, config.taus, s);
        out.row.fallbacks = std::move(run.fallbacks);
        out.row.warnings = std::move(run.warnings);
        preds = std::move(run.predictions);
      } else {
        const auto& emb = embedding_for(cell.model, emb_ticker ? &*emb_ticker : nullptr,
                                        emb_all ? &*emb_all : nullptr, emb_file ? &*emb_file : nullptr);
        preds = run_embedding_baseline(table, *split, config.taus, emb, config.embedding_ridge, cell.model);
      }
      for (int tau : config.taus) out.row.mse[tau] = mse(preds, test_truth(table, *split, tau), tau);
      out.row.mean_mse = mean_over_taus(out.row.mse);
      out.predictions = std::move(preds);
    } catch (const Error& e) {
      out.row.mse.clear();
      out.row.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
  });

  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i].emit) report.rows.push_back(results[i].row);

  if (config.correlation) {
    for (std::size_t qi = 0; qi < config.quarters.size(); ++qi) {
      const PredictionSet* ref = nullptr;
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i].quarter_index == qi && cells[i].model == config.correlation_reference && results[i].predictions)
          ref = &*results[i].predictions;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].quarter_index != qi || !cells[i].emit || cells[i].model == config.correlation_reference) continue;
        CorrelationRow row{cells[i].model, config.correlation_reference, config.quarters[qi], {}, 0.0, std::nullopt};
        if (!ref || !results[i].predictions) {
          row.error = "predictions unavailable";
        } else {
          try {
            for (int tau : config.taus) row.coef[tau] = pearson(*results[i].predictions, *ref, tau);
            row.mean_coef = mean_over_taus(row.coef);
          } catch (const Error& e) {
            row.coef.clear();
            row.error = std::string(to_string(e.kind())) + ": " + e.what();
          }
        }
        report.correlations.push_back(std::move(row));
      }
    }
  }

  if (config.drift) {
    const auto events = table.events();
    report.drift = event_window_profile(events, table.prices(), config.drift_horizon, config.drift_tau,
                                        config.convention);
  }

  if (config.similarity) {
    for (const auto* emb : {emb_ticker ? &*emb_ticker : nullptr, emb_all ? &*emb_all : nullptr,
                            emb_file ? &*emb_file : nullptr}) {
      if (!emb) continue;
      std::vector<EarningsEvent> covered;
      for (const auto& e : complete_events)
        if (emb->vectors.contains(e.event_id)) covered.push_back(e);
      report.similarity.push_back(
          group_cosine_similarity(*emb, covered, config.similarity_exclude_same_ticker, config.threads));
    }
  }
  return report;
}

}  // namespace earnvol
