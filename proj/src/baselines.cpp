#include "earnvol/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "earnvol/errors.hpp"

namespace earnvol {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

}  // namespace

std::string aggregator_name(const Aggregator& agg) {
  return std::visit(Overloaded{[](const MeanAgg&) { return std::string("Mean"); },
                               [](const MedianAgg&) { return std::string("Median"); },
                               [](const LinearRegressionAgg&) { return std::string("LR"); },
                               [](const MlpAgg&) { return std::string("MLP"); }},
                    agg);
}

bool is_training_free(const Aggregator& agg) {
  return std::holds_alternative<MeanAgg>(agg) || std::holds_alternative<MedianAgg>(agg);
}

double aggregate(std::span<const double> values, const Aggregator& agg) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "aggregate over an empty list");
  if (std::holds_alternative<MeanAgg>(agg)) return mean_of(values);
  if (std::holds_alternative<MedianAgg>(agg)) return median_of(values);
  throw Error(ErrorKind::InvalidArgument, aggregator_name(agg) + " needs a fitted model");
}

double pev_predict(std::span<const double> pool, const Aggregator& agg) {
  if (pool.empty()) throw Error(ErrorKind::EmptyInput, "PEV: empty training pool");
  return aggregate(pool, agg);
}

std::optional<double> stpev_predict(std::span<const double> history, const Aggregator& agg) {
  if (history.empty()) return std::nullopt;
  return aggregate(history, agg);
}

double QuarterModel::predict(std::span<const double> history) const {
  if (history.size() < feature_len)
    throw Error(ErrorKind::InsufficientHistory, "history shorter than the model's feature length");
  auto features = history.subspan(history.size() - feature_len);
  return std::visit([&](const auto& m) { return m.predict(features); }, model);
}

std::optional<double> stpev_predict(std::span<const double> history, const QuarterModel& model) {
  if (history.empty()) return std::nullopt;
  return model.predict(history);
}

namespace {

struct Design {
  Matrix x;
  std::vector<double> y;
};

Design make_design(std::span<const HistorySample* const> samples, std::size_t len) {
  Design d{Matrix(samples.size(), len), {}};
  d.y.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& h = samples[i]->history;
    std::copy(h.end() - static_cast<std::ptrdiff_t>(len), h.end(), d.x.row(i).begin());
    d.y.push_back(samples[i]->target);
  }
  return d;
}

double cv_mse_for(const Design& d, double ridge) {
  const std::size_t n = d.x.rows();
  const std::size_t k = n < 10 ? n : 5;
  double total = 0.0;
  for (std::size_t fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> tr, te;
    for (std::size_t i = 0; i < n; ++i) (i % k == fold ? te : tr).push_back(i);
    Matrix xt(tr.size(), d.x.cols());
    std::vector<double> yt;
    for (std::size_t r = 0; r < tr.size(); ++r) {
      std::copy(d.x.row(tr[r]).begin(), d.x.row(tr[r]).end(), xt.row(r).begin());
      yt.push_back(d.y[tr[r]]);
    }
    const auto m = ridge_fit(xt, yt, ridge);
    double fold_sse = 0.0;
    for (std::size_t i : te) {
      const double e = m.predict(d.x.row(i)) - d.y[i];
      fold_sse += e * e;
    }
    total += fold_sse / static_cast<double>(te.size());
  }
  return total / static_cast<double>(k);
}

}  // namespace

QuarterModel fit_quarter_model(std::span<const std::vector<double>> test_histories,
                               std::span<const HistorySample> pool, const Aggregator& agg) {
  if (is_training_free(agg))
    throw Error(ErrorKind::InvalidArgument, "fit_quarter_model is for LR and MLP aggregators");
  QuarterModel out;

  std::size_t test_min = std::numeric_limits<std::size_t>::max(), test_max = 0;
  for (const auto& h : test_histories) {
    if (h.empty()) continue;
    test_min = std::min(test_min, h.size());
    test_max = std::max(test_max, h.size());
  }
  if (test_max == 0) throw Error(ErrorKind::EmptyInput, "no test event has same-ticker history");
  if (test_min != test_max)
    out.warnings.push_back("unequal test history lengths (" + std::to_string(test_min) + ".." +
                           std::to_string(test_max) + "); using the common suffix of " +
                           std::to_string(test_min));

  std::size_t pool_max = 0;
  for (const auto& s : pool) pool_max = std::max(pool_max, s.history.size());
  const std::size_t len = std::min(test_min, pool_max);
  if (len == 0) throw Error(ErrorKind::EmptyInput, "no training event has same-ticker history");
  if (len < test_min)
    out.warnings.push_back("pool histories reach only " + std::to_string(len) + " priors; features truncated");
  out.feature_len = len;

  std::vector<const HistorySample*> train, val;
  for (const auto& s : pool) {
    if (s.history.size() < len) continue;
    (s.validation ? val : train).push_back(&s);
  }

  if (const auto* lr = std::get_if<LinearRegressionAgg>(&agg)) {
    std::vector<const HistorySample*> all = train;
    all.insert(all.end(), val.begin(), val.end());
    const Design d = make_design(all, len);
    out.n_samples = all.size();
    if (all.size() == 1) {
      out.warnings.push_back("single training event: exact interpolation");
      out.model = LinearModel{std::vector<double>(len, 0.0), d.y[0], lr->ridge.value_or(0.0)};
      return out;
    }
    double ridge = 0.0;
    if (lr->ridge) {
      ridge = *lr->ridge;
    } else {
      double best = std::numeric_limits<double>::infinity();
      bool found = false;
      for (double candidate : kRidgeGrid) {
        try {
          const double m = cv_mse_for(d, candidate);
          if (m < best) {
            best = m;
            ridge = candidate;
            found = true;
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::SingularDesign) throw;
        }
      }
      if (!found) throw Error(ErrorKind::SingularDesign, "every ridge candidate was singular");
      out.cv_mse = best;
    }
    try {
      out.model = ridge_fit(d.x, d.y, ridge);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularDesign || ridge > 0.0) throw;
      // Cross-validation folds can be non-singular while the full pool is not
      // (or vice versa); the smallest positive grid ridge resolves it.
      out.warnings.push_back("singular design at ridge 0; refit with ridge " + std::to_string(kRidgeGrid[1]));
      out.model = ridge_fit(d.x, d.y, kRidgeGrid[1]);
    }
    return out;
  }

  const auto& cfg = std::get<MlpAgg>(agg).config;
  if (train.empty()) {
    std::swap(train, val);
    out.warnings.push_back("no training-side samples; validation samples used for training");
  }
  if (val.empty()) {
    val = train;
    out.warnings.push_back("no validation samples; early stopping on the training set");
  }
  const Design dt = make_design(train, len), dv = make_design(val, len);
  out.n_samples = train.size();
  out.model = mlp_train(dt.x, dt.y, dv.x, dv.y, cfg).model;
  return out;
}

std::size_t PredictionSet::size() const {
  std::size_t n = 0;
  for (const auto& [id, m] : values) n += m.size();
  return n;
}

std::string ModelSpec::label() const {
  return std::string(mode == BaselineMode::Pev ? "PEV(" : "STPEV(") + aggregator_name(agg) + ")";
}

std::optional<ModelSpec> parse_model_spec(std::string_view name) {
  const std::pair<std::string_view, ModelSpec> known[] = {
      {"PEV(Mean)", {BaselineMode::Pev, MeanAgg{}}},
      {"PEV(Median)", {BaselineMode::Pev, MedianAgg{}}},
      {"STPEV(Mean)", {BaselineMode::Stpev, MeanAgg{}}},
      {"STPEV(Median)", {BaselineMode::Stpev, MedianAgg{}}},
      {"STPEV(LR)", {BaselineMode::Stpev, LinearRegressionAgg{}}},
      {"STPEV(MLP)", {BaselineMode::Stpev, MlpAgg{}}},
  };
  for (const auto& [n, spec] : known)
    if (n == name) return spec;
  return std::nullopt;
}

std::vector<double> pooled_history(const EventTable& table, const EarningsEvent& event,
                                   std::span<const std::string> pool_ids, int tau) {
  std::vector<double> out;
  for (const auto* e : same_ticker_history(table, event))
    if (std::binary_search(pool_ids.begin(), pool_ids.end(), e->event.event_id)) out.push_back(e->value(tau));
  return out;
}

BaselineRun run_baseline(const EventTable& table, const Split& split, std::span<const int> taus,
                         const ModelSpec& spec) {
  if (split.test.empty()) throw Error(ErrorKind::EmptyInput, "split has no test events");
  if (spec.mode == BaselineMode::Pev && !is_training_free(spec.agg))
    throw Error(ErrorKind::InvalidArgument, "PEV supports only Mean and Median");

  BaselineRun run;
  run.predictions.model = spec.label();

  // Validation events are part of the history pool.
  std::vector<std::string> pool_ids = split.train;
  pool_ids.insert(pool_ids.end(), split.val.begin(), split.val.end());
  std::sort(pool_ids.begin(), pool_ids.end());
  const std::set<std::string> val_ids(split.val.begin(), split.val.end());

  std::vector<const EventEntry*> test;
  for (const auto& id : split.test) test.push_back(&table.at(id));
  std::vector<const EventEntry*> pool;
  for (const auto& id : pool_ids) pool.push_back(&table.at(id));

  const Aggregator pev_agg = is_training_free(spec.agg) ? spec.agg : Aggregator{MeanAgg{}};
  const std::string pev_label = "PEV(" + aggregator_name(pev_agg) + ")";

  for (int tau : taus) {
    std::vector<double> pool_values;
    pool_values.reserve(pool.size());
    for (const auto* e : pool) pool_values.push_back(e->value(tau));
    const double pev = pev_predict(pool_values, pev_agg);

    if (spec.mode == BaselineMode::Pev) {
      for (const auto* e : test) run.predictions.values[e->event.event_id][tau] = pev;
      continue;
    }

    std::vector<std::vector<double>> histories;
    histories.reserve(test.size());
    for (const auto* e : test) histories.push_back(pooled_history(table, e->event, pool_ids, tau));

    std::optional<QuarterModel> fitted;
    if (!is_training_free(spec.agg)) {
      std::vector<HistorySample> samples;
      samples.reserve(pool.size());
      for (const auto* e : pool)
        samples.push_back({pooled_history(table, e->event, pool_ids, tau), e->value(tau),
                           val_ids.contains(e->event.event_id)});
      try {
        fitted = fit_quarter_model(histories, samples, spec.agg);
        for (const auto& w : fitted->warnings)
          run.warnings.push_back("tau=" + std::to_string(tau) + ": " + w);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptyInput) throw;
        run.warnings.push_back("tau=" + std::to_string(tau) + ": " + e.what() + "; using STPEV(Mean)");
      }
    }

    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto& h = histories[i];
      std::optional<double> p;
      if (is_training_free(spec.agg)) {
        p = stpev_predict(h, spec.agg);
      } else if (fitted) {
        p = stpev_predict(h, *fitted);
      } else if (!h.empty()) {
        p = stpev_predict(h, Aggregator{MeanAgg{}});
        ++run.fallbacks["STPEV(Mean)"];
      }
      if (!p) {
        p = pev;
        ++run.fallbacks[pev_label];
      }
      if (!std::isfinite(*p))
        throw Error(ErrorKind::InvalidArgument, "non-finite prediction for " + test[i]->event.event_id);
      run.predictions.values[test[i]->event.event_id][tau] = *p;
    }
  }
  return run;
}

}  // namespace earnvol
