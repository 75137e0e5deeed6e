#include "earnvol/cli.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "CLI11.hpp"
#include "earnvol/analysis.hpp"
#include "earnvol/baselines.hpp"
#include "earnvol/dataset.hpp"
#include "earnvol/errors.hpp"
#include "earnvol/evalharness.hpp"
#include "earnvol/serialize.hpp"
#include "earnvol/volatility.hpp"

namespace earnvol::cli {

namespace {

using nlohmann::json;

// A flag value that parsed as a string but is not acceptable (bad quarter
// label, unknown model, ...). Reported like any other usage error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto checked(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

struct Flags {
  std::string out;
  bool pretty = false;
  unsigned threads = 1;
  std::uint64_t seed = kDefaultSplitSeed;
  std::string convention = "paper_literal";

  std::string prices;
  std::string events;
  std::string event;
  std::string train;
  std::string test;
  std::string quarter;
  std::string model;
  std::vector<int> taus;
  int tau = 3;
  int window = 5;
  std::string extended_events;
  std::string extended_prices;
  int years = 5;
  std::string predictions;
  std::string reference;
  std::string embeddings;
  std::string random;
  std::size_t dim = 512;
  bool exclude_same_ticker = false;
  std::string config;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<int> taus_or_default(const std::vector<int>& taus) {
  if (!taus.empty()) return taus;
  return {std::begin(kStandardTaus), std::end(kStandardTaus)};
}

EarningsEvent parse_event_flag(const std::string& text) {
  const auto parts = [&] {
    std::vector<std::string> v;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) v.push_back(p);
    return v;
  }();
  if (parts.size() != 3 && parts.size() != 4)
    throw UsageError("--event expects TICKER,YYYY-MM-DD,before_open|after_close[,YYYYQn]");
  return checked([&] {
    EarningsEvent e;
    e.ticker = parts[0];
    e.announce_date = Date::parse(parts[1]);
    e.session = parse_session(parts[2]);
    if (parts.size() == 4) e.quarter = Quarter::parse(parts[3]);
    e.event_id = make_event_id(e.ticker, e.announce_date);
    return e;
  });
}

std::vector<EarningsEvent> load_events_file(const std::string& path) { return load_earnings(path); }

// Each handler returns the text to emit.
using Handler = std::function<std::string(const Flags&)>;

std::string cmd_ingest(const Flags& f) {
  const auto conv = checked([&] { return parse_convention(f.convention); });
  const auto table = build_event_table(f.events, f.prices, conv);
  if (!f.pretty) return json_text(to_json(table));
  std::string s;
  for (const auto& e : table.entries()) {
    s += e.event.event_id + "  " + std::string(to_string(e.event.session));
    for (int tau : kStandardTaus) {
      auto it = e.records.find(tau);
      s += "  " + (it == e.records.end() ? std::string("-") : fmt("%.4f", it->second.value));
    }
    s += '\n';
  }
  s += std::to_string(table.entries().size()) + " events, " + std::to_string(table.incomplete_count()) +
       " incomplete\n";
  return s;
}

std::string cmd_volatility(const Flags& f) {
  const auto conv = checked([&] { return parse_convention(f.convention); });
  const auto event = parse_event_flag(f.event);
  std::ifstream in(f.prices);
  if (!in) throw Error(ErrorKind::Parse, "cannot open price file " + f.prices);
  const auto prices = parse_price_series(in, event.ticker);
  const auto returns = compute_returns(prices);
  const auto window = post_earnings_window(event, prices, returns, f.tau);
  const auto rec = post_earnings_volatility(event, prices, returns, f.tau, conv);
  if (f.pretty) {
    std::string s = rec.event_id + " tau=" + std::to_string(f.tau) + " " + std::string(to_string(conv)) + "\n";
    for (std::size_t i = 0; i < window.dates.size(); ++i)
      s += "  " + window.dates[i].iso() + "  " + fmt("%+.6f", window.returns[i]) + "\n";
    return s + "log volatility " + fmt("%.6f", rec.value) + "\n";
  }
  json days = json::array();
  for (std::size_t i = 0; i < window.dates.size(); ++i)
    days.push_back({{"date", window.dates[i].iso()}, {"return", window.returns[i]}});
  return json_text({{"event_id", rec.event_id},
                    {"session", to_string(event.session)},
                    {"tau", rec.tau},
                    {"convention", to_string(conv)},
                    {"window", std::move(days)},
                    {"value", rec.value}});
}

std::string cmd_oet(const Flags& f) {
  const auto train = load_events_file(f.train);
  const auto test = load_events_file(f.test);
  const auto c = oet_counts(train, test);
  if (c.test_tickers == 0) throw Error(ErrorKind::EmptyInput, "test set has no events");
  if (f.pretty)
    return std::to_string(c.overlapping_earnings) + " / " + std::to_string(c.test_tickers) + " = " +
           fmt("%.3f", c.value()) + "\n";
  return fmt("%.3f", c.value()) + "\n";
}

std::string cmd_split(const Flags& f) {
  const auto conv = checked([&] { return parse_convention(f.convention); });
  const auto q = checked([&] { return Quarter::parse(f.quarter); });
  const auto table = build_event_table(f.events, f.prices, conv);
  const auto split = rolling_quarter_split(table, q, {}, f.seed);
  if (f.pretty)
    return split.target.label() + " seed=" + std::to_string(split.seed) + " train=" +
           std::to_string(split.train.size()) + " val=" + std::to_string(split.val.size()) +
           " test=" + std::to_string(split.test.size()) + "\n";
  return json_text(to_json(split));
}

std::string cmd_augment(const Flags& f) {
  const auto conv = checked([&] { return parse_convention(f.convention); });
  const auto table = build_event_table(f.events, f.prices, conv);
  const auto augmented = augment_history(table, f.extended_prices, f.extended_events, f.years);
  if (f.pretty) {
    std::size_t added = augmented.entries().size() - table.entries().size();
    return std::to_string(table.entries().size()) + " events + " + std::to_string(added) + " augmented\n";
  }
  return json_text(to_json(augmented));
}

std::string render_predictions(const PredictionSet& p) {
  std::string s = p.model + "\n";
  for (const auto& [id, by_tau] : p.values) {
    s += "  " + id;
    for (const auto& [tau, v] : by_tau) s += "  " + std::to_string(tau) + ":" + fmt("%.4f", v);
    s += '\n';
  }
  return s;
}

std::string cmd_predict(const Flags& f) {
  const auto conv = checked([&] { return parse_convention(f.convention); });
  const auto q = checked([&] { return Quarter::parse(f.quarter); });
  const auto spec = parse_model_spec(f.model);
  if (!spec) throw UsageError("--model must be a PEV or STPEV baseline, e.g. STPEV(Mean)");
  const auto taus = taus_or_default(f.taus);
  const auto table = build_event_table(f.events, f.prices, conv);
  const auto split = rolling_quarter_split(table, q, {}, f.seed);
  const auto run = run_baseline(table, split, taus, *spec);
  return f.pretty ? render_predictions(run.predictions) : json_text(to_json(run.predictions));
}

std::string cmd_evaluate(const Flags& f) {
  const auto conv = checked([&] { return parse_convention(f.convention); });
  const auto q = checked([&] { return Quarter::parse(f.quarter); });
  const auto taus = taus_or_default(f.taus);
  const auto preds = load_prediction_set(f.predictions);
  const auto table = build_event_table(f.events, f.prices, conv);
  const auto split = rolling_quarter_split(table, q, {}, f.seed);
  std::map<int, double> per_tau;
  for (int tau : taus) per_tau[tau] = mse(preds, test_truth(table, split, tau), tau);
  const double mean = mean_over_taus(per_tau);
  if (f.pretty) {
    std::string s = preds.model + " " + q.label() + " MSE " + fmt("%.3f", mean);
    for (const auto& [tau, v] : per_tau) s += "  MSE_" + std::to_string(tau) + " " + fmt("%.3f", v);
    return s + "\n";
  }
  json j_mse = json::object();
  for (const auto& [tau, v] : per_tau) j_mse[std::to_string(tau)] = v;
  return json_text({{"model", preds.model},
                    {"quarter", q.label()},
                    {"n_test", split.test.size()},
                    {"mse", std::move(j_mse)},
                    {"mean_mse", mean}});
}

std::string cmd_drift(const Flags& f) {
  const auto conv = checked([&] { return parse_convention(f.convention); });
  const auto table = build_event_table(f.events, f.prices, conv);
  const auto events = table.events();
  const auto profile = event_window_profile(events, table.prices(), f.window, f.tau, conv);
  if (!f.pretty) return json_text(to_json(profile));
  std::string s;
  for (std::size_t i = 0; i < profile.labels.size(); ++i)
    s += profile.labels[i] + "  |r| " + fmt("%.5f", profile.mean_abs_return[i]) + "  vol " +
         fmt("%.4f", profile.mean_volatility[i]) + "\n";
  return s;
}

std::string cmd_similarity(const Flags& f) {
  if (f.embeddings.empty() == f.random.empty()) throw UsageError("give exactly one of --embeddings or --random");
  const auto events = load_events_file(f.events);
  EmbeddingSet emb;
  if (!f.random.empty()) {
    const auto mode = checked([&] { return parse_random_mode(f.random); });
    emb = random_embeddings(events, mode, f.dim, f.seed);
  } else {
    emb = load_embeddings(f.embeddings);
  }
  std::vector<EarningsEvent> covered;
  for (const auto& e : events)
    if (emb.vectors.contains(e.event_id)) covered.push_back(e);
  const auto rep = group_cosine_similarity(emb, covered, f.exclude_same_ticker, f.threads);
  if (f.pretty)
    return rep.source + "  within-ticker " + fmt("%.3f", rep.within_ticker) + "  all-dataset " +
           fmt("%.3f", rep.all_dataset) + "\n";
  return json_text(to_json(rep));
}

std::string cmd_correlate(const Flags& f) {
  const auto a = load_prediction_set(f.predictions);
  const auto b = load_prediction_set(f.reference);
  std::map<int, double> coef;
  for (int tau : taus_or_default(f.taus)) coef[tau] = pearson(a, b, tau);
  const double mean = mean_over_taus(coef);
  if (f.pretty) {
    std::string s = a.model + " vs " + b.model + "  mean " + fmt("%.3f", mean);
    for (const auto& [tau, v] : coef) s += "  r_" + std::to_string(tau) + " " + fmt("%.3f", v);
    return s + "\n";
  }
  json jc = json::object();
  for (const auto& [tau, v] : coef) jc[std::to_string(tau)] = v;
  return json_text({{"model", a.model}, {"reference", b.model}, {"coef", std::move(jc)}, {"mean_coef", mean}});
}

std::string cmd_run(const Flags& f, bool seed_given, bool convention_given, bool threads_given) {
  auto config = load_experiment_config(f.config);
  if (seed_given) config.split_seed = f.seed;
  if (convention_given) config.convention = checked([&] { return parse_convention(f.convention); });
  if (threads_given) config.threads = f.threads;
  const auto report = run_experiment(config);
  return f.pretty ? render_report_text(report) : json_text(to_json(report));
}

void emit(const std::string& text, const Flags& f, std::ostream& out) {
  if (f.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(f.out, std::ios::binary);
  if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write " + f.out);
  file << text;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Post-earnings volatility toolkit", "earnvol"};
  app.require_subcommand(1, 1);
  Flags f;

  auto common = [&](CLI::App* sub, bool seeded, bool conv) {
    sub->add_option("--out", f.out, "Output file (default: standard output)");
    sub->add_flag("--pretty", f.pretty, "Aligned text instead of JSON");
    if (seeded) sub->add_option("--seed", f.seed, "Split / embedding seed")->capture_default_str();
    if (conv) sub->add_option("--convention", f.convention, "paper_literal | sample_std")->capture_default_str();
  };
  auto data_flags = [&](CLI::App* sub) {
    sub->add_option("--events", f.events, "Earnings CSV")->required();
    sub->add_option("--prices", f.prices, "Directory of <TICKER>.csv price files")->required();
  };

  auto* ingest = app.add_subcommand("ingest", "Join earnings to prices and compute every window");
  data_flags(ingest);
  common(ingest, false, true);

  auto* vol = app.add_subcommand("volatility", "Post-earnings volatility of one event");
  vol->add_option("--prices", f.prices, "Price CSV of the event's ticker")->required();
  vol->add_option("--event", f.event, "TICKER,YYYY-MM-DD,before_open|after_close")->required();
  vol->add_option("--tau", f.tau, "Window length in trading days")->required()->check(CLI::PositiveNumber);
  common(vol, false, true);

  auto* oet_cmd = app.add_subcommand("oet", "Overlapping earnings per ticker");
  oet_cmd->add_option("--train", f.train, "Training earnings CSV")->required();
  oet_cmd->add_option("--test", f.test, "Test earnings CSV")->required();
  common(oet_cmd, false, false);

  auto* split_cmd = app.add_subcommand("split", "Rolling-quarter train/val/test split");
  data_flags(split_cmd);
  split_cmd->add_option("--quarter", f.quarter, "Test quarter, e.g. 2021Q1")->required();
  common(split_cmd, true, true);

  auto* augment_cmd = app.add_subcommand("augment", "Left-extend history with earlier earnings");
  data_flags(augment_cmd);
  augment_cmd->add_option("--extended-events", f.extended_events, "Earlier earnings CSV")->required();
  augment_cmd->add_option("--extended-prices", f.extended_prices, "Directory of extended price files")->required();
  augment_cmd->add_option("--years", f.years, "Years of history to add")->capture_default_str()->check(
      CLI::PositiveNumber);
  common(augment_cmd, false, true);

  auto* predict_cmd = app.add_subcommand("predict", "Baseline predictions for a test quarter");
  data_flags(predict_cmd);
  predict_cmd->add_option("--quarter", f.quarter, "Test quarter")->required();
  predict_cmd->add_option("--model", f.model, "e.g. PEV(Mean), STPEV(Median), STPEV(LR)")->required();
  predict_cmd->add_option("--tau", f.taus, "Window (repeatable; default 3 7 15 30)");
  common(predict_cmd, true, true);

  auto* eval_cmd = app.add_subcommand("evaluate", "MSE of a prediction file on a test quarter");
  data_flags(eval_cmd);
  eval_cmd->add_option("--quarter", f.quarter, "Test quarter")->required();
  eval_cmd->add_option("--predictions", f.predictions, "Prediction JSON")->required();
  eval_cmd->add_option("--tau", f.taus, "Window (repeatable; default 3 7 15 30)");
  common(eval_cmd, true, true);

  auto* drift_cmd = app.add_subcommand("drift", "Return and volatility profile around announcements");
  data_flags(drift_cmd);
  drift_cmd->add_option("--window", f.window, "Offsets on each side")->capture_default_str()->check(
      CLI::PositiveNumber);
  drift_cmd->add_option("--tau", f.tau, "Volatility window length")->capture_default_str()->check(
      CLI::PositiveNumber);
  common(drift_cmd, false, true);

  auto* sim_cmd = app.add_subcommand("similarity", "Within-ticker and all-dataset mean cosine");
  sim_cmd->add_option("--events", f.events, "Earnings CSV")->required();
  sim_cmd->add_option("--embeddings", f.embeddings, "Embedding JSONL");
  sim_cmd->add_option("--random", f.random, "Random embeddings: all | ticker");
  sim_cmd->add_option("--dim", f.dim, "Random embedding dimension")->capture_default_str()->check(
      CLI::PositiveNumber);
  sim_cmd->add_flag("--exclude-same-ticker", f.exclude_same_ticker, "Drop same-ticker pairs from the all mean");
  sim_cmd->add_option("--threads", f.threads, "Worker threads")->capture_default_str()->check(
      CLI::PositiveNumber);
  common(sim_cmd, true, false);

  auto* corr_cmd = app.add_subcommand("correlate", "Pearson correlation of two prediction files");
  corr_cmd->add_option("--predictions", f.predictions, "Prediction JSON")->required();
  corr_cmd->add_option("--reference", f.reference, "Reference prediction JSON")->required();
  corr_cmd->add_option("--tau", f.taus, "Window (repeatable; default 3 7 15 30)");
  common(corr_cmd, false, false);

  auto* run_cmd = app.add_subcommand("run", "Full experiment from a config file");
  run_cmd->add_option("--config", f.config, "Experiment config")->required();
  auto* threads_opt = run_cmd->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
  common(run_cmd, true, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const std::map<CLI::App*, Handler> handlers = {
      {ingest, cmd_ingest},       {vol, cmd_volatility},     {oet_cmd, cmd_oet},
      {split_cmd, cmd_split},     {augment_cmd, cmd_augment}, {predict_cmd, cmd_predict},
      {eval_cmd, cmd_evaluate},   {drift_cmd, cmd_drift},     {sim_cmd, cmd_similarity},
      {corr_cmd, cmd_correlate},
      {run_cmd, [&](const Flags& fl) {
         return cmd_run(fl, run_cmd->count("--seed") > 0, run_cmd->count("--convention") > 0,
                        threads_opt->count() > 0);
       }}};

  CLI::App* sub = app.get_subcommands().front();
  try {
    emit(handlers.at(sub)(f), f, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, out, err);
}

}  // namespace earnvol::cli
