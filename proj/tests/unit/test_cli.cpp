#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "earnvol/cli.hpp"
#include "earnvol/serialize.hpp"
#include "fixtures.hpp"

using namespace earnvol;
namespace t = earnvol::testing;

namespace {

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = cli::dispatch(args, out, err);
  return {status, out.str(), err.str()};
}

const t::TempDir& market_dir() {
  static const auto* dir = [] {
    auto* d = new t::TempDir("earnvol-cli");
    write_market(t::dec_market(), d->path());
    return d;
  }();
  return *dir;
}

std::string events_csv() { return (market_dir() / "earnings.csv").string(); }
std::string prices_dir() { return (market_dir() / "prices").string(); }

std::string tgt_csv(const t::TempDir& dir) {
  const auto p = dir / "TGT.csv";
  std::ofstream out(p);
  write_price_series(out, t::tgt_2017q4_prices());
  return p.string();
}

}  // namespace

TEST_CASE("usage errors exit with status 1") {
  CHECK(run({}).status == cli::kExitUsage);
  CHECK(run({"frobnicate"}).status == cli::kExitUsage);
  CHECK(run({"oet", "--train", "a.csv"}).status == cli::kExitUsage);
  CHECK(run({"split", "--events", events_csv(), "--prices", prices_dir(), "--quarter", "2021Q1", "--bogus"}).status ==
        cli::kExitUsage);
  const auto bad_q = run({"split", "--events", events_csv(), "--prices", prices_dir(), "--quarter", "2021Q9"});
  CHECK(bad_q.status == cli::kExitUsage);
  CHECK(bad_q.err.find("2021Q9") != std::string::npos);
  CHECK(run({"predict", "--events", events_csv(), "--prices", prices_dir(), "--quarter", "2021Q1", "--model",
             "STPEV(Max)"})
            .status == cli::kExitUsage);
  CHECK(run({"ingest", "--events", events_csv(), "--prices", prices_dir(), "--convention", "log"}).status ==
        cli::kExitUsage);
}

TEST_CASE("data errors exit with status 2") {
  t::TempDir dir;
  t::write_text(dir / "bad.csv", "ticker,date,session,year,quarter\nA,2021-13-01,after_close,2021,1\n");
  CHECK(run({"oet", "--train", (dir / "bad.csv").string(), "--test", (dir / "bad.csv").string()}).status ==
        cli::kExitData);
  CHECK(run({"ingest", "--events", events_csv(), "--prices", (dir / "none").string()}).status == cli::kExitData);
}

TEST_CASE("oet prints the ratio to three decimals") {
  const auto cell = t::oet_cells().front();
  const auto [train, test] = t::oet_fixture(cell);
  t::TempDir dir;
  {
    std::ofstream a(dir / "train.csv"), b(dir / "test.csv");
    write_earnings(a, train);
    write_earnings(b, test);
  }
  const auto r = run({"oet", "--train", (dir / "train.csv").string(), "--test", (dir / "test.csv").string()});
  CHECK(r.status == 0);
  CHECK(r.out == "1.589\n");
  const auto p =
      run({"oet", "--train", (dir / "train.csv").string(), "--test", (dir / "test.csv").string(), "--pretty"});
  CHECK(p.out == "178 / 112 = 1.589\n");
}

TEST_CASE("volatility echoes the window it used") {
  t::TempDir dir;
  const auto prices = tgt_csv(dir);
  const auto r = run({"volatility", "--prices", prices, "--event", "TGT,2017-11-15,before_open", "--tau", "3"});
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["event_id"] == "TGT@2017-11-15");
  REQUIRE(j["window"].size() == 3);
  CHECK(j["window"][0]["date"] == "2017-11-15");
  CHECK(j["window"][2]["date"] == "2017-11-17");

  const auto after = run({"volatility", "--prices", prices, "--event", "TGT,2017-11-15,after_close", "--tau", "3"});
  const auto ja = nlohmann::json::parse(after.out);
  CHECK(ja["window"][0]["date"] == "2017-11-16");
  CHECK(ja["window"][2]["date"] == "2017-11-20");

  const auto lib = post_earnings_volatility(t::make_event("TGT", "2017-11-15", MarketSession::BeforeOpen),
                                            t::tgt_2017q4_prices(), compute_returns(t::tgt_2017q4_prices()), 3,
                                            VolConvention::PaperLiteral);
  CHECK(j["value"].get<double>() == lib.value);
  CHECK(run({"volatility", "--prices", prices, "--event", "TGT,2017-11-15", "--tau", "3"}).status == cli::kExitUsage);
}

TEST_CASE("golden: split output is the serialized library split") {
  const auto r = run({"split", "--events", events_csv(), "--prices", prices_dir(), "--quarter", "2021Q1"});
  REQUIRE(r.status == 0);
  const auto split = rolling_quarter_split(t::dec_table(), Quarter{2021, 1});
  CHECK(r.out == json_text(to_json(split)));
  const auto s = nlohmann::json::parse(r.out);
  CHECK(s["train"].size() == 480);
  CHECK(s["val"].size() == 240);
  CHECK(s["test"].size() == 90);
}

TEST_CASE("golden: --seed and --convention reach the library") {
  const auto r =
      run({"split", "--events", events_csv(), "--prices", prices_dir(), "--quarter", "2021Q1", "--seed", "9"});
  CHECK(r.out == json_text(to_json(rolling_quarter_split(t::dec_table(), Quarter{2021, 1}, {}, 9))));

  const auto p = run({"predict", "--events", events_csv(), "--prices", prices_dir(), "--quarter", "2021Q2",
                      "--model", "STPEV(Mean)", "--tau", "7", "--convention", "sample_std"});
  REQUIRE(p.status == 0);
  const auto& table = t::dec_table(VolConvention::SampleStd);
  const std::vector<int> taus{7};
  const auto lib =
      run_baseline(table, rolling_quarter_split(table, Quarter{2021, 2}), taus, *parse_model_spec("STPEV(Mean)"));
  CHECK(p.out == json_text(to_json(lib.predictions)));
}

TEST_CASE("predict, evaluate and correlate chain through files") {
  t::TempDir dir;
  const auto preds = (dir / "stpev.json").string();
  const auto ref = (dir / "pev.json").string();
  REQUIRE(run({"predict", "--events", events_csv(), "--prices", prices_dir(), "--quarter", "2022Q1", "--model",
               "STPEV(Median)", "--out", preds})
              .status == 0);
  REQUIRE(run({"predict", "--events", events_csv(), "--prices", prices_dir(), "--quarter", "2022Q1", "--model",
               "STPEV(Mean)", "--out", ref})
              .status == 0);
  const auto e = run({"evaluate", "--events", events_csv(), "--prices", prices_dir(), "--quarter", "2022Q1",
                      "--predictions", preds});
  REQUIRE(e.status == 0);
  const auto je = nlohmann::json::parse(e.out);
  const auto& table = t::dec_table();
  const auto split = rolling_quarter_split(table, Quarter{2022, 1});
  const auto lib = load_prediction_set(preds);
  CHECK(je["mse"]["15"].get<double>() == mse(lib, test_truth(table, split, 15), 15));
  CHECK(je["n_test"] == 90);

  const auto c = run({"correlate", "--predictions", preds, "--reference", ref, "--tau", "3"});
  REQUIRE(c.status == 0);
  CHECK(nlohmann::json::parse(c.out)["coef"]["3"].get<double>() > 0.5);
}

TEST_CASE("similarity with random ticker embeddings") {
  const auto r = run({"similarity", "--events", events_csv(), "--random", "ticker", "--dim", "16"});
  REQUIRE(r.status == 0);
  CHECK(nlohmann::json::parse(r.out)["within_ticker"].get<double>() == 1.0);
  CHECK(run({"similarity", "--events", events_csv()}).status == cli::kExitUsage);
  CHECK(run({"similarity", "--events", events_csv(), "--random", "sector"}).status == cli::kExitUsage);
}

TEST_CASE("run: config file and flag overrides") {
  t::TempDir dir;
  t::write_text(dir / "exp.toml", "earnings = \"" + events_csv() + "\"\nprices_dir = \"" + prices_dir() +
                                      "\"\nmodels = [\"PEV(Mean)\", \"STPEV(Mean)\"]\nquarters = [\"2021Q2\"]\n");
  const auto cfg = (dir / "exp.toml").string();
  const auto a = run({"run", "--config", cfg});
  REQUIRE(a.status == 0);
  CHECK(a.out == json_text(to_json(run_experiment(load_experiment_config(cfg)))));
  const auto b = run({"run", "--config", cfg, "--convention", "sample_std"});
  CHECK(nlohmann::json::parse(b.out)["config"]["convention"] == "sample_std");
  const auto pretty = run({"run", "--config", cfg, "--pretty"});
  CHECK(pretty.out.find("STPEV(Mean)") != std::string::npos);
  t::write_text(dir / "bad.toml", "models = [\"PEV(Mean)\"]\n");
  CHECK(run({"run", "--config", (dir / "bad.toml").string()}).status == cli::kExitData);
}

TEST_CASE("the installed binary reports exit codes") {
  auto status_of = [](const std::string& args) {
    const std::string cmd = std::string(EARNVOL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status_of("") == 1);
  CHECK(status_of("--help") == 0);
  CHECK(status_of("oet --train /nonexistent/a.csv --test /nonexistent/b.csv") == 2);
}
