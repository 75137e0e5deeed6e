// Writes a synthetic market (earnings.csv + prices/) for demos and smoke runs.

#include <iostream>

#include "CLI11.hpp"
#include "earnvol/errors.hpp"
#include "earnvol/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic earnings market", "earnvol-synth"};
  earnvol::SyntheticConfig cfg;
  std::string out_dir;
  std::string first_quarter = "2019Q1";
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--tickers", cfg.n_tickers, "Number of tickers")->capture_default_str();
  app.add_option("--first-quarter", first_quarter, "First quarter label")->capture_default_str();
  app.add_option("--quarters", cfg.n_quarters, "Number of quarters")->capture_default_str();
  app.add_option("--history-quarters", cfg.history_quarters, "Earlier quarters for augmentation")
      ->capture_default_str();
  app.add_option("--shock", cfg.shock_multiplier, "First post-earnings sigma multiplier")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Generator seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    cfg.first_quarter = earnvol::Quarter::parse(first_quarter);
    const auto market = earnvol::generate_market(cfg);
    earnvol::write_market(market, out_dir);
    std::cout << market.events.size() << " events, " << market.history_events.size() << " history events, "
              << market.prices.size() << " tickers -> " << out_dir << "\n";
  } catch (const earnvol::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
