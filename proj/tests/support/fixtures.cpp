#include "fixtures.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace earnvol::testing {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  path_ = std::filesystem::temp_directory_path() /
          (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EarningsEvent make_event(const std::string& ticker, const std::string& date, MarketSession session,
                         const std::string& quarter) {
  EarningsEvent e;
  e.ticker = ticker;
  e.announce_date = Date::parse(date);
  e.session = session;
  e.quarter = Quarter::parse(quarter);
  e.event_id = make_event_id(ticker, e.announce_date);
  return e;
}

PriceSeries tgt_2017q4_prices() {
  std::vector<PricePoint> points;
  double close = 60.0;
  int k = 0;
  for (Date d = Date::parse("2017-10-02"); d <= Date::parse("2017-12-29"); d = d.plus_days(1)) {
    const auto wd = d.weekday();
    if (wd == std::chrono::Saturday || wd == std::chrono::Sunday) continue;
    if (d == Date::parse("2017-11-23") || d == Date::parse("2017-12-25")) continue;
    // Deterministic wiggle so no window is flat.
    close *= 1.0 + 0.01 * std::sin(1.7 * ++k) + 0.002 * ((k * 7) % 5 - 2);
    points.push_back({d, close});
  }
  return PriceSeries("TGT", std::move(points));
}

std::vector<OetCell> oet_cells() {
  // other_train fills the training pool up to its printed size (train + val)
  // where that size is known; the OET itself depends only on the first two
  // counts.
  return {
      {"EC", 178, 112, 447 - 178, 1.589},
      {"MAEC-15", 94, 154, 611 - 94, 0.61},
      {"MAEC-16", 215, 280, 1120 - 215, 0.768},
      {"EC original (vs augmented)", 179, 112, 0, 1.598},
      {"EC augmented", 2195, 111, 0, 19.775},
      {"MAEC-15 augmented", 3192, 154, 0, 20.727},
      {"MAEC-16 augmented", 5765, 277, 0, 20.812},
  };
}

std::pair<std::vector<EarningsEvent>, std::vector<EarningsEvent>> oet_fixture(const OetCell& cell) {
  auto ticker = [](const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%04zu", prefix, i);
    return std::string(buf);
  };
  const Date test_day = Date::parse("2017-11-15");
  const Date train_end = Date::parse("2017-06-30");
  std::vector<EarningsEvent> train, test;
  for (std::size_t i = 0; i < cell.test_tickers; ++i)
    test.push_back(make_event(ticker("T", i), test_day.iso(), MarketSession::AfterClose, "2017Q4"));
  for (std::size_t m = 0; m < cell.overlapping; ++m) {
    const Date d = train_end.plus_days(-static_cast<int>(m / cell.test_tickers));
    train.push_back(make_event(ticker("T", m % cell.test_tickers), d.iso(), MarketSession::BeforeOpen, "2017Q2"));
  }
  for (std::size_t m = 0; m < cell.other_train; ++m)
    train.push_back(make_event(ticker("U", m % 97), train_end.plus_days(-static_cast<int>(m / 97)).iso(),
                               MarketSession::BeforeOpen, "2017Q2"));
  return {std::move(train), std::move(test)};
}

const SyntheticMarket& dec_market() {
  static const SyntheticMarket market = [] {
    SyntheticConfig cfg;
    cfg.seed = 20190101;
    return generate_market(cfg);
  }();
  return market;
}

const EventTable& dec_table(VolConvention convention) {
  static std::mutex mu;
  static std::map<VolConvention, EventTable> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(convention);
  if (it == cache.end())
    it = cache.emplace(convention, build_event_table(dec_market().events, dec_market().prices, convention)).first;
  return it->second;
}

}  // namespace earnvol::testing
