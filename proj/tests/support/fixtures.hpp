#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "earnvol/dataset.hpp"
#include "earnvol/errors.hpp"
#include "earnvol/market_data.hpp"
#include "earnvol/synthetic.hpp"
#include "earnvol/volatility.hpp"

namespace earnvol::testing {

// Kind of the earnvol::Error thrown by `f`, or nullopt if none was thrown.
template <class F>
std::optional<ErrorKind> thrown_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// Unique directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "earnvol");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& p, const std::string& text);
std::string read_text(const std::filesystem::path& p);

EarningsEvent make_event(const std::string& ticker, const std::string& date, MarketSession session,
                         const std::string& quarter = "2017Q4");

// NYSE sessions from 2017-10-02 to 2017-12-29 (Thanksgiving and Christmas
// closed) with deterministic closes.
PriceSeries tgt_2017q4_prices();

// Counts behind one printed OET value.
struct OetCell {
  std::string name;
  std::size_t overlapping = 0;   // training earnings of test tickers
  std::size_t test_tickers = 0;
  std::size_t other_train = 0;   // training earnings of tickers absent from test
  double printed = 0.0;
};

std::vector<OetCell> oet_cells();

// Train/test metadata realising `cell`: one test event per test ticker,
// overlapping earnings spread round-robin over the test tickers.
std::pair<std::vector<EarningsEvent>, std::vector<EarningsEvent>> oet_fixture(const OetCell& cell);

// The standard 90 x 20 synthetic market (2019Q1-2023Q4), cached per process.
const SyntheticMarket& dec_market();
// Event table of dec_market() under `convention`, cached per process.
const EventTable& dec_table(VolConvention convention = VolConvention::PaperLiteral);

}  // namespace earnvol::testing
