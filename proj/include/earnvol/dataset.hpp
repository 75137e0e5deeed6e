#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "earnvol/date.hpp"
#include "earnvol/market_data.hpp"
#include "earnvol/volatility.hpp"

namespace earnvol {

enum class Provenance { Native, Augmented };
std::string_view to_string(Provenance p);

struct EventEntry {
  EarningsEvent event;
  Provenance provenance = Provenance::Native;
  std::map<int, VolatilityRecord> records;   // by tau
  std::map<int, std::string> missing;        // tau -> reason the record is absent

  // All four standard windows present.
  bool complete() const;
  double value(int tau) const;  // throws Error(OutOfRange) when absent
};

// The event universe plus the prices it was computed from. Entries are kept
// sorted by event id; ids are unique.
class EventTable {
 public:
  EventTable() = default;
  EventTable(std::vector<EventEntry> entries, std::map<std::string, PriceSeries> prices = {},
             VolConvention convention = VolConvention::PaperLiteral);

  std::span<const EventEntry> entries() const { return entries_; }
  const EventEntry* find(const std::string& event_id) const;
  const EventEntry& at(const std::string& event_id) const;
  const std::map<std::string, PriceSeries>& prices() const { return prices_; }
  VolConvention convention() const { return convention_; }

  std::size_t incomplete_count() const;
  std::vector<EarningsEvent> events() const;

 private:
  std::vector<EventEntry> entries_;
  std::map<std::string, PriceSeries> prices_;
  VolConvention convention_ = VolConvention::PaperLiteral;
};

// Earnings file: header `ticker,date,session,year,quarter`, extra trailing
// columns (e.g. sector) are passed over.
std::vector<EarningsEvent> parse_earnings(std::istream& in);
std::vector<EarningsEvent> load_earnings(const std::filesystem::path& path);
void write_earnings(std::ostream& out, std::span<const EarningsEvent> events);

// Joins events to prices and computes every standard window. Events whose
// windows cannot be computed keep the failure reason per tau.
EventTable build_event_table(std::span<const EarningsEvent> events,
                             std::map<std::string, PriceSeries> prices, VolConvention convention,
                             Provenance provenance = Provenance::Native);
EventTable build_event_table(const std::filesystem::path& earnings_file,
                             const std::filesystem::path& prices_dir, VolConvention convention);

struct OetCounts {
  std::size_t overlapping_earnings = 0;
  std::size_t test_tickers = 0;
  double value() const;
};

// Overlapping earnings per ticker: training earnings whose ticker appears in
// the test set, over distinct test tickers. Throws on an empty test set.
OetCounts oet_counts(std::span<const EarningsEvent> train, std::span<const EarningsEvent> test);
double oet(std::span<const EarningsEvent> train, std::span<const EarningsEvent> test);

struct SplitRatio {
  int train = 2;
  int val = 1;
};

inline constexpr std::uint64_t kDefaultSplitSeed = 42;

struct Split {
  std::vector<std::string> train;  // sorted ids
  std::vector<std::string> val;
  std::vector<std::string> test;
  Quarter target;
  std::uint64_t seed = kDefaultSplitSeed;

  friend bool operator==(const Split&, const Split&) = default;
};

// Test = complete events labelled `target`; every complete event from an
// earlier quarter is shuffled (seeded Fisher-Yates over sorted ids) and cut
// train:val with the validation size floored.
Split rolling_quarter_split(const EventTable& table, Quarter target, SplitRatio ratio = {},
                            std::uint64_t seed = kDefaultSplitSeed);

// Left-extends the table with earlier earnings computed from extended price
// histories. Only events within `years` years before the table's earliest
// announcement are added; existing entries are untouched.
EventTable augment_history(const EventTable& table, std::span<const EarningsEvent> extended_events,
                           const std::map<std::string, PriceSeries>& extended_prices, int years = 5);
EventTable augment_history(const EventTable& table, const std::filesystem::path& extended_prices_dir,
                           const std::filesystem::path& extended_earnings_file, int years = 5);

// The ticker's complete events announced strictly before `event`, oldest first.
std::vector<const EventEntry*> same_ticker_history(const EventTable& table, const EarningsEvent& event);

}  // namespace earnvol
