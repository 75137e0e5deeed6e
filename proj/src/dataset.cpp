#include "earnvol/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>

#include "csv.hpp"
#include "earnvol/errors.hpp"

namespace earnvol {

std::string_view to_string(Provenance p) { return p == Provenance::Native ? "native" : "augmented"; }

bool EventEntry::complete() const {
  for (int tau : kStandardTaus)
    if (!records.contains(tau)) return false;
  return true;
}

double EventEntry::value(int tau) const {
  auto it = records.find(tau);
  if (it == records.end())
    throw Error(ErrorKind::OutOfRange, event.event_id + ": no volatility record for tau=" + std::to_string(tau));
  return it->second.value;
}

EventTable::EventTable(std::vector<EventEntry> entries, std::map<std::string, PriceSeries> prices,
                       VolConvention convention)
    : entries_(std::move(entries)), prices_(std::move(prices)), convention_(convention) {
  for (auto& e : entries_)
    if (e.event.event_id.empty()) e.event.event_id = make_event_id(e.event.ticker, e.event.announce_date);
  std::sort(entries_.begin(), entries_.end(),
            [](const EventEntry& a, const EventEntry& b) { return a.event.event_id < b.event.event_id; });
  for (std::size_t i = 1; i < entries_.size(); ++i)
    if (entries_[i].event.event_id == entries_[i - 1].event.event_id)
      throw Error(ErrorKind::InvalidArgument, "duplicate event " + entries_[i].event.event_id);
}

const EventEntry* EventTable::find(const std::string& event_id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), event_id,
                             [](const EventEntry& e, const std::string& id) { return e.event.event_id < id; });
  if (it == entries_.end() || it->event.event_id != event_id) return nullptr;
  return &*it;
}

const EventEntry& EventTable::at(const std::string& event_id) const {
  if (const auto* e = find(event_id)) return *e;
  throw Error(ErrorKind::KeyMismatch, "unknown event " + event_id);
}

std::size_t EventTable::incomplete_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const EventEntry& e) { return !e.complete(); }));
}

std::vector<EarningsEvent> EventTable::events() const {
  std::vector<EarningsEvent> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.event);
  return out;
}

std::vector<EarningsEvent> parse_earnings(std::istream& in) {
  csv::Reader reader(in, {"ticker", "date", "session", "year", "quarter"}, /*allow_extra=*/true);
  std::vector<EarningsEvent> out;
  while (auto row = reader.next()) {
    const auto line = std::to_string(reader.line_number());
    if (row->size() < 5) throw Error(ErrorKind::Parse, "malformed earnings row at line " + line);
    try {
      EarningsEvent ev;
      ev.ticker = (*row)[0];
      if (ev.ticker.empty()) throw Error(ErrorKind::Parse, "empty ticker");
      ev.announce_date = Date::parse((*row)[1]);
      ev.session = parse_session((*row)[2]);
      auto year = csv::parse_int((*row)[3]);
      auto q = csv::parse_int((*row)[4]);
      if (!year || !q || *q < 1 || *q > 4) throw Error(ErrorKind::Parse, "bad year/quarter");
      ev.quarter = {*year, *q};
      ev.event_id = make_event_id(ev.ticker, ev.announce_date);
      out.push_back(std::move(ev));
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, "malformed earnings row at line " + line + ": " + e.what());
    }
  }
  return out;
}

std::vector<EarningsEvent> load_earnings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open earnings file " + path.string());
  try {
    return parse_earnings(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_earnings(std::ostream& out, std::span<const EarningsEvent> events) {
  out << "ticker,date,session,year,quarter\n";
  for (const auto& e : events)
    out << e.ticker << ',' << e.announce_date.iso() << ',' << to_string(e.session) << ','
        << e.quarter.year << ',' << e.quarter.q << '\n';
}

namespace {

EventEntry compute_entry(const EarningsEvent& ev, const PriceSeries& prices, const ReturnSeries* returns,
                         VolConvention convention, Provenance provenance) {
  EventEntry entry{ev, provenance, {}, {}};
  for (int tau : kStandardTaus) {
    try {
      if (!returns) throw Error(ErrorKind::InsufficientFutureData, "fewer than 2 closes");
      entry.records.emplace(tau, post_earnings_volatility(ev, prices, *returns, tau, convention));
    } catch (const Error& e) {
      entry.missing.emplace(tau, std::string(to_string(e.kind())) + ": " + e.what());
    }
  }
  return entry;
}

std::map<std::string, PriceSeries> index_prices(std::vector<PriceSeries> series) {
  std::map<std::string, PriceSeries> out;
  for (auto& s : series) {
    auto ticker = s.ticker();
    out.emplace(std::move(ticker), std::move(s));
  }
  return out;
}

}  // namespace

EventTable build_event_table(std::span<const EarningsEvent> events,
                             std::map<std::string, PriceSeries> prices, VolConvention convention,
                             Provenance provenance) {
  std::map<std::string, ReturnSeries> returns;
  std::vector<EventEntry> entries;
  entries.reserve(events.size());
  for (const auto& raw : events) {
    EarningsEvent ev = raw;
    if (ev.event_id.empty()) ev.event_id = make_event_id(ev.ticker, ev.announce_date);
    auto pit = prices.find(ev.ticker);
    if (pit == prices.end()) throw Error(ErrorKind::MissingPrices, "no price file for ticker " + ev.ticker);
    auto rit = returns.find(ev.ticker);
    if (rit == returns.end() && pit->second.size() >= 2)
      rit = returns.emplace(ev.ticker, compute_returns(pit->second)).first;
    entries.push_back(compute_entry(ev, pit->second, rit == returns.end() ? nullptr : &rit->second,
                                    convention, provenance));
  }
  return EventTable(std::move(entries), std::move(prices), convention);
}

EventTable build_event_table(const std::filesystem::path& earnings_file,
                             const std::filesystem::path& prices_dir, VolConvention convention) {
  auto events = load_earnings(earnings_file);
  std::set<std::string> tickers;
  for (const auto& e : events) tickers.insert(e.ticker);
  std::vector<PriceSeries> series;
  for (const auto& t : tickers) {
    auto path = prices_dir / (t + ".csv");
    if (!std::filesystem::exists(path))
      throw Error(ErrorKind::MissingPrices, "missing price file for ticker " + t + ": " + path.string());
    series.push_back(load_price_series(path));
  }
  return build_event_table(events, index_prices(std::move(series)), convention);
}

double OetCounts::value() const {
  if (test_tickers == 0) throw Error(ErrorKind::EmptyInput, "OET undefined for an empty test set");
  return static_cast<double>(overlapping_earnings) / static_cast<double>(test_tickers);
}

OetCounts oet_counts(std::span<const EarningsEvent> train, std::span<const EarningsEvent> test) {
  if (test.empty()) throw Error(ErrorKind::EmptyInput, "OET undefined for an empty test set");
  std::set<std::string_view> test_tickers;
  for (const auto& e : test) test_tickers.insert(e.ticker);
  OetCounts c;
  c.test_tickers = test_tickers.size();
  for (const auto& e : train)
    if (test_tickers.contains(e.ticker)) ++c.overlapping_earnings;
  return c;
}

double oet(std::span<const EarningsEvent> train, std::span<const EarningsEvent> test) {
  return oet_counts(train, test).value();
}

Split rolling_quarter_split(const EventTable& table, Quarter target, SplitRatio ratio, std::uint64_t seed) {
  if (ratio.train < 1 || ratio.val < 0)
    throw Error(ErrorKind::InvalidArgument, "split ratio needs train >= 1 and val >= 0");
  Split split;
  split.target = target;
  split.seed = seed;
  std::vector<std::string> prior;
  for (const auto& e : table.entries()) {
    if (!e.complete()) continue;
    if (e.event.quarter == target)
      split.test.push_back(e.event.event_id);
    else if (e.event.quarter < target)
      prior.push_back(e.event.event_id);
  }
  if (prior.empty())
    throw Error(ErrorKind::EmptyInput, "no complete events before " + target.label());
  // Entries are id-sorted already; sort again so the shuffle never depends on
  // how the table was assembled.
  std::sort(prior.begin(), prior.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = prior.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(prior[i], prior[pick(rng)]);
  }
  const std::size_t n_val = prior.size() * static_cast<std::size_t>(ratio.val) /
                            static_cast<std::size_t>(ratio.train + ratio.val);
  split.val.assign(prior.end() - static_cast<std::ptrdiff_t>(n_val), prior.end());
  split.train.assign(prior.begin(), prior.end() - static_cast<std::ptrdiff_t>(n_val));
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

namespace {

PriceSeries merge_prices(const PriceSeries& native, const PriceSeries& extended) {
  std::map<Date, double> merged;
  for (const auto& p : native.points()) merged.emplace(p.date, p.close);
  for (const auto& p : extended.points()) {
    auto [it, inserted] = merged.emplace(p.date, p.close);
    if (!inserted && std::abs(it->second - p.close) > 1e-9 * std::abs(it->second))
      throw Error(ErrorKind::DataConflict, native.ticker() + ": extended close on " + p.date.iso() +
                                               " disagrees with native data");
  }
  std::vector<PricePoint> pts;
  pts.reserve(merged.size());
  for (const auto& [d, c] : merged) pts.push_back({d, c});
  return PriceSeries(native.ticker().empty() ? extended.ticker() : native.ticker(), std::move(pts));
}

}  // namespace

EventTable augment_history(const EventTable& table, std::span<const EarningsEvent> extended_events,
                           const std::map<std::string, PriceSeries>& extended_prices, int years) {
  if (years < 0) throw Error(ErrorKind::InvalidArgument, "augmentation years must be >= 0");
  std::vector<EventEntry> entries(table.entries().begin(), table.entries().end());
  std::map<std::string, PriceSeries> prices = table.prices();
  if (extended_events.empty() || entries.empty())
    return EventTable(std::move(entries), std::move(prices), table.convention());

  Date earliest = entries.front().event.announce_date;
  for (const auto& e : entries) earliest = std::min(earliest, e.event.announce_date);
  auto ymd = earliest.ymd();
  auto start_ymd = std::chrono::year_month_day{ymd.year() - std::chrono::years{years}, ymd.month(), ymd.day()};
  if (!start_ymd.ok()) start_ymd = start_ymd.year() / start_ymd.month() / std::chrono::last;
  const Date window_start{std::chrono::sys_days{start_ymd}};

  for (const auto& [ticker, ext] : extended_prices) {
    auto it = prices.find(ticker);
    if (it == prices.end())
      prices.emplace(ticker, ext);
    else
      it->second = merge_prices(it->second, ext);
  }

  std::map<std::string, ReturnSeries> returns;
  for (const auto& raw : extended_events) {
    if (raw.announce_date >= earliest || raw.announce_date < window_start) continue;
    EarningsEvent ev = raw;
    if (ev.event_id.empty()) ev.event_id = make_event_id(ev.ticker, ev.announce_date);
    if (table.find(ev.event_id)) continue;
    auto pit = prices.find(ev.ticker);
    if (pit == prices.end())
      throw Error(ErrorKind::MissingPrices, "no extended prices for ticker " + ev.ticker);
    auto rit = returns.find(ev.ticker);
    if (rit == returns.end() && pit->second.size() >= 2)
      rit = returns.emplace(ev.ticker, compute_returns(pit->second)).first;
    entries.push_back(compute_entry(ev, pit->second, rit == returns.end() ? nullptr : &rit->second,
                                    table.convention(), Provenance::Augmented));
  }
  return EventTable(std::move(entries), std::move(prices), table.convention());
}

EventTable augment_history(const EventTable& table, const std::filesystem::path& extended_prices_dir,
                           const std::filesystem::path& extended_earnings_file, int years) {
  auto events = load_earnings(extended_earnings_file);
  std::set<std::string> tickers;
  for (const auto& e : events) tickers.insert(e.ticker);
  std::map<std::string, PriceSeries> ext;
  for (const auto& t : tickers) {
    auto path = extended_prices_dir / (t + ".csv");
    if (std::filesystem::exists(path)) ext.emplace(t, load_price_series(path));
    else if (!table.prices().contains(t))
      throw Error(ErrorKind::MissingPrices, "missing extended price file " + path.string());
  }
  return augment_history(table, events, ext, years);
}

std::vector<const EventEntry*> same_ticker_history(const EventTable& table, const EarningsEvent& event) {
  const std::string prefix = event.ticker + "@";
  auto entries = table.entries();
  auto it = std::lower_bound(entries.begin(), entries.end(), prefix,
                             [](const EventEntry& e, const std::string& p) { return e.event.event_id < p; });
  std::vector<const EventEntry*> out;
  for (; it != entries.end() && it->event.event_id.compare(0, prefix.size(), prefix) == 0; ++it) {
    if (it->event.announce_date >= event.announce_date) continue;
    if (it->complete()) out.push_back(&*it);
  }
  std::stable_sort(out.begin(), out.end(), [](const EventEntry* a, const EventEntry* b) {
    return a->event.announce_date < b->event.announce_date;
  });
  return out;
}

}  // namespace earnvol
