#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "earnvol/errors.hpp"
#include "earnvol/market_data.hpp"
#include "fixtures.hpp"

using namespace earnvol;
using earnvol::testing::thrown_kind;

namespace {

PriceSeries parse(const std::string& text, const std::string& ticker = "X") {
  std::istringstream in(text);
  return parse_price_series(in, ticker);
}

}  // namespace

TEST_CASE("Date parses strict ISO dates") {
  CHECK(Date::parse("2017-11-15").iso() == "2017-11-15");
  CHECK(Date::parse("2017-11-15").weekday() == std::chrono::Wednesday);
  CHECK(Date::parse("2016-02-29").plus_days(1) == Date::parse("2016-03-01"));
  CHECK(thrown_kind([] { Date::parse("2017-11-5"); }) == ErrorKind::Parse);
  CHECK(thrown_kind([] { Date::parse("2017-02-30"); }) == ErrorKind::Parse);
  CHECK(thrown_kind([] { Date::parse("2017/11/15"); }) == ErrorKind::Parse);
  CHECK(thrown_kind([] { Date::parse(" 2017-11-15"); }) == ErrorKind::Parse);
}

TEST_CASE("Quarter labels") {
  const auto q = Quarter::parse("2021Q4");
  CHECK(q.year == 2021);
  CHECK(q.q == 4);
  CHECK(q.label() == "2021Q4");
  CHECK(q.next() == Quarter{2022, 1});
  CHECK(Quarter{2021, 3}.first_day() == Date::parse("2021-07-01"));
  CHECK(Quarter{2020, 4} < Quarter{2021, 1});
  CHECK(thrown_kind([] { Quarter::parse("2021Q5"); }) == ErrorKind::Parse);
  CHECK(thrown_kind([] { Quarter::parse("21Q1"); }) == ErrorKind::Parse);
}

TEST_CASE("load_price_series: minimal file") {
  const auto p = parse("date,close\n2017-11-14,100.0\n2017-11-15,110.0\n");
  REQUIRE(p.size() == 2);
  CHECK(p.points()[0].close == 100.0);
  CHECK(p.points()[1].date == Date::parse("2017-11-15"));
  CHECK(p.calendar().size() == 2);
}

TEST_CASE("load_price_series: non-positive close names the line") {
  try {
    parse("date,close\n2017-11-14,100.0\n2017-11-15,-3.0\n");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("non-positive close at line 3") != std::string::npos);
  }
  CHECK(thrown_kind([] { parse("date,close\n2017-11-14,0\n"); }) == ErrorKind::Parse);
}

TEST_CASE("load_price_series: duplicates, bad header, malformed rows") {
  CHECK(thrown_kind([] { parse("date,close\n2017-11-14,1\n2017-11-14,2\n"); }) == ErrorKind::Parse);
  CHECK(thrown_kind([] { parse("day,close\n2017-11-14,1\n"); }) == ErrorKind::Parse);
  CHECK(thrown_kind([] { parse("date,close\n2017-11-14,abc\n"); }) == ErrorKind::Parse);
  CHECK(thrown_kind([] { parse("date,close\n2017-11-14\n"); }) == ErrorKind::Parse);
  CHECK(thrown_kind([] { parse("date,close\n"); }) == ErrorKind::EmptyInput);
}

TEST_CASE("load_price_series: shuffled rows equal the sorted series") {
  // Oracle: sort the rows as text, then compare point by point.
  std::vector<std::pair<std::string, std::string>> rows;
  Date d = Date::parse("2020-03-02");
  for (int i = 0; i < 10; ++i, d = d.plus_days(1)) rows.emplace_back(d.iso(), std::to_string(50.0 + i * 1.25));
  auto shuffled = rows;
  std::mt19937 rng(3);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  REQUIRE(shuffled != rows);
  std::string text = "date,close\n";
  for (const auto& [date, close] : shuffled) text += date + "," + close + "\n";
  const auto p = parse(text);
  auto expected = shuffled;
  std::sort(expected.begin(), expected.end());
  REQUIRE(p.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(p.points()[i].date.iso() == expected[i].first);
    CHECK(p.points()[i].close == std::stod(expected[i].second));
  }
}

TEST_CASE("load_price_series is idempotent through its own output") {
  std::mt19937_64 rng(11);
  std::lognormal_distribution<double> px(4.0, 0.5);
  std::vector<PricePoint> pts;
  Date d = Date::parse("2019-01-01");
  for (int i = 0; i < 200; ++i, d = d.plus_days(1)) pts.push_back({d, px(rng)});
  const PriceSeries original("ABC", pts);
  earnvol::testing::TempDir dir;
  {
    std::ofstream out(dir / "ABC.csv");
    write_price_series(out, original);
  }
  const auto loaded = load_price_series(dir / "ABC.csv");
  CHECK(loaded == original);
  const auto all = load_price_directory(dir.path());
  REQUIRE(all.size() == 1);
  CHECK(all[0].ticker() == "ABC");
  CHECK(thrown_kind([&] { load_price_series(dir / "missing.csv"); }) == ErrorKind::MissingPrices);
}

TEST_CASE("compute_returns") {
  auto series = [](std::vector<double> closes) {
    std::vector<PricePoint> pts;
    Date d = Date::parse("2021-01-04");
    for (double c : closes) {
      pts.push_back({d, c});
      d = d.plus_days(1);
    }
    return PriceSeries("X", pts);
  };
  auto r = compute_returns(series({100, 110}));
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0].r == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(r.points[0].date == Date::parse("2021-01-05"));

  r = compute_returns(series({100, 100, 100}));
  CHECK(r.points[0].r == 0.0);
  CHECK(r.points[1].r == 0.0);

  r = compute_returns(series({100, 110, 99, 103.95}));
  const double expected[] = {10.0 / 100.0, -11.0 / 110.0, 4.95 / 99.0};
  for (int i = 0; i < 3; ++i) CHECK(r.points[i].r == doctest::Approx(expected[i]).epsilon(1e-12));

  CHECK(thrown_kind([&] { compute_returns(series({100})); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("property: price reconstruction from returns") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> step(0.0, 0.02);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<PricePoint> pts;
    double c = 10.0 + trial;
    Date d = Date::parse("2015-06-01");
    for (int i = 0; i < 300; ++i, d = d.plus_days(1)) {
      pts.push_back({d, c});
      c *= 1.0 + step(rng);
    }
    const PriceSeries p("X", pts);
    const auto r = compute_returns(p);
    double rebuilt = p.points()[0].close;
    for (std::size_t k = 0; k < r.points.size(); ++k) {
      rebuilt *= 1.0 + r.points[k].r;
      const double truth = p.points()[k + 1].close;
      REQUIRE(std::abs(rebuilt - truth) / truth <= 1e-12);
    }
  }
}

TEST_CASE("trading_day_at_offset") {
  const TradingCalendar cal({Date::parse("2017-11-14"), Date::parse("2017-11-15"), Date::parse("2017-11-16"),
                             Date::parse("2017-11-17"), Date::parse("2017-11-20")});
  CHECK(trading_day_at_offset(cal, Date::parse("2017-11-15"), 2) == Date::parse("2017-11-17"));
  CHECK(trading_day_at_offset(cal, Date::parse("2017-11-15"), 0) == Date::parse("2017-11-15"));
  CHECK(trading_day_at_offset(cal, Date::parse("2017-11-17"), 1) == Date::parse("2017-11-20"));
  CHECK(thrown_kind([&] { trading_day_at_offset(cal, Date::parse("2017-11-18"), 0); }) == ErrorKind::NotATradingDay);
  CHECK(thrown_kind([&] { trading_day_at_offset(cal, Date::parse("2017-11-15"), 9); }) == ErrorKind::OutOfRange);
  CHECK(thrown_kind([&] { trading_day_at_offset(cal, Date::parse("2017-11-15"), -2); }) == ErrorKind::OutOfRange);
}

TEST_CASE("property: offset +k then -k returns the start day") {
  std::mt19937_64 rng(17);
  std::bernoulli_distribution open(0.7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Date> days;
    for (Date d = Date::parse("2010-01-01"); days.size() < 120; d = d.plus_days(1))
      if (open(rng)) days.push_back(d);
    const TradingCalendar cal(days);
    std::uniform_int_distribution<long> pick(0, static_cast<long>(days.size()) - 1);
    for (int k = 0; k < 20; ++k) {
      const long i = pick(rng), j = pick(rng);
      const long off = j - i;
      const Date there = trading_day_at_offset(cal, days[i], off);
      CHECK(there == days[j]);
      CHECK(trading_day_at_offset(cal, there, -off) == days[i]);
    }
  }
}

TEST_CASE("TradingCalendar rejects unordered days") {
  CHECK(thrown_kind([] { TradingCalendar({Date::parse("2017-11-15"), Date::parse("2017-11-14")}); }) ==
        ErrorKind::InvalidArgument);
  CHECK(thrown_kind([] { TradingCalendar({Date::parse("2017-11-15"), Date::parse("2017-11-15")}); }) ==
        ErrorKind::InvalidArgument);
}
