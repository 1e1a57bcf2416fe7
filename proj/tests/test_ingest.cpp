#include <cmath>
#include <random>

#include "doctest.h"

#include "corrnet/csv.hpp"
#include "corrnet/errors.hpp"
#include "corrnet/ingest.hpp"
#include "test_support.hpp"

using namespace corrnet;
using testsup::D;
using testsup::TempDir;
using testsup::write_file;

TEST_CASE("long price file loads with sorted date union") {
  TempDir dir("ingest_long");
  write_file(dir.file("p.csv"),
             "date,asset_id,adjusted_close\n"
             "2003-01-03,AAPL,14.5\n"
             "2003-01-02,AAPL,14.0\n"
             "2003-01-06,AAPL,15.0\n");
  PricePanel p = load_prices(dir.file("p.csv"), PriceFormat::Long);
  REQUIRE(p.n_dates() == 3);
  REQUIRE(p.n_assets() == 1);
  CHECK(p.dates[0] == D("2003-01-02"));
  CHECK(p.at(0, 0) == 14.0);
  CHECK(p.at(2, 0) == 15.0);
  for (size_t d = 0; d < 3; ++d) CHECK(!is_missing(p.at(d, 0)));
}

TEST_CASE("wide price file marks absent cells missing") {
  TempDir dir("ingest_wide");
  write_file(dir.file("p.csv"),
             "date,A,B\n"
             "2003-01-02,10,20\n"
             "2003-01-03,11,\n"
             "2003-01-06,12,21\n");
  PricePanel p = load_prices(dir.file("p.csv"), PriceFormat::Wide);
  REQUIRE(p.n_assets() == 2);
  CHECK(!is_missing(p.at(1, 0)));
  CHECK(is_missing(p.at(1, 1)));
  CHECK(p.at(2, 1) == 21.0);
}

TEST_CASE("non-positive price is a data error naming the cell") {
  TempDir dir("ingest_zero");
  write_file(dir.file("p.csv"),
             "date,asset_id,adjusted_close\n"
             "2003-01-02,BAD,0.0\n");
  try {
    load_prices(dir.file("p.csv"), PriceFormat::Long);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    std::string msg = e.what();
    CHECK(msg.find("BAD") != std::string::npos);
    CHECK(msg.find("2003-01-02") != std::string::npos);
  }
}

TEST_CASE("duplicate (date, asset) entries are rejected") {
  TempDir dir("ingest_dup");
  write_file(dir.file("p.csv"),
             "date,asset_id,adjusted_close\n"
             "2003-01-02,A,10\n"
             "2003-01-02,A,11\n");
  CHECK_THROWS_AS(load_prices(dir.file("p.csv"), PriceFormat::Long), DataError);
}

TEST_CASE("malformed row names the line") {
  TempDir dir("ingest_badrow");
  write_file(dir.file("p.csv"),
             "date,asset_id,adjusted_close\n"
             "2003-01-02,A,10\n"
             "not-a-date,A,10\n");
  try {
    load_prices(dir.file("p.csv"), PriceFormat::Long);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
}

TEST_CASE("log returns: constants, a known ratio, and unspanned gaps") {
  auto dates = testsup::weekdays(D("2003-01-06"), 3);

  PricePanel constant = testsup::make_prices(dates, {testsup::stock("A", "Technology")},
                                             {{100.0}, {100.0}, {100.0}});
  ReturnPanel r1 = compute_log_returns(constant);
  REQUIRE(r1.n_dates() == 2);
  CHECK(r1.at(0, 0) == 0.0);
  CHECK(r1.at(1, 0) == 0.0);

  PricePanel ratio = testsup::make_prices({dates[0], dates[1]},
                                          {testsup::stock("A", "Technology")}, {{100.0}, {110.0}});
  ReturnPanel r2 = compute_log_returns(ratio);
  CHECK(r2.at(0, 0) == doctest::Approx(0.09531017980432493).epsilon(1e-12));

  PricePanel gap = testsup::make_prices(dates, {testsup::stock("A", "Technology")},
                                        {{100.0}, {kMissing}, {120.0}});
  ReturnPanel r3 = compute_log_returns(gap);
  CHECK(is_missing(r3.at(0, 0)));
  CHECK(is_missing(r3.at(1, 0)));
}

TEST_CASE("log returns need two dates") {
  PricePanel p = testsup::make_prices({D("2003-01-02")}, {testsup::stock("A", "Technology")},
                                      {{100.0}});
  CHECK_THROWS_AS(compute_log_returns(p), ArgumentError);
}

TEST_CASE("per-asset scale invariance of returns") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> price(20.0, 200.0);
  auto dates = testsup::weekdays(D("2003-01-06"), 40);
  std::vector<std::vector<double>> rows(40, std::vector<double>(2));
  for (auto& row : rows) {
    row[0] = price(rng);
    row[1] = price(rng);
  }
  PricePanel base = testsup::make_prices(
      dates, {testsup::stock("A", "Technology"), testsup::stock("B", "Finance")}, rows);

  PricePanel scaled = base;
  for (size_t d = 0; d < scaled.n_dates(); ++d) scaled.at(d, 0) *= 37.25;

  ReturnPanel rb = compute_log_returns(base);
  ReturnPanel rs = compute_log_returns(scaled);
  for (size_t d = 0; d < rb.n_dates(); ++d) {
    CHECK(rs.at(d, 0) == doctest::Approx(rb.at(d, 0)).epsilon(1e-12));
    CHECK(rs.at(d, 1) == rb.at(d, 1));
  }
}

TEST_CASE("returns telescope to the window log ratio") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> step(-0.05, 0.05);
  auto dates = testsup::weekdays(D("2003-01-06"), 60);
  std::vector<std::vector<double>> rows;
  double p = 100.0;
  for (size_t d = 0; d < dates.size(); ++d) {
    rows.push_back({p});
    p *= std::exp(step(rng));
  }
  PricePanel panel = testsup::make_prices(dates, {testsup::stock("A", "Technology")}, rows);
  ReturnPanel r = compute_log_returns(panel);
  double sum = 0.0;
  for (size_t d = 0; d < r.n_dates(); ++d) sum += r.at(d, 0);
  double expected = std::log(panel.at(panel.n_dates() - 1, 0) / panel.at(0, 0));
  CHECK(sum == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("wide CSV round-trips a panel exactly") {
  auto dates = testsup::weekdays(D("2003-01-06"), 5);
  PricePanel p = testsup::make_prices(
      dates, {testsup::stock("A", "Technology"), testsup::stock("B", "Finance")},
      {{100.0, 50.125},
       {101.3333333333333, kMissing},
       {99.000000000000014, 51.5},
       {kMissing, 52.0},
       {100.0, 49.999999999999993}});
  TempDir dir("roundtrip");
  write_wide_csv(p, dir.file("p.csv"));
  PricePanel back = load_prices(dir.file("p.csv"), PriceFormat::Wide);
  REQUIRE(back.n_dates() == p.n_dates());
  REQUIRE(back.n_assets() == p.n_assets());
  for (size_t d = 0; d < p.n_dates(); ++d) {
    CHECK(back.dates[d] == p.dates[d]);
    for (size_t a = 0; a < p.n_assets(); ++a) {
      if (is_missing(p.at(d, a))) {
        CHECK(is_missing(back.at(d, a)));
      } else {
        CHECK(back.at(d, a) == p.at(d, a));
      }
    }
  }
}

TEST_CASE("sector map parses labels and enforces the minor hierarchy") {
  TempDir dir("sectors");
  write_file(dir.file("s.csv"),
             "asset_id,major,minor\n"
             "XOM,BasicMaterials,Oil\n"
             "AAPL,Technology,\n"
             "WTI,Index,\n");
  SectorMap map = load_sector_map(dir.file("s.csv"));
  REQUIRE(map.size() == 3);
  CHECK(map.at("XOM").sector == SectorLabel{SectorMajor::BasicMaterials, SectorMinor::Oil});
  CHECK(map.at("AAPL").sector == SectorLabel{SectorMajor::Technology, SectorMinor::None});
  CHECK(map.at("WTI").kind == AssetKind::Index);
  CHECK(!map.at("WTI").sector);

  write_file(dir.file("bad.csv"),
             "asset_id,major,minor\n"
             "AAPL,Technology,Oil\n");
  CHECK_THROWS_AS(load_sector_map(dir.file("bad.csv")), DataError);

  write_file(dir.file("unknown.csv"),
             "asset_id,major,minor\n"
             "AAPL,Tech,\n");
  CHECK_THROWS_AS(load_sector_map(dir.file("unknown.csv")), ParseError);

  write_file(dir.file("conflict.csv"),
             "asset_id,major,minor\n"
             "AAPL,Technology,\n"
             "AAPL,Finance,\n");
  CHECK_THROWS_AS(load_sector_map(dir.file("conflict.csv")), DataError);

  write_file(dir.file("empty.csv"), "");
  CHECK(load_sector_map(dir.file("empty.csv")).empty());  // warning only
}

TEST_CASE("applying the sector map requires full coverage") {
  TempDir dir("apply");
  write_file(dir.file("s.csv"),
             "asset_id,major,minor\n"
             "A,Finance,RealEstate\n");
  SectorMap map = load_sector_map(dir.file("s.csv"));
  std::vector<AssetRecord> assets{{"A", AssetKind::Stock, std::nullopt},
                                  {"B", AssetKind::Stock, std::nullopt}};
  CHECK_THROWS_AS(apply_sector_map(assets, map), DataError);
  assets.pop_back();
  apply_sector_map(assets, map);
  CHECK(assets[0].sector == SectorLabel::parse("Finance.RealEstate"));
}

TEST_CASE("exogenous series loads units and enforces ordering") {
  TempDir dir("exo");
  write_file(dir.file("libor.csv"),
             "#units: percent, annualized\n"
             "date,value\n"
             "2007-01-02,5.32\n"
             "2007-04-02,5.35\n");
  ExogenousSeries s = load_exogenous(dir.file("libor.csv"), "libor");
  CHECK(s.units == "percent, annualized");
  REQUIRE(s.dates.size() == 2);
  auto hit = s.at_or_after(D("2007-01-01"));
  REQUIRE(hit);
  CHECK(hit->first == D("2007-01-02"));
  CHECK(hit->second == 5.32);

  write_file(dir.file("bad.csv"),
             "date,value\n"
             "2007-04-02,5.35\n"
             "2007-01-02,5.32\n");
  CHECK_THROWS_AS(load_exogenous(dir.file("bad.csv"), "x"), DataError);
}

TEST_CASE("LIBOR spread follows the quarter-start formula") {
  ExogenousSeries libor{"libor", "pct", {D("2007-01-02"), D("2007-04-02")}, {5.0, 5.25}};
  ExogenousSeries ffr{"ffr", "pct", {D("2007-01-02"), D("2007-04-02")}, {5.0, 5.0}};

  ExogenousSeries spread =
      derive_libor_spread(libor, ffr, {D("2007-01-01"), D("2007-04-01")});
  REQUIRE(spread.values.size() == 2);
  CHECK(spread.values[0] == 0.0);
  CHECK(spread.values[1] == doctest::Approx(0.05).epsilon(1e-15));

  ExogenousSeries zero{"ffr", "pct", {D("2007-01-02")}, {0.0}};
  CHECK_THROWS_AS(derive_libor_spread(libor, zero, {D("2007-01-01")}), ComputeError);

  CHECK_THROWS_AS(derive_libor_spread(libor, ffr, {D("2009-01-01")}), DataError);
}
