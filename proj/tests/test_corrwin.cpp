#include <random>

#include "doctest.h"

#include "corrnet/corrwin.hpp"
#include "corrnet/errors.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace corrnet;
using testsup::D;
using testsup::TempDir;

TEST_CASE("rolling window enumeration matches the quarterly-shift count") {
  WindowSpec spec;
  spec.start = D("1985-01-01");
  spec.end = D("2008-01-01");
  spec.length_months = 12;
  spec.shift_months = 3;
  spec.mode = WindowMode::Rolling;

  auto windows = enumerate_windows(spec);
  REQUIRE(windows.size() == 93);  // (2008-1985)*4 + 1
  CHECK(windows.front().start == D("1985-01-01"));
  CHECK(windows.front().end == D("1986-01-01"));
  CHECK(windows.back().start == D("2008-01-01"));
  CHECK(windows.back().end == D("2009-01-01"));
}

TEST_CASE("calendar-year mode yields one window per intersecting year") {
  WindowSpec spec;
  spec.start = D("2003-01-01");
  spec.end = D("2008-12-31");
  spec.mode = WindowMode::CalendarYear;
  auto windows = enumerate_windows(spec);
  REQUIRE(windows.size() == 6);
  CHECK(windows[0].start == D("2003-01-01"));
  CHECK(windows[5].end == D("2009-01-01"));
}

TEST_CASE("degenerate rolling ranges") {
  WindowSpec spec;
  spec.start = D("2003-01-01");
  spec.end = D("2003-01-01");
  spec.mode = WindowMode::Rolling;
  CHECK(enumerate_windows(spec).size() == 1);

  spec.end = D("2002-12-31");
  CHECK_THROWS_AS(enumerate_windows(spec), ArgumentError);
}

namespace {

ReturnPanel three_day_panel() {
  auto dates = testsup::weekdays(D("2003-01-06"), 3);
  return testsup::make_returns(
      dates, {testsup::stock("A", "Technology"), testsup::stock("B", "Finance")},
      {{0.01, 0.01}, {-0.08, -0.08}, {0.02, 0.02}});
}

DateWindow whole(const ReturnPanel& p) {
  return {p.dates.front(), p.dates.back().next_day()};
}

}  // namespace

TEST_CASE("trimming removes the largest absolute cross-sectional means") {
  ReturnPanel p = three_day_panel();

  auto none = trim_extreme_days(p, whole(p), 0);
  CHECK(none.omitted.empty());
  CHECK(none.panel.n_dates() == 3);

  auto one = trim_extreme_days(p, whole(p), 1);
  REQUIRE(one.omitted.size() == 1);
  CHECK(one.omitted[0] == p.dates[1]);  // the -0.08 day
  CHECK(one.panel.n_dates() == 2);
  CHECK(one.panel.dates[0] == p.dates[0]);
  CHECK(one.panel.dates[1] == p.dates[2]);

  CHECK_THROWS_AS(trim_extreme_days(p, whole(p), 3), ArgumentError);
}

TEST_CASE("trim ties remove the earlier date first") {
  auto dates = testsup::weekdays(D("2003-01-06"), 3);
  ReturnPanel p = testsup::make_returns(dates, {testsup::stock("A", "Technology")},
                                        {{0.05}, {0.01}, {-0.05}});
  auto t = trim_extreme_days(p, whole(p), 1);
  REQUIRE(t.omitted.size() == 1);
  CHECK(t.omitted[0] == dates[0]);
}

TEST_CASE("pearson: exact linear dependence and anticorrelation") {
  auto dates = testsup::weekdays(D("2003-01-06"), 4);
  std::vector<double> x{0.01, -0.02, 0.03, 0.00};
  std::vector<std::vector<double>> rows;
  for (double v : x) rows.push_back({v, 2.0 * v + 1.0, -v});
  ReturnPanel p = testsup::make_returns(dates,
                                        {testsup::stock("X", "Technology"),
                                         testsup::stock("Y", "Technology"),
                                         testsup::stock("Z", "Technology")},
                                        rows);
  CorrelationMatrix m = pearson_matrix(p, whole(p), 0, 2);
  CHECK(m.rho_at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.rho_at(0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(m.rho_at(0, 0) == 1.0);
  CHECK(m.obs_at(0, 1) == 4);
}

TEST_CASE("pearson matches the frozen textbook example") {
  auto dates = testsup::weekdays(D("2003-01-06"), 4);
  ReturnPanel p = testsup::make_returns(
      dates, {testsup::stock("X", "Technology"), testsup::stock("Y", "Finance")},
      {{0.01, 0.02}, {-0.02, 0.01}, {0.03, -0.01}, {0.00, 0.03}});
  CorrelationMatrix m = pearson_matrix(p, whole(p), 0, 2);
  // Independent evaluation of the covariance / sd-product formula.
  CHECK(m.rho_at(0, 1) == doctest::Approx(-0.5156879540323449).epsilon(1e-12));
  CHECK(m.rho_at(1, 0) == m.rho_at(0, 1));
}

TEST_CASE("pearson equals the brute-force formula on random gap-free panels") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> n_assets_dist(2, 8);
  std::uniform_int_distribution<int> n_dates_dist(5, 30);
  std::normal_distribution<double> ret(0.0, 0.02);

  for (int trial = 0; trial < 25; ++trial) {
    int na = n_assets_dist(rng);
    int nd = n_dates_dist(rng);
    auto dates = testsup::weekdays(D("2003-01-06"), size_t(nd));
    std::vector<AssetRecord> assets;
    for (int a = 0; a < na; ++a) {
      assets.push_back(testsup::stock("A" + std::to_string(a), "Technology"));
    }
    std::vector<std::vector<double>> rows(nd, std::vector<double>(na));
    for (auto& row : rows)
      for (double& v : row) v = ret(rng);
    ReturnPanel p = testsup::make_returns(dates, assets, rows);
    CorrelationMatrix m = pearson_matrix(p, whole(p), 0, 2);

    for (int i = 0; i < na; ++i) {
      for (int j = i + 1; j < na; ++j) {
        std::vector<double> xi, xj;
        for (int d = 0; d < nd; ++d) {
          xi.push_back(p.at(d, i));
          xj.push_back(p.at(d, j));
        }
        CHECK(m.rho_at(i, j) == doctest::Approx(oracle::pearson(xi, xj)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("pearson undefined cases: overlap, short series, zero variance") {
  auto dates = testsup::weekdays(D("2003-01-06"), 6);
  ReturnPanel p = testsup::make_returns(
      dates,
      {testsup::stock("A", "Technology"), testsup::stock("B", "Finance"),
       testsup::stock("C", "Finance")},
      {{0.01, kMissing, 0.00},
       {0.02, kMissing, 0.00},
       {-0.01, kMissing, 0.00},
       {0.00, kMissing, 0.00},
       {0.03, kMissing, 0.00},
       {0.01, 0.02, 0.00}});

  CorrelationMatrix m = pearson_matrix(p, whole(p), 0, 2);
  CHECK(!m.defined(0, 1));        // 1 joint observation
  CHECK(m.obs_at(0, 1) == 1);
  CHECK(!m.defined(1, 1));        // fewer than 2 observations
  CHECK(!m.defined(0, 2));        // zero variance in C
  CHECK(m.rho_at(2, 2) == 1.0);   // diagonal holds regardless of variance

  CorrelationMatrix strict = pearson_matrix(p, whole(p), 0, 100);
  CHECK(!strict.defined(0, 2));   // min_overlap dominates
}

TEST_CASE("asset permutation permutes the matrix consistently") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> ret(0.0, 0.02);
  auto dates = testsup::weekdays(D("2003-01-06"), 20);
  std::vector<AssetRecord> assets{testsup::stock("A", "Technology"),
                                  testsup::stock("B", "Finance"),
                                  testsup::stock("C", "BasicMaterials.Oil")};
  std::vector<std::vector<double>> rows(20, std::vector<double>(3));
  for (auto& row : rows)
    for (double& v : row) v = ret(rng);
  ReturnPanel p = testsup::make_returns(dates, assets, rows);

  ReturnPanel q;
  q.dates = p.dates;
  q.assets = {assets[2], assets[0], assets[1]};
  for (size_t d = 0; d < p.n_dates(); ++d) {
    q.values.push_back(p.at(d, 2));
    q.values.push_back(p.at(d, 0));
    q.values.push_back(p.at(d, 1));
  }

  CorrelationMatrix mp = pearson_matrix(p, whole(p), 0, 2);
  CorrelationMatrix mq = pearson_matrix(q, whole(q), 0, 2);
  size_t perm[3] = {2, 0, 1};  // q column i is p column perm[i]
  for (size_t i = 0; i < 3; ++i) {
    for (size_t j = 0; j < 3; ++j) {
      CHECK(mq.rho_at(i, j) == doctest::Approx(mp.rho_at(perm[i], perm[j])).epsilon(1e-15));
    }
  }
}

TEST_CASE("block averages over within and cross groups") {
  auto dates = testsup::weekdays(D("2003-01-06"), 30);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> ret(0.0, 0.02);
  std::vector<std::vector<double>> rows(30, std::vector<double>(3));
  for (auto& row : rows)
    for (double& v : row) v = ret(rng);
  ReturnPanel p = testsup::make_returns(dates,
                                        {testsup::stock("a", "Technology"),
                                         testsup::stock("b", "Finance"),
                                         testsup::stock("c", "Finance")},
                                        rows);
  CorrelationMatrix m = pearson_matrix(p, whole(p), 0, 2);

  std::vector<size_t> a{0}, bc{1, 2}, b{1};
  BlockAverage cross = average_block_correlation(m, a, bc);
  CHECK(cross.n_defined == 2);
  CHECK(*cross.mean ==
        doctest::Approx((m.rho_at(0, 1) + m.rho_at(0, 2)) / 2.0).epsilon(1e-15));

  BlockAverage pairw = average_block_correlation(m, bc, bc);
  CHECK(pairw.n_defined == 1);
  CHECK(*pairw.mean == m.rho_at(1, 2));

  BlockAverage degenerate = average_block_correlation(m, a, a);
  CHECK(!degenerate.mean);
  CHECK(degenerate.n_defined == 0);
}

TEST_CASE("correlation cache round-trips exactly") {
  auto dates = testsup::weekdays(D("2003-01-06"), 25);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> ret(0.0, 0.02);
  std::vector<std::vector<double>> rows(25, std::vector<double>(3));
  for (auto& row : rows)
    for (double& v : row) v = ret(rng);
  rows[4][1] = kMissing;
  ReturnPanel p = testsup::make_returns(dates,
                                        {testsup::stock("A", "Technology"),
                                         testsup::stock("B", "Finance"),
                                         testsup::stock("IDX", "Technology")},
                                        rows);
  p.assets[2] = testsup::index_node("IDX");

  CorrelationMatrix m = pearson_matrix(p, whole(p), 2, 2);
  TempDir dir("cache");
  std::string path = dir.file(corr_cache_name(m.window, m.trim_k, m.min_overlap));
  write_corr_cache(m, path);
  CorrelationMatrix back = read_corr_cache(path);

  CHECK(back.window == m.window);
  CHECK(back.trim_k == m.trim_k);
  CHECK(back.min_overlap == m.min_overlap);
  CHECK(back.trimmed_days == m.trimmed_days);
  REQUIRE(back.n_assets() == m.n_assets());
  for (size_t i = 0; i < m.n_assets(); ++i) {
    CHECK(back.assets[i].id == m.assets[i].id);
    CHECK(back.assets[i].kind == m.assets[i].kind);
    CHECK(back.assets[i].sector == m.assets[i].sector);
    for (size_t j = 0; j < m.n_assets(); ++j) {
      CHECK(back.obs_at(i, j) == m.obs_at(i, j));
      if (m.defined(i, j)) {
        CHECK(back.rho_at(i, j) == m.rho_at(i, j));  // bit-exact
      } else {
        CHECK(!back.defined(i, j));
      }
    }
  }

  testsup::write_file(dir.file("junk.bin"), "not a cache");
  CHECK_THROWS_AS(read_corr_cache(dir.file("junk.bin")), DataError);
}
