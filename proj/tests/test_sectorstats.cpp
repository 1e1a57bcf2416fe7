#include <cmath>
#include <random>

#include "doctest.h"

#include "corrnet/errors.hpp"
#include "corrnet/sectorstats.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace corrnet;
using testsup::D;
using testsup::EdgeSpec;

namespace {

std::vector<AssetRecord> labeled(const std::string& prefix, const std::string& sector, size_t n) {
  std::vector<AssetRecord> out;
  for (size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "%s%02zu", prefix.c_str(), i);
    out.push_back(testsup::stock(id, sector));
  }
  return out;
}

std::vector<AssetRecord> concat(std::vector<AssetRecord> a, const std::vector<AssetRecord>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Within: 5 of 6 pairs linked; between: 1 of 9. The spec's worked Welch
// example (t ~ 3.606).
CorrelationNetwork merge_example_network() {
  auto nodes =
      concat(labeled("a", "Finance.RealEstate", 3), labeled("b", "Finance.OtherFinance", 3));
  std::vector<EdgeSpec> edges{
      {"a00", "a01", 0.9}, {"a00", "a02", 0.9}, {"a01", "a02", 0.9},
      {"b00", "b01", 0.9}, {"b00", "b02", 0.9},  // (b01,b02) unlinked
      {"a00", "b00", 0.8},
  };
  return testsup::make_network(nodes, edges);
}

}  // namespace

TEST_CASE("link density counts edges over designated defined pairs") {
  auto nodes = labeled("x", "Technology", 3);
  auto net = testsup::make_network(nodes, {{"x00", "x01", 0.5}, {"x01", "x02", 0.4}});
  std::vector<size_t> all{0, 1, 2};
  LinkDensity d = link_density(net, all, all);
  CHECK(d.n_pairs == 3);
  CHECK(*d.density == doctest::Approx(2.0 / 3.0));

  auto complete = testsup::make_network(
      nodes, {{"x00", "x01", 0.5}, {"x01", "x02", 0.4}, {"x00", "x02", 0.3}});
  CHECK(*link_density(complete, all, all).density == 1.0);

  // No designated defined pairs: flagged undefined, not silent zero.
  auto sparse = testsup::make_network(nodes, {}, {{"x00", "x01"}});
  std::vector<size_t> a{0}, c{2};
  LinkDensity undef = link_density(sparse, a, c);
  CHECK(!undef.density);
  CHECK(undef.n_pairs == 0);
}

TEST_CASE("merge t-statistic reproduces the worked example") {
  auto net = merge_example_network();
  MergeTestResult r = merge_tstat(net, SectorLabel::parse("Finance.RealEstate"),
                                  SectorLabel::parse("Finance.OtherFinance"), 0.05);
  REQUIRE(r.t);
  CHECK(*r.t == doctest::Approx(3.60555127546399).epsilon(1e-9));
  CHECK(*r.p_one_sided == doctest::Approx(0.002707468571357336).epsilon(1e-9));
  CHECK(r.n_within == 6);
  CHECK(r.n_between == 9);
  CHECK(*r.density_within == doctest::Approx(5.0 / 6.0));
  CHECK(*r.density_between == doctest::Approx(1.0 / 9.0));
  CHECK(!r.merged);  // p ~ 0.0027 < 0.05
  CHECK(!r.degenerate);

  // Swapping the roles leaves the statistic unchanged.
  MergeTestResult swapped = merge_tstat(net, SectorLabel::parse("Finance.OtherFinance"),
                                        SectorLabel::parse("Finance.RealEstate"), 0.05);
  CHECK(*swapped.t == *r.t);
  CHECK(*swapped.p_one_sided == *r.p_one_sided);
}

TEST_CASE("equal densities give t = 0 and merged") {
  auto nodes = concat(labeled("a", "Technology", 3), labeled("b", "Finance", 3));
  // Within: 3 of 6; between: 4 of 9 (close enough that t < 0 -> merged) is
  // hard to make exactly equal; use 3/6 vs 4.5/9 impossible, so take equal
  // rates 1/2 within, between 4/8 by leaving one between pair undefined.
  std::vector<std::pair<std::string, std::string>> defined;
  for (auto& x : std::vector<std::pair<std::string, std::string>>{
           {"a00", "a01"}, {"a00", "a02"}, {"a01", "a02"},
           {"b00", "b01"}, {"b00", "b02"}, {"b01", "b02"}})
    defined.push_back(x);
  int skip = 0;
  for (const auto& a : {"a00", "a01", "a02"}) {
    for (const auto& b : {"b00", "b01", "b02"}) {
      if (std::string(a) == "a02" && std::string(b) == "b02" && ++skip) continue;
      defined.push_back({a, b});
    }
  }
  std::vector<EdgeSpec> edges{
      {"a00", "a01", 0.9}, {"a01", "a02", 0.9}, {"b00", "b01", 0.9},  // 3 of 6 within
      {"a00", "b00", 0.8}, {"a00", "b01", 0.8}, {"a01", "b00", 0.8}, {"a01", "b01", 0.8},
  };
  auto net = testsup::make_network(concat(labeled("a", "Technology", 3),
                                          labeled("b", "Finance", 3)),
                                   edges, defined);
  MergeTestResult r =
      merge_tstat(net, SectorLabel::parse("Technology"), SectorLabel::parse("Finance"), 0.05);
  REQUIRE(r.t);
  CHECK(r.n_between == 8);
  CHECK(*r.t == 0.0);
  CHECK(r.merged);
}

TEST_CASE("zero-variance samples flag degeneracy and compare densities") {
  // All within linked, no between linked.
  auto nodes = concat(labeled("a", "Technology", 3), labeled("b", "Finance", 3));
  std::vector<EdgeSpec> edges{{"a00", "a01", 0.9}, {"a00", "a02", 0.9}, {"a01", "a02", 0.9},
                              {"b00", "b01", 0.9}, {"b00", "b02", 0.9}, {"b01", "b02", 0.9}};
  auto net = testsup::make_network(nodes, edges);
  MergeTestResult r =
      merge_tstat(net, SectorLabel::parse("Technology"), SectorLabel::parse("Finance"), 0.05);
  CHECK(r.degenerate);
  CHECK(!r.t);
  CHECK(!r.merged);  // within 1.0 > between 0.0: clusters are separate

  // Identical degenerate densities classify as merged.
  auto all_linked = testsup::make_network(
      nodes, {{"a00", "a01", 0.9}, {"a00", "a02", 0.9}, {"a01", "a02", 0.9},
              {"b00", "b01", 0.9}, {"b00", "b02", 0.9}, {"b01", "b02", 0.9},
              {"a00", "b00", 0.9}, {"a00", "b01", 0.9}, {"a00", "b02", 0.9},
              {"a01", "b00", 0.9}, {"a01", "b01", 0.9}, {"a01", "b02", 0.9},
              {"a02", "b00", 0.9}, {"a02", "b01", 0.9}, {"a02", "b02", 0.9}});
  MergeTestResult full = merge_tstat(all_linked, SectorLabel::parse("Technology"),
                                     SectorLabel::parse("Finance"), 0.05);
  CHECK(full.degenerate);
  CHECK(full.merged);
}

TEST_CASE("merge test preconditions") {
  auto net = merge_example_network();
  CHECK_THROWS_AS(merge_tstat(net, SectorLabel::parse("Technology"),
                              SectorLabel::parse("Finance.RealEstate"), 0.05),
                  ArgumentError);  // Technology has no members
  CHECK_THROWS_AS(merge_tstat(net, SectorLabel::parse("Finance"),
                              SectorLabel::parse("Finance.RealEstate"), 0.05),
                  ArgumentError);  // groups overlap
}

TEST_CASE("welch proportion test agrees with the scratch implementation") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<size_t> n_dist(2, 120);
  std::uniform_real_distribution<double> rate(0.05, 0.95);

  size_t compared = 0;
  for (int trial = 0; trial < 500; ++trial) {
    size_t n1 = n_dist(rng), n2 = n_dist(rng);
    std::binomial_distribution<size_t> b1(n1, rate(rng)), b2(n2, rate(rng));
    size_t k1 = b1(rng), k2 = b2(rng);

    WelchProportionResult r = welch_proportion_test(k1, n1, k2, n2);
    bool var1_zero = (k1 == 0 || k1 == n1);
    bool var2_zero = (k2 == 0 || k2 == n2);
    if (var1_zero && var2_zero) {
      CHECK(r.degenerate);
      continue;
    }
    REQUIRE(r.t);
    oracle::WelchOut expect = oracle::welch_proportions(k1, n1, k2, n2);
    CHECK(*r.t == doctest::Approx(expect.t).epsilon(1e-12));
    CHECK(r.dof == doctest::Approx(expect.dof).epsilon(1e-12));
    CHECK(std::fabs(*r.p_one_sided - expect.p_one_sided) < 1e-9);
    ++compared;
  }
  CHECK(compared > 400);
}

TEST_CASE("self-clustering takes the minimum over other sectors") {
  // A strongly (not fully) intra-linked, B moderately linked to A, C not
  // at all.
  auto nodes = concat(concat(labeled("a", "Technology", 4), labeled("b", "Finance", 4)),
                      labeled("c", "BasicMaterials", 4));
  std::vector<EdgeSpec> edges;
  for (auto [x, y] : std::vector<std::pair<const char*, const char*>>{
           {"a00", "a01"}, {"a00", "a02"}, {"a00", "a03"}, {"a01", "a02"}, {"a01", "a03"}})
    edges.push_back({x, y, 0.9});
  edges.push_back({"a00", "b00", 0.8});
  edges.push_back({"a01", "b01", 0.8});
  edges.push_back({"a02", "b02", 0.8});
  auto net = testsup::make_network(nodes, edges);

  std::vector<SectorLabel> others{SectorLabel::parse("Finance"),
                                  SectorLabel::parse("BasicMaterials")};
  SelfClusterResult r = self_clustering(net, SectorLabel::parse("Technology"), others);
  REQUIRE(r.t_min);
  REQUIRE(r.per_sector_t.size() == 2);
  CHECK(r.argmin_sector == SectorLabel::parse("Finance"));  // the more-linked sector
  CHECK(*r.t_min > 0.0);
  for (const auto& [sector, t] : r.per_sector_t) {
    REQUIRE(t);
    CHECK(*r.t_min <= *t);
  }

  // Singleton: the minimum is the single statistic.
  std::vector<SectorLabel> one{SectorLabel::parse("Finance")};
  SelfClusterResult s = self_clustering(net, SectorLabel::parse("Technology"), one);
  REQUIRE(s.t_min);
  CHECK(*s.t_min == *s.per_sector_t[0].second);
  CHECK(s.argmin_sector == SectorLabel::parse("Finance"));
}

TEST_CASE("self-clustering excludes undefined statistics from the minimum") {
  // C's pairs with A are all undefined, so its t is excluded.
  auto nodes = concat(concat(labeled("a", "Technology", 3), labeled("b", "Finance", 3)),
                      labeled("c", "BasicMaterials", 2));
  std::vector<std::pair<std::string, std::string>> defined;
  for (const auto& x : {"a00", "a01", "a02"})
    for (const auto& y : {"a00", "a01", "a02"})
      if (std::string(x) < y) defined.push_back({x, y});
  for (const auto& x : {"a00", "a01", "a02"})
    for (const auto& y : {"b00", "b01", "b02"}) defined.push_back({x, y});
  std::vector<EdgeSpec> edges{{"a00", "a01", 0.9}, {"a00", "a02", 0.9}, {"a01", "b00", 0.8}};
  auto net = testsup::make_network(nodes, edges, defined);

  std::vector<SectorLabel> others{SectorLabel::parse("Finance"),
                                  SectorLabel::parse("BasicMaterials")};
  SelfClusterResult r = self_clustering(net, SectorLabel::parse("Technology"), others);
  CHECK(r.any_excluded);
  REQUIRE(r.t_min);
  CHECK(r.argmin_sector == SectorLabel::parse("Finance"));

  std::vector<SectorLabel> only_c{SectorLabel::parse("BasicMaterials")};
  SelfClusterResult undef = self_clustering(net, SectorLabel::parse("Technology"), only_c);
  CHECK(!undef.t_min);
  CHECK(undef.any_excluded);
}

namespace {

// Index + 16-member sector + 16 fillers: 33 nodes, 528 pairs, so 33 edges
// put the global density at exactly 1/16 = 0.0625.
CorrelationNetwork index_example_network(size_t linked_members, size_t extra_filler_edges) {
  auto nodes = concat(concat(std::vector<AssetRecord>{testsup::index_node("IDX")},
                             labeled("s", "Technology", 16)),
                      labeled("f", "Finance", 16));
  std::vector<EdgeSpec> edges;
  for (size_t i = 0; i < linked_members; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "s%02d", int(i));
    edges.push_back({"IDX", id, 0.9});
  }
  size_t added = 0;
  for (size_t i = 0; i < 16 && added < extra_filler_edges; ++i) {
    for (size_t j = i + 1; j < 16 && added < extra_filler_edges; ++j, ++added) {
      char a[16], b[16];
      std::snprintf(a, sizeof(a), "f%02d", int(i));
      std::snprintf(b, sizeof(b), "f%02d", int(j));
      edges.push_back({a, b, 0.9});
    }
  }
  return testsup::make_network(nodes, edges);
}

}  // namespace

TEST_CASE("index linkage reproduces the worked example") {
  CorrelationNetwork net = index_example_network(8, 25);  // 33 edges total
  CHECK(net.global_density() == doctest::Approx(0.0625));
  IndexLinkResult r = index_linkage(net, "IDX", SectorLabel::parse("Technology"));
  REQUIRE(r.t);
  CHECK(r.n == 16);
  CHECK(r.p_hat == 0.5);
  CHECK(*r.t == doctest::Approx(3.38886042793149).epsilon(1e-9));
  CHECK(r.status == LinkStatus::Indeterminate);  // 2 <= t <= 4
}

TEST_CASE("index linkage classifications by construction") {
  // 16 of 16 linked: zero variance, p_hat > p0 -> Linked with flag.
  CorrelationNetwork all = index_example_network(16, 17);
  IndexLinkResult linked = index_linkage(all, "IDX", SectorLabel::parse("Technology"));
  CHECK(linked.degenerate);
  CHECK(linked.status == LinkStatus::Linked);

  // 1 of 16 linked with p0 = p_hat: t = 0 -> Unlinked.
  CorrelationNetwork low = index_example_network(1, 32);
  IndexLinkResult unlinked = index_linkage(low, "IDX", SectorLabel::parse("Technology"));
  REQUIRE(unlinked.t);
  CHECK(*unlinked.t == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(unlinked.status == LinkStatus::Unlinked);

  // 0 of 16 linked: degenerate, p_hat < p0 -> Unlinked with flag.
  CorrelationNetwork none = index_example_network(0, 33);
  IndexLinkResult zero = index_linkage(none, "IDX", SectorLabel::parse("Technology"));
  CHECK(zero.degenerate);
  CHECK(zero.status == LinkStatus::Unlinked);

  CHECK_THROWS_AS(index_linkage(all, "NOPE", SectorLabel::parse("Technology")), ArgumentError);
  CHECK_THROWS_AS(index_linkage(all, "IDX", SectorLabel::parse("BasicMaterials")), ArgumentError);
}

TEST_CASE("trend test: exact line, constant series, frozen OLS example") {
  std::vector<double> line{1.0, 2.0, 3.0, 4.0};
  TrendTestResult r = slope_trend_test(line, "line");
  CHECK(r.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.degenerate_fit);
  CHECK(r.p == kPValueFloor);

  std::vector<double> flat{2.0, 2.0, 2.0};
  TrendTestResult c = slope_trend_test(flat, "flat");
  CHECK(c.slope == 0.0);
  CHECK(c.p == 1.0);

  std::vector<double> zigzag{0.0, 1.0, 0.0, 1.0};
  TrendTestResult z = slope_trend_test(zigzag, "zigzag");
  oracle::OlsOut expect = oracle::ols_line(zigzag);
  CHECK(z.slope == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(z.t_slope == doctest::Approx(0.7071067811865476).epsilon(1e-12));
  CHECK(z.p == doctest::Approx(0.552786404500042).epsilon(1e-10));
  CHECK(z.slope == doctest::Approx(expect.slope).epsilon(1e-15));
  CHECK(z.p == doctest::Approx(expect.p_two_sided).epsilon(1e-10));

  CHECK_THROWS_AS(slope_trend_test(std::vector<double>{1.0, 2.0}, "short"), ArgumentError);
}

TEST_CASE("trend test agrees with the closed-form oracle on random series") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<size_t> n_dist(3, 40);
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = n_dist(rng);
    std::vector<double> series(n);
    for (double& v : series) v = 0.3 * noise(rng);
    TrendTestResult r = slope_trend_test(series, "s");
    if (r.degenerate_fit) continue;
    oracle::OlsOut expect = oracle::ols_line(series);
    CHECK(r.slope == doctest::Approx(expect.slope).epsilon(1e-11));
    CHECK(r.t_slope == doctest::Approx(expect.t).epsilon(1e-9));
    CHECK(std::fabs(r.p - expect.p_two_sided) < 1e-9);
  }
}

TEST_CASE("sign-change test detects a significant flip") {
  std::vector<Date> quarters;
  std::vector<double> values;
  for (int q = 0; q < 4; ++q) {
    quarters.push_back(Date::from_ymd(2007, 1 + 3 * q, 1));
    values.push_back(1.0 + 0.01 * q);
  }
  for (int q = 0; q < 4; ++q) {
    quarters.push_back(Date::from_ymd(2008, 1 + 3 * q, 1));
    values.push_back(-1.0 - 0.01 * q);
  }

  SignChangeResult r = sign_change_test(quarters, values, 2008);
  CHECK(r.changed);
  CHECK(r.p_sign < 1e-4);

  // Same sign in the year: no change.
  std::vector<double> same = values;
  for (size_t i = 4; i < 8; ++i) same[i] = 1.0 + 0.01 * double(i);
  SignChangeResult rs = sign_change_test(quarters, same, 2008);
  CHECK(!rs.changed);

  // Straddling zero with mean ~ 0: insignificant, no change.
  std::vector<double> straddle = values;
  straddle[4] = 0.5;
  straddle[5] = -0.5;
  straddle[6] = 0.4;
  straddle[7] = -0.4;
  SignChangeResult rz = sign_change_test(quarters, straddle, 2008);
  CHECK(!rz.changed);

  CHECK_THROWS_AS(sign_change_test(std::vector<Date>(quarters.begin(), quarters.begin() + 5),
                                   std::vector<double>(values.begin(), values.begin() + 5), 2008),
                  ArgumentError);
}

TEST_CASE("decline coincidence separates constructed decline/rise correlations") {
  std::mt19937_64 rng(303);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<double> corr, ret;
  for (int q = 0; q < 8; ++q) {
    corr.push_back(0.5 + noise(rng));
    ret.push_back(-0.05);
    corr.push_back(0.1 + noise(rng));
    ret.push_back(0.05);
  }
  DeclineTestResult r = decline_coincidence_test(corr, ret);
  REQUIRE(r.t);
  CHECK(r.n_decline == 8);
  CHECK(r.n_rise == 8);
  CHECK(r.p_one_sided < 0.01);
  CHECK(r.mean_decline > r.mean_rise);

  // Matches the scratch Welch implementation.
  std::vector<double> d(corr.begin(), corr.end()), rise;
  d.clear();
  for (size_t i = 0; i < corr.size(); ++i) (ret[i] < 0 ? d : rise).push_back(corr[i]);
  oracle::WelchOut expect = oracle::welch_means(d, rise);
  CHECK(*r.t == doctest::Approx(expect.t).epsilon(1e-12));
  CHECK(std::fabs(r.p_one_sided - expect.p_one_sided) < 1e-9);

  try {
    std::vector<double> few_declines{0.5, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
    std::vector<double> signs{-0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
    decline_coincidence_test(few_declines, signs);
    FAIL("expected ArgumentError");
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("decline") != std::string::npos);
  }
}

TEST_CASE("null decline data gives unremarkable p values") {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> noise(0.3, 0.05);
  double sum_p = 0.0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<double> corr, ret;
    for (int q = 0; q < 16; ++q) {
      corr.push_back(noise(rng));
      ret.push_back(q % 2 == 0 ? -0.05 : 0.05);
    }
    sum_p += decline_coincidence_test(corr, ret).p_one_sided;
  }
  double mean_p = sum_p / trials;
  CHECK(mean_p > 0.4);
  CHECK(mean_p < 0.6);
}

TEST_CASE("p-value floor survives extreme statistics") {
  CHECK(student_t_sf(1000.0, 10.0) >= kPValueFloor);
  CHECK(student_t_sf(1000.0, 10.0) <= 1e-20);
  CHECK(student_t_sf(-5.0, 10.0) > 0.99);
}
