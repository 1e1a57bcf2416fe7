// Exercises the shared library through the public C surface only.
#include <cstring>
#include <string>

#include "doctest.h"

#include "corrnet/corrnet.h"
#include "test_support.hpp"

using testsup::TempDir;

namespace {

struct PanelGuard {
  corrnet_panel* p = nullptr;
  ~PanelGuard() { corrnet_panel_free(p); }
};
struct CorrGuard {
  corrnet_corr* c = nullptr;
  ~CorrGuard() { corrnet_corr_free(c); }
};
struct NetGuard {
  corrnet_network* n = nullptr;
  ~NetGuard() { corrnet_network_free(n); }
};

constexpr const char* kSpec =
    "seed = 31\n"
    "dates = 260\n"
    "start_date = 2003-01-01\n"
    "beta_market = 0.15\n"
    "sigma_idio = 1.0\n"
    "sector = Finance.RealEstate:5:1.2\n"
    "sector = Technology:5:1.2\n";

}  // namespace

TEST_CASE("C API: version and error message plumbing") {
  CHECK(std::string(corrnet_version()) == "0.1.0");

  corrnet_panel* panel = nullptr;
  corrnet_status st = corrnet_panel_load_prices("/does/not/exist.csv", "wide", &panel);
  CHECK(st == CORRNET_ERR_IO);
  CHECK(std::strlen(corrnet_errmsg()) > 0);
  CHECK(std::string(corrnet_errmsg()).find("exist.csv") != std::string::npos);

  st = corrnet_panel_load_prices("x.csv", "sideways", &panel);
  CHECK(st == CORRNET_ERR_ARGUMENT);
}

TEST_CASE("C API: panel loading, returns, correlation, network, stats") {
  TempDir dir("capi");
  testsup::write_file(dir.file("prices.csv"),
                      "date,A,B,C\n"
                      "2003-01-02,100,50,20\n"
                      "2003-01-03,101,51,19\n"
                      "2003-01-06,103,52,21\n"
                      "2003-01-07,102,53,22\n"
                      "2003-01-08,105,54,21\n");
  testsup::write_file(dir.file("sectors.csv"),
                      "asset_id,major,minor\n"
                      "A,Technology,\n"
                      "B,Technology,\n"
                      "C,Finance,OtherFinance\n");

  PanelGuard prices;
  REQUIRE(corrnet_panel_load_prices(dir.file("prices.csv").c_str(), "wide", &prices.p) ==
          CORRNET_OK);
  CHECK(corrnet_panel_n_dates(prices.p) == 5);
  CHECK(corrnet_panel_n_assets(prices.p) == 3);

  char buf[32];
  REQUIRE(corrnet_panel_date(prices.p, 0, buf, sizeof(buf)) == CORRNET_OK);
  CHECK(std::string(buf) == "2003-01-02");
  REQUIRE(corrnet_panel_asset_id(prices.p, 2, buf, sizeof(buf)) == CORRNET_OK);
  CHECK(std::string(buf) == "C");

  REQUIRE(corrnet_panel_apply_sector_map(prices.p, dir.file("sectors.csv").c_str()) ==
          CORRNET_OK);

  PanelGuard returns;
  REQUIRE(corrnet_panel_log_returns(prices.p, &returns.p) == CORRNET_OK);
  CHECK(corrnet_panel_n_dates(returns.p) == 4);
  double v = 0.0;
  REQUIRE(corrnet_panel_value(returns.p, 0, 0, &v) == 1);
  CHECK(v == doctest::Approx(std::log(101.0 / 100.0)).epsilon(1e-12));

  CorrGuard corr;
  REQUIRE(corrnet_corr_compute(returns.p, "2003-01-01", "2003-02-01", 0, 2, &corr.c) ==
          CORRNET_OK);
  CHECK(corrnet_corr_n_assets(corr.c) == 3);
  REQUIRE(corrnet_corr_rho(corr.c, 0, 1, &v) == 1);
  CHECK(v >= -1.0);
  CHECK(v <= 1.0);
  CHECK(corrnet_corr_n_obs(corr.c, 0, 1) == 4);

  // Cache round-trip through the C surface.
  REQUIRE(corrnet_corr_cache_write(corr.c, dir.file("c.bin").c_str()) == CORRNET_OK);
  CorrGuard corr2;
  REQUIRE(corrnet_corr_cache_read(dir.file("c.bin").c_str(), &corr2.c) == CORRNET_OK);
  double v2 = 0.0;
  REQUIRE(corrnet_corr_rho(corr2.c, 0, 1, &v2) == 1);
  CHECK(v2 == v);

  NetGuard net;
  REQUIRE(corrnet_network_build(corr.c, 1.0, &net.n) == CORRNET_OK);
  CHECK(corrnet_network_n_nodes(net.n) == 3);
  CHECK(corrnet_network_n_edges(net.n) == 3);
  CHECK(corrnet_network_density(net.n) == 1.0);
  CHECK(corrnet_network_global_density(net.n) == 1.0);

  char ida[16], idb[16];
  double rho = 0.0;
  REQUIRE(corrnet_network_edge(net.n, 0, ida, sizeof(ida), idb, sizeof(idb), &rho) == CORRNET_OK);
  CHECK(std::string(ida) < std::string(idb));

  REQUIRE(corrnet_network_export(net.n, "graphml", dir.file("n.graphml").c_str()) == CORRNET_OK);
  CHECK(testsup::read_file(dir.file("n.graphml")).find("sector_minor") != std::string::npos);
  CHECK(corrnet_network_export(net.n, "nope", dir.file("x").c_str()) == CORRNET_ERR_ARGUMENT);
}

TEST_CASE("C API: sector statistics on a synthetic network") {
  TempDir dir("capi_stats");
  testsup::write_file(dir.file("spec.kv"), kSpec);

  PanelGuard returns;
  REQUIRE(corrnet_synth_generate(dir.file("spec.kv").c_str(), -1, &returns.p) == CORRNET_OK);
  CHECK(corrnet_panel_n_dates(returns.p) == 260);
  CHECK(corrnet_panel_n_assets(returns.p) == 10);

  CorrGuard corr;
  REQUIRE(corrnet_corr_compute(returns.p, "2003-01-01", "2004-02-01", 0, 30, &corr.c) ==
          CORRNET_OK);
  NetGuard net;
  REQUIRE(corrnet_network_build(corr.c, 0.25, &net.n) == CORRNET_OK);

  corrnet_merge_result merge;
  REQUIRE(corrnet_merge_tstat(net.n, "Finance.RealEstate", "Technology", 0.05, &merge) ==
          CORRNET_OK);
  CHECK(merge.n_within == 20);
  CHECK(merge.n_between == 25);
  if (merge.has_t) CHECK(merge.t > 0.0);

  corrnet_self_cluster_result self_res;
  REQUIRE(corrnet_self_clustering(net.n, "Finance.RealEstate", "Technology", &self_res) ==
          CORRNET_OK);
  if (self_res.has_t_min) CHECK(std::string(self_res.argmin_sector) == "Technology");

  corrnet_index_link_result ilr;
  CHECK(corrnet_index_linkage(net.n, "NOPE", "Technology", &ilr) == CORRNET_ERR_ARGUMENT);
}

TEST_CASE("C API: series statistics") {
  double series[4] = {1.0, 2.0, 3.0, 4.0};
  corrnet_trend_result trend;
  REQUIRE(corrnet_slope_trend_test(series, 4, &trend) == CORRNET_OK);
  CHECK(trend.slope == doctest::Approx(1.0));
  CHECK(trend.degenerate_fit == 1);

  double values[8] = {1.0, 1.01, 0.99, 1.02, -1.0, -1.01, -0.98, -1.03};
  corrnet_sign_change_result sc;
  REQUIRE(corrnet_sign_change_test(
              "2007-01-01,2007-04-01,2007-07-01,2007-10-01,2008-01-01,2008-04-01,"
              "2008-07-01,2008-10-01",
              values, 8, 2008, &sc) == CORRNET_OK);
  CHECK(sc.changed == 1);
  CHECK(sc.p_sign < 1e-3);

  double corr_s[8] = {0.5, 0.52, 0.48, 0.51, 0.1, 0.12, 0.09, 0.11};
  double ret_s[8] = {-0.1, -0.2, -0.1, -0.2, 0.1, 0.2, 0.1, 0.2};
  corrnet_decline_result dec;
  REQUIRE(corrnet_decline_coincidence_test(corr_s, ret_s, 8, &dec) == CORRNET_OK);
  CHECK(dec.n_decline == 4);
  CHECK(dec.p_one_sided < 0.01);
}

TEST_CASE("C API: pipeline commands") {
  TempDir dir("capi_pipeline");
  testsup::write_file(dir.file("spec.kv"), kSpec);

  corrnet_run_overrides ov{};
  ov.out_dir = nullptr;
  ov.trim_k = -1;
  ov.quantile = -1.0;
  ov.seed = -1;
  ov.threads = 0;

  REQUIRE(corrnet_synth(dir.file("spec.kv").c_str(), dir.file("data").c_str(), &ov) ==
          CORRNET_OK);

  std::string run_cfg = "prices = " + dir.file("data/panel_prices.csv") + "\n" +
                        "prices_format = wide\n" +
                        "sector_map = " + dir.file("data/sector_map.csv") + "\n" +
                        "window_mode = rolling\n"
                        "window_start = 2003-01-01\n"
                        "window_end = 2003-10-01\n"
                        "window_length_months = 3\n"
                        "window_shift_months = 3\n"
                        "trim_k = 0\n"
                        "quantile = 0.25\n"
                        "min_overlap = 30\n"
                        "out_dir = " + dir.file("out") + "\n";
  testsup::write_file(dir.file("run.kv"), run_cfg);

  ov.threads = 2;
  REQUIRE(corrnet_analyze(dir.file("run.kv").c_str(), &ov) == CORRNET_OK);
  CHECK(testsup::read_file(dir.file("out/reports/merge.csv")).size() > 0);

  REQUIRE(corrnet_export(dir.file("run.kv").c_str(), "all", "dot", &ov) == CORRNET_OK);
  CHECK(testsup::read_file(dir.file("out/exports/temporal.dot")).find("identity=true") !=
        std::string::npos);

  CHECK(corrnet_export(dir.file("run.kv").c_str(), "1990", "dot", &ov) == CORRNET_ERR_ARGUMENT);
  CHECK(corrnet_analyze(dir.file("nope.kv").c_str(), &ov) == CORRNET_ERR_IO);
}
