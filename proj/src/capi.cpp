#include "corrnet/corrnet.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "corrnet/corrwin.hpp"
#include "corrnet/errors.hpp"
#include "corrnet/ingest.hpp"
#include "corrnet/kvconfig.hpp"
#include "corrnet/network.hpp"
#include "corrnet/pipeline.hpp"
#include "corrnet/sectorstats.hpp"
#include "corrnet/synth.hpp"

namespace {

thread_local std::string g_errmsg;

corrnet_status fail(corrnet_status code, const char* what) {
  g_errmsg = what;
  return code;
}

template <typename Fn>
corrnet_status guarded(Fn&& fn) {
  try {
    fn();
    g_errmsg.clear();
    return CORRNET_OK;
  } catch (const corrnet::ArgumentError& e) {
    return fail(CORRNET_ERR_ARGUMENT, e.what());
  } catch (const corrnet::ParseError& e) {
    return fail(CORRNET_ERR_PARSE, e.what());
  } catch (const corrnet::DataError& e) {
    return fail(CORRNET_ERR_DATA, e.what());
  } catch (const corrnet::ComputeError& e) {
    return fail(CORRNET_ERR_COMPUTE, e.what());
  } catch (const corrnet::IoError& e) {
    return fail(CORRNET_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(CORRNET_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CORRNET_ERR_INTERNAL, "unknown error");
  }
}

void copy_to(const std::string& s, char* buf, size_t bufsize) {
  if (!buf || bufsize == 0) return;
  size_t n = std::min(s.size(), bufsize - 1);
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

corrnet::RunOverrides to_overrides(const corrnet_run_overrides* ov) {
  corrnet::RunOverrides out;
  if (!ov) return out;
  if (ov->out_dir) out.out_dir = ov->out_dir;
  if (ov->trim_k >= 0) out.trim_k = ov->trim_k;
  if (ov->quantile > 0.0) out.quantile = ov->quantile;
  if (ov->seed >= 0) out.seed = uint64_t(ov->seed);
  if (ov->threads > 0) out.threads = ov->threads;
  return out;
}

}  // namespace

// A panel handle holds either prices or returns; the mode records which
// operations apply.
struct corrnet_panel {
  enum class Mode { Prices, Returns } mode;
  corrnet::PricePanel prices;
  corrnet::ReturnPanel returns;

  size_t n_dates() const {
    return mode == Mode::Prices ? prices.n_dates() : returns.n_dates();
  }
  size_t n_assets() const {
    return mode == Mode::Prices ? prices.n_assets() : returns.n_assets();
  }
  const std::vector<corrnet::Date>& dates() const {
    return mode == Mode::Prices ? prices.dates : returns.dates;
  }
  const std::vector<corrnet::AssetRecord>& assets() const {
    return mode == Mode::Prices ? prices.assets : returns.assets;
  }
  double value(size_t d, size_t a) const {
    return mode == Mode::Prices ? prices.at(d, a) : returns.at(d, a);
  }
};

struct corrnet_corr {
  corrnet::CorrelationMatrix matrix;
};

struct corrnet_network {
  corrnet::CorrelationNetwork net;
};

extern "C" {

const char* corrnet_version(void) { return "0.1.0"; }

const char* corrnet_errmsg(void) { return g_errmsg.c_str(); }

corrnet_status corrnet_panel_load_prices(const char* path, const char* format,
                                         corrnet_panel** out) {
  if (!path || !format || !out) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    corrnet::PriceFormat fmt;
    std::string f = format;
    if (f == "long") fmt = corrnet::PriceFormat::Long;
    else if (f == "wide") fmt = corrnet::PriceFormat::Wide;
    else throw corrnet::ArgumentError("price format must be 'long' or 'wide', got '" + f + "'");
    auto panel = std::make_unique<corrnet_panel>();
    panel->mode = corrnet_panel::Mode::Prices;
    panel->prices = corrnet::load_prices(path, fmt);
    *out = panel.release();
  });
}

corrnet_status corrnet_panel_apply_sector_map(corrnet_panel* panel, const char* path) {
  if (!panel || !path) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    corrnet::SectorMap map = corrnet::load_sector_map(path);
    if (panel->mode == corrnet_panel::Mode::Prices) {
      corrnet::apply_sector_map(panel->prices.assets, map);
    } else {
      corrnet::apply_sector_map(panel->returns.assets, map);
    }
  });
}

corrnet_status corrnet_panel_log_returns(const corrnet_panel* prices, corrnet_panel** out) {
  if (!prices || !out) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    if (prices->mode != corrnet_panel::Mode::Prices) {
      throw corrnet::ArgumentError("panel already holds returns");
    }
    auto panel = std::make_unique<corrnet_panel>();
    panel->mode = corrnet_panel::Mode::Returns;
    panel->returns = corrnet::compute_log_returns(prices->prices);
    *out = panel.release();
  });
}

corrnet_status corrnet_panel_write_wide_csv(const corrnet_panel* panel, const char* path) {
  if (!panel || !path) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    if (panel->mode == corrnet_panel::Mode::Prices) {
      corrnet::write_wide_csv(panel->prices, path);
    } else {
      corrnet::write_wide_csv(panel->returns, path);
    }
  });
}

void corrnet_panel_free(corrnet_panel* panel) { delete panel; }

size_t corrnet_panel_n_dates(const corrnet_panel* panel) { return panel ? panel->n_dates() : 0; }

size_t corrnet_panel_n_assets(const corrnet_panel* panel) { return panel ? panel->n_assets() : 0; }

corrnet_status corrnet_panel_date(const corrnet_panel* panel, size_t idx, char* buf,
                                  size_t bufsize) {
  if (!panel || !buf) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  if (idx >= panel->n_dates()) return fail(CORRNET_ERR_ARGUMENT, "date index out of range");
  copy_to(panel->dates()[idx].to_string(), buf, bufsize);
  g_errmsg.clear();
  return CORRNET_OK;
}

corrnet_status corrnet_panel_asset_id(const corrnet_panel* panel, size_t idx, char* buf,
                                      size_t bufsize) {
  if (!panel || !buf) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  if (idx >= panel->n_assets()) return fail(CORRNET_ERR_ARGUMENT, "asset index out of range");
  copy_to(panel->assets()[idx].id, buf, bufsize);
  g_errmsg.clear();
  return CORRNET_OK;
}

int corrnet_panel_value(const corrnet_panel* panel, size_t date_idx, size_t asset_idx,
                        double* out) {
  if (!panel || !out || date_idx >= panel->n_dates() || asset_idx >= panel->n_assets()) return -1;
  double v = panel->value(date_idx, asset_idx);
  if (corrnet::is_missing(v)) return 0;
  *out = v;
  return 1;
}

corrnet_status corrnet_corr_compute(const corrnet_panel* returns, const char* win_start,
                                    const char* win_end, int trim_k, int min_overlap,
                                    corrnet_corr** out) {
  if (!returns || !win_start || !win_end || !out) {
    return fail(CORRNET_ERR_ARGUMENT, "null argument");
  }
  return guarded([&] {
    if (returns->mode != corrnet_panel::Mode::Returns) {
      throw corrnet::ArgumentError("correlation needs a returns panel (corrnet_panel_log_returns)");
    }
    corrnet::DateWindow window{corrnet::Date::parse(win_start), corrnet::Date::parse(win_end)};
    if (!(window.start < window.end)) {
      throw corrnet::ArgumentError("window start must precede window end");
    }
    auto corr = std::make_unique<corrnet_corr>();
    corr->matrix = corrnet::pearson_matrix(returns->returns, window, trim_k, min_overlap);
    *out = corr.release();
  });
}

void corrnet_corr_free(corrnet_corr* corr) { delete corr; }

size_t corrnet_corr_n_assets(const corrnet_corr* corr) {
  return corr ? corr->matrix.n_assets() : 0;
}

int corrnet_corr_rho(const corrnet_corr* corr, size_t i, size_t j, double* out) {
  if (!corr || !out || i >= corr->matrix.n_assets() || j >= corr->matrix.n_assets()) return -1;
  if (!corr->matrix.defined(i, j)) return 0;
  *out = corr->matrix.rho_at(i, j);
  return 1;
}

long long corrnet_corr_n_obs(const corrnet_corr* corr, size_t i, size_t j) {
  if (!corr || i >= corr->matrix.n_assets() || j >= corr->matrix.n_assets()) return -1;
  return corr->matrix.obs_at(i, j);
}

corrnet_status corrnet_corr_write_csv(const corrnet_corr* corr, const char* path) {
  if (!corr || !path) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] { corrnet::write_corr_csv(corr->matrix, path); });
}

corrnet_status corrnet_corr_cache_write(const corrnet_corr* corr, const char* path) {
  if (!corr || !path) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] { corrnet::write_corr_cache(corr->matrix, path); });
}

corrnet_status corrnet_corr_cache_read(const char* path, corrnet_corr** out) {
  if (!path || !out) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto corr = std::make_unique<corrnet_corr>();
    corr->matrix = corrnet::read_corr_cache(path);
    *out = corr.release();
  });
}

corrnet_status corrnet_network_build(const corrnet_corr* corr, double quantile,
                                     corrnet_network** out) {
  if (!corr || !out) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto net = std::make_unique<corrnet_network>();
    net->net = corrnet::build_threshold_network(corr->matrix, quantile);
    *out = net.release();
  });
}

void corrnet_network_free(corrnet_network* net) { delete net; }

size_t corrnet_network_n_nodes(const corrnet_network* net) {
  return net ? net->net.n_nodes() : 0;
}

size_t corrnet_network_n_edges(const corrnet_network* net) {
  return net ? net->net.edges.size() : 0;
}

double corrnet_network_density(const corrnet_network* net) {
  return net ? net->net.density() : 0.0;
}

double corrnet_network_global_density(const corrnet_network* net) {
  return net ? net->net.global_density() : 0.0;
}

corrnet_status corrnet_network_edge(const corrnet_network* net, size_t edge_idx, char* id_a,
                                    size_t id_a_size, char* id_b, size_t id_b_size, double* rho) {
  if (!net || !id_a || !id_b || !rho) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  if (edge_idx >= net->net.edges.size()) {
    return fail(CORRNET_ERR_ARGUMENT, "edge index out of range");
  }
  const corrnet::Edge& e = net->net.edges[edge_idx];
  const std::string* a = &net->net.nodes[e.i].id;
  const std::string* b = &net->net.nodes[e.j].id;
  if (*b < *a) std::swap(a, b);
  copy_to(*a, id_a, id_a_size);
  copy_to(*b, id_b, id_b_size);
  *rho = e.rho;
  g_errmsg.clear();
  return CORRNET_OK;
}

corrnet_status corrnet_network_export(const corrnet_network* net, const char* format,
                                      const char* path) {
  if (!net || !format || !path) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded(
      [&] { corrnet::export_network(net->net, corrnet::parse_graph_format(format), path); });
}

corrnet_status corrnet_merge_tstat(const corrnet_network* net, const char* sector_a,
                                   const char* sector_b, double alpha_merge,
                                   corrnet_merge_result* out) {
  if (!net || !sector_a || !sector_b || !out) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    corrnet::MergeTestResult r =
        corrnet::merge_tstat(net->net, corrnet::SectorLabel::parse(sector_a),
                             corrnet::SectorLabel::parse(sector_b), alpha_merge);
    *out = corrnet_merge_result{};
    out->has_t = r.t.has_value();
    out->t = r.t.value_or(0.0);
    out->p_one_sided = r.p_one_sided.value_or(0.0);
    out->merged = r.merged;
    out->degenerate = r.degenerate;
    out->n_within = (long long)r.n_within;
    out->n_between = (long long)r.n_between;
    out->density_within = r.density_within.value_or(-1.0);
    out->density_between = r.density_between.value_or(-1.0);
  });
}

corrnet_status corrnet_self_clustering(const corrnet_network* net, const char* sector,
                                       const char* others, corrnet_self_cluster_result* out) {
  if (!net || !sector || !others || !out) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    std::vector<corrnet::SectorLabel> other_labels;
    for (const auto& tok : corrnet::split_list(others)) {
      other_labels.push_back(corrnet::SectorLabel::parse(tok));
    }
    corrnet::SelfClusterResult r =
        corrnet::self_clustering(net->net, corrnet::SectorLabel::parse(sector), other_labels);
    *out = corrnet_self_cluster_result{};
    out->has_t_min = r.t_min.has_value();
    out->t_min = r.t_min.value_or(0.0);
    out->any_excluded = r.any_excluded;
    copy_to(r.argmin_sector ? r.argmin_sector->to_string() : "", out->argmin_sector,
            sizeof(out->argmin_sector));
  });
}

corrnet_status corrnet_index_linkage(const corrnet_network* net, const char* index_id,
                                     const char* sector, corrnet_index_link_result* out) {
  if (!net || !index_id || !sector || !out) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    corrnet::IndexLinkResult r =
        corrnet::index_linkage(net->net, index_id, corrnet::SectorLabel::parse(sector));
    *out = corrnet_index_link_result{};
    out->has_t = r.t.has_value();
    out->t = r.t.value_or(0.0);
    switch (r.status) {
      case corrnet::LinkStatus::Linked: out->status = CORRNET_LINKED; break;
      case corrnet::LinkStatus::Unlinked: out->status = CORRNET_UNLINKED; break;
      case corrnet::LinkStatus::Indeterminate: out->status = CORRNET_INDETERMINATE; break;
    }
    out->degenerate = r.degenerate;
    out->p_hat = r.p_hat;
    out->p0 = r.p0;
    out->n = (long long)r.n;
  });
}

corrnet_status corrnet_slope_trend_test(const double* series, size_t n,
                                        corrnet_trend_result* out) {
  if (!series || !out) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    corrnet::TrendTestResult r =
        corrnet::slope_trend_test(std::span<const double>(series, n), "series");
    *out = corrnet_trend_result{};
    out->slope = r.slope;
    out->intercept = r.intercept;
    out->t_slope = r.t_slope;
    out->p = r.p;
    out->degenerate_fit = r.degenerate_fit;
  });
}

corrnet_status corrnet_sign_change_test(const char* quarters, const double* values, size_t n,
                                        int year, corrnet_sign_change_result* out) {
  if (!quarters || !values || !out) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    std::vector<corrnet::Date> dates;
    for (const auto& tok : corrnet::split_list(quarters)) {
      dates.push_back(corrnet::Date::parse(tok));
    }
    if (dates.size() != n) {
      throw corrnet::ArgumentError("quarter list length does not match value count");
    }
    corrnet::SignChangeResult r =
        corrnet::sign_change_test(dates, std::span<const double>(values, n), year);
    *out = corrnet_sign_change_result{};
    out->changed = r.changed;
    out->p_sign = r.p_sign;
    out->pre_mean = r.pre_mean;
    out->year_mean = r.year_mean;
  });
}

corrnet_status corrnet_decline_coincidence_test(const double* avg_corr,
                                                const double* market_return, size_t n,
                                                corrnet_decline_result* out) {
  if (!avg_corr || !market_return || !out) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    corrnet::DeclineTestResult r = corrnet::decline_coincidence_test(
        std::span<const double>(avg_corr, n), std::span<const double>(market_return, n));
    *out = corrnet_decline_result{};
    out->has_t = r.t.has_value();
    out->t = r.t.value_or(0.0);
    out->p_one_sided = r.p_one_sided;
    out->n_decline = (long long)r.n_decline;
    out->n_rise = (long long)r.n_rise;
    out->mean_decline = r.mean_decline;
    out->mean_rise = r.mean_rise;
    out->degenerate = r.degenerate;
  });
}

corrnet_status corrnet_synth_generate(const char* spec_path, long long seed_override,
                                      corrnet_panel** out) {
  if (!spec_path || !out) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto [spec, schedule] = corrnet::load_synth_spec(spec_path);
    if (seed_override >= 0) spec.seed = uint64_t(seed_override);
    auto panel = std::make_unique<corrnet_panel>();
    panel->mode = corrnet_panel::Mode::Returns;
    panel->returns = corrnet::generate_returns(spec, schedule);
    *out = panel.release();
  });
}

corrnet_status corrnet_analyze(const char* config_path, const corrnet_run_overrides* overrides) {
  if (!config_path) return fail(CORRNET_ERR_ARGUMENT, "null config path");
  return guarded([&] {
    corrnet::RunConfig cfg = corrnet::load_run_config(config_path);
    corrnet::apply_overrides(cfg, to_overrides(overrides));
    corrnet::run_analyze(cfg);
  });
}

corrnet_status corrnet_synth(const char* spec_path, const char* out_dir,
                             const corrnet_run_overrides* overrides) {
  if (!spec_path || !out_dir) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    corrnet::RunOverrides ov = to_overrides(overrides);
    corrnet::run_synth(spec_path, out_dir, ov.seed);
  });
}

corrnet_status corrnet_export(const char* config_path, const char* window, const char* format,
                              const corrnet_run_overrides* overrides) {
  if (!config_path || !window || !format) return fail(CORRNET_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    corrnet::RunConfig cfg = corrnet::load_run_config(config_path);
    corrnet::apply_overrides(cfg, to_overrides(overrides));
    corrnet::run_export(cfg, window, corrnet::parse_graph_format(format));
  });
}

}  // extern "C"
