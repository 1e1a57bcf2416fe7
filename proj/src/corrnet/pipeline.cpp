#include "corrnet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "corrnet/csv.hpp"
#include "corrnet/errors.hpp"
#include "corrnet/kvconfig.hpp"
#include "corrnet/synth.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace corrnet {

namespace {

constexpr const char* kGeneratorTag = "mt19937_64+box-muller v1";

std::string fmt_opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

ordered_json json_opt(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

ordered_json json_pvalue(const std::optional<double>& p) {
  if (!p) return nullptr;
  return format_pvalue(*p);
}

void write_json(const ordered_json& doc, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  KvConfig kv = KvConfig::load(path);
  RunConfig cfg;
  cfg.prices_path = kv.require("prices");
  std::string fmt = kv.get_or("prices_format", "wide");
  if (fmt == "wide") cfg.prices_format = PriceFormat::Wide;
  else if (fmt == "long") cfg.prices_format = PriceFormat::Long;
  else throw ParseError(path + ": prices_format must be 'wide' or 'long'");

  cfg.sector_map_path = kv.require("sector_map");
  cfg.exogenous = kv.with_prefix("exogenous.");

  std::string mode = kv.get_or("window_mode", "rolling");
  if (mode == "rolling") cfg.window.mode = WindowMode::Rolling;
  else if (mode == "calendar_year") cfg.window.mode = WindowMode::CalendarYear;
  else throw ParseError(path + ": window_mode must be 'rolling' or 'calendar_year'");
  cfg.window.start = Date::parse(kv.require("window_start"));
  cfg.window.end = Date::parse(kv.require("window_end"));
  cfg.window.length_months = int(kv.get_long("window_length_months", 12));
  cfg.window.shift_months = int(kv.get_long("window_shift_months", 3));
  cfg.window.validate();

  if (auto trims = kv.get("trim_k")) {
    cfg.trim_ks.clear();
    for (const auto& tok : split_list(*trims)) {
      long k = parse_long(tok, path + ": trim_k");
      if (k < 0) throw ParseError(path + ": trim_k entries must be >= 0");
      cfg.trim_ks.push_back(int(k));
    }
    if (cfg.trim_ks.empty()) throw ParseError(path + ": trim_k list is empty");
  }

  cfg.quantile = kv.get_double("quantile", kDefaultQuantile);
  if (!(cfg.quantile > 0.0) || cfg.quantile > 1.0) {
    throw ParseError(path + ": quantile must lie in (0, 1]");
  }
  cfg.min_overlap = int(kv.get_long("min_overlap", kDefaultMinOverlap));
  cfg.alpha_merge = kv.get_double("alpha_merge", kDefaultAlphaMerge);

  std::string gran = kv.get_or("sector_granularity", "minor");
  if (gran == "minor") cfg.granularity = SectorGranularity::Minor;
  else if (gran == "major") cfg.granularity = SectorGranularity::Major;
  else throw ParseError(path + ": sector_granularity must be 'major' or 'minor'");

  if (auto y = kv.get("sign_change_year")) {
    cfg.sign_change_year = int(parse_long(*y, path + ": sign_change_year"));
  }
  cfg.market_series = kv.get_or("market_series", "market");
  cfg.out_dir = kv.get_or("out_dir", "out");
  cfg.threads = int(kv.get_long("threads", 0));
  return cfg;
}

void apply_overrides(RunConfig& cfg, const RunOverrides& ov) {
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.trim_k) {
    // An explicit trim override becomes the primary k, keeping the rest of
    // the configured curve.
    std::vector<int> ks{*ov.trim_k};
    for (int k : cfg.trim_ks)
      if (k != *ov.trim_k) ks.push_back(k);
    cfg.trim_ks = ks;
  }
  if (ov.quantile) cfg.quantile = *ov.quantile;
  if (ov.threads) cfg.threads = *ov.threads;
}

namespace {

unsigned resolve_threads(int cfg_threads) {
  if (cfg_threads > 0) return unsigned(cfg_threads);
  if (const char* env = std::getenv("CORRNET_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1) return unsigned(v);
    log_warning(std::string("ignoring invalid CORRNET_THREADS value '") + env + "'");
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// Deterministic parallel map: out[i] = fn(i), any thread count.
template <typename Fn>
void parallel_for(size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, n ? unsigned(n) : 1u));
  if (threads == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= n) break;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

struct TrimPoint {
  int k = 0;
  BlockAverage avg;
  size_t n_trimmed = 0;
};

struct WindowOutcome {
  DateWindow window;
  std::optional<std::string> failure;  // window flagged, run continues

  std::vector<std::pair<std::pair<std::string, std::string>, LinkDensity>> densities;
  double global_density = 0.0;
  size_t n_edges = 0;
  size_t n_defined_pairs = 0;
  std::vector<MergeTestResult> merges;
  std::vector<SelfClusterResult> self_clusters;
  std::vector<IndexLinkResult> index_links;
  std::vector<TrimPoint> trim_curve;
  std::optional<double> market_return;
  std::optional<double> avg_corr;  // stock pairs, primary trim k
};

std::vector<size_t> stock_indices(const CorrelationMatrix& corr) {
  std::vector<size_t> out;
  for (size_t i = 0; i < corr.n_assets(); ++i) {
    if (corr.assets[i].kind == AssetKind::Stock) out.push_back(i);
  }
  return out;
}

/// Sector groups at the configured granularity. At minor granularity an
/// unminored label is dropped (with a warning) when its major also has
/// minored members, because the groups would overlap.
std::vector<SectorLabel> resolve_sector_groups(const std::vector<AssetRecord>& assets,
                                               SectorGranularity granularity) {
  std::set<SectorLabel> labels;
  for (const auto& a : assets) {
    if (a.kind != AssetKind::Stock || !a.sector) continue;
    labels.insert(granularity == SectorGranularity::Major ? a.sector->majored() : *a.sector);
  }
  std::vector<SectorLabel> out;
  for (const SectorLabel& l : labels) {
    if (granularity == SectorGranularity::Minor && l.minor == SectorMinor::None) {
      bool has_minored = std::any_of(labels.begin(), labels.end(), [&](const SectorLabel& o) {
        return o.major == l.major && o.minor != SectorMinor::None;
      });
      if (has_minored) {
        log_warning("sector " + l.to_string() +
                    " mixes unminored and minored members; unminored group skipped at minor "
                    "granularity");
        continue;
      }
    }
    out.push_back(l);
  }
  std::sort(out.begin(), out.end(),
            [](const SectorLabel& a, const SectorLabel& b) { return a.to_string() < b.to_string(); });
  return out;
}

CorrelationMatrix matrix_for(const ReturnPanel& returns, DateWindow window, int trim_k,
                             int min_overlap, const fs::path& cache_dir) {
  fs::path cache_file = cache_dir / corr_cache_name(window, trim_k, min_overlap);
  if (fs::exists(cache_file)) {
    try {
      return read_corr_cache(cache_file.string());
    } catch (const std::exception& e) {
      log_warning(std::string("ignoring unreadable cache (") + e.what() + "); recomputing");
    }
  }
  CorrelationMatrix m = pearson_matrix(returns, window, trim_k, min_overlap);
  write_corr_cache(m, cache_file.string());
  return m;
}

std::optional<double> window_market_return(const ExogenousSeries* market, const ReturnPanel& returns,
                                           DateWindow window) {
  if (market) {
    // Log return of the market level series across the window.
    std::optional<std::pair<Date, double>> first, last;
    for (size_t i = 0; i < market->dates.size(); ++i) {
      if (window.contains(market->dates[i])) {
        if (!first) first = {market->dates[i], market->values[i]};
        last = {market->dates[i], market->values[i]};
      }
    }
    if (!first || first->first == last->first) return std::nullopt;
    if (!(first->second > 0.0) || !(last->second > 0.0)) return std::nullopt;
    return std::log(last->second / first->second);
  }
  // Fallback: mean daily return over every present stock cell.
  double sum = 0.0;
  size_t n = 0;
  for (size_t d = 0; d < returns.n_dates(); ++d) {
    if (!window.contains(returns.dates[d])) continue;
    for (size_t a = 0; a < returns.n_assets(); ++a) {
      if (returns.assets[a].kind != AssetKind::Stock) continue;
      double v = returns.at(d, a);
      if (!is_missing(v)) {
        sum += v;
        ++n;
      }
    }
  }
  if (n == 0) return std::nullopt;
  return sum / double(n);
}

WindowOutcome process_window(const RunConfig& cfg, const ReturnPanel& returns, DateWindow window,
                             const std::vector<SectorLabel>& groups,
                             const std::vector<std::string>& index_ids,
                             const ExogenousSeries* market, const fs::path& cache_dir,
                             const fs::path& networks_dir) {
  WindowOutcome out;
  out.window = window;
  try {
    CorrelationMatrix primary =
        matrix_for(returns, window, cfg.primary_trim_k(), cfg.min_overlap, cache_dir);

    // Fig 2B-style trimmed average-correlation curve over stock pairs.
    auto stocks = stock_indices(primary);
    for (int k : cfg.trim_ks) {
      CorrelationMatrix m = k == cfg.primary_trim_k()
                                ? primary
                                : matrix_for(returns, window, k, cfg.min_overlap, cache_dir);
      TrimPoint pt;
      pt.k = k;
      pt.avg = stocks.size() >= 2 ? average_block_correlation(m, stocks, stocks) : BlockAverage{};
      pt.n_trimmed = m.trimmed_days.size();
      out.trim_curve.push_back(pt);
      if (k == cfg.primary_trim_k()) out.avg_corr = pt.avg.mean;
    }

    CorrelationNetwork net = build_threshold_network(primary, cfg.quantile);
    export_network(net, GraphFormat::EdgeList,
                   (networks_dir / ("net_" + window.label() + ".edges.csv")).string());

    out.global_density = net.global_density();
    out.n_edges = net.edges.size();
    out.n_defined_pairs = net.n_defined_pairs;

    std::map<SectorLabel, std::vector<size_t>> members;
    for (const SectorLabel& g : groups) members[g] = members_of(net, g);

    for (const SectorLabel& g : groups) {
      if (members[g].size() >= 2) {
        out.densities.push_back(
            {{g.to_string(), g.to_string()}, link_density(net, members[g], members[g])});
      }
    }
    for (size_t i = 0; i < groups.size(); ++i) {
      for (size_t j = i + 1; j < groups.size(); ++j) {
        if (members[groups[i]].empty() || members[groups[j]].empty()) continue;
        out.densities.push_back({{groups[i].to_string(), groups[j].to_string()},
                                 link_density(net, members[groups[i]], members[groups[j]])});
      }
    }

    std::vector<SectorLabel> testable;
    for (const SectorLabel& g : groups) {
      if (members[g].size() >= 2) testable.push_back(g);
    }
    for (size_t i = 0; i < testable.size(); ++i) {
      for (size_t j = i + 1; j < testable.size(); ++j) {
        out.merges.push_back(merge_tstat(net, testable[i], testable[j], cfg.alpha_merge));
      }
    }
    if (testable.size() >= 2) {
      for (const SectorLabel& g : testable) {
        std::vector<SectorLabel> others;
        for (const SectorLabel& o : testable)
          if (!(o == g)) others.push_back(o);
        out.self_clusters.push_back(self_clustering(net, g, others));
      }
    }
    for (const std::string& idx : index_ids) {
      if (!net.node_index(idx)) continue;
      for (const SectorLabel& g : testable) {
        out.index_links.push_back(index_linkage(net, idx, g));
      }
    }

    out.market_return = window_market_return(market, returns, window);
  } catch (const IoError&) {
    throw;  // infrastructure failures abort the run
  } catch (const std::exception& e) {
    out.failure = e.what();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report writers
// ---------------------------------------------------------------------------

void write_link_density_reports(const std::vector<WindowOutcome>& outcomes, const fs::path& dir) {
  CsvWriter csv((dir / "link_density.csv").string());
  csv.write_row({"window_start", "window_end", "group_a", "group_b", "density", "n_pairs"});
  ordered_json doc;
  doc["report"] = "link_density";
  doc["windows"] = ordered_json::array();
  for (const auto& w : outcomes) {
    if (w.failure) continue;
    csv.write_row({w.window.start.to_string(), w.window.end.to_string(), "*", "*",
                   format_double(w.global_density), std::to_string(w.n_defined_pairs)});
    ordered_json jw;
    jw["window_start"] = w.window.start.to_string();
    jw["window_end"] = w.window.end.to_string();
    jw["global_density"] = w.global_density;
    jw["n_edges"] = w.n_edges;
    jw["n_defined_pairs"] = w.n_defined_pairs;
    jw["groups"] = ordered_json::array();
    for (const auto& [names, d] : w.densities) {
      csv.write_row({w.window.start.to_string(), w.window.end.to_string(), names.first,
                     names.second, fmt_opt(d.density), std::to_string(d.n_pairs)});
      ordered_json jg;
      jg["group_a"] = names.first;
      jg["group_b"] = names.second;
      jg["density"] = json_opt(d.density);
      jg["n_pairs"] = d.n_pairs;
      jw["groups"].push_back(jg);
    }
    doc["windows"].push_back(jw);
  }
  csv.close();
  write_json(doc, dir / "link_density.json");
}

void write_merge_reports(const std::vector<WindowOutcome>& outcomes, double alpha_merge,
                         const fs::path& dir) {
  CsvWriter csv((dir / "merge.csv").string());
  csv.write_row({"window_start", "window_end", "sector_a", "sector_b", "t", "p_one_sided",
                 "merged", "degenerate", "n_within", "n_between", "density_within",
                 "density_between"});
  ordered_json doc;
  doc["report"] = "merge_tests";
  doc["alpha_merge"] = alpha_merge;
  doc["pools_both_within"] = MergeTestResult::pools_both_within;
  doc["windows"] = ordered_json::array();
  for (const auto& w : outcomes) {
    if (w.failure) continue;
    ordered_json jw;
    jw["window_start"] = w.window.start.to_string();
    jw["window_end"] = w.window.end.to_string();
    jw["tests"] = ordered_json::array();
    for (const auto& m : w.merges) {
      csv.write_row({w.window.start.to_string(), w.window.end.to_string(),
                     m.sector_a.to_string(), m.sector_b.to_string(), fmt_opt(m.t),
                     m.p_one_sided ? format_pvalue(*m.p_one_sided) : "",
                     m.merged ? "true" : "false", m.degenerate ? "true" : "false",
                     std::to_string(m.n_within), std::to_string(m.n_between),
                     fmt_opt(m.density_within), fmt_opt(m.density_between)});
      ordered_json jt;
      jt["sector_a"] = m.sector_a.to_string();
      jt["sector_b"] = m.sector_b.to_string();
      jt["t"] = json_opt(m.t);
      jt["p_one_sided"] = json_pvalue(m.p_one_sided);
      jt["merged"] = m.merged;
      jt["degenerate"] = m.degenerate;
      jt["n_within"] = m.n_within;
      jt["n_between"] = m.n_between;
      jt["density_within"] = json_opt(m.density_within);
      jt["density_between"] = json_opt(m.density_between);
      jw["tests"].push_back(jt);
    }
    doc["windows"].push_back(jw);
  }
  csv.close();
  write_json(doc, dir / "merge.json");
}

void write_self_clustering_reports(const std::vector<WindowOutcome>& outcomes,
                                   const fs::path& dir) {
  CsvWriter csv((dir / "self_clustering.csv").string());
  csv.write_row({"window_start", "window_end", "sector", "other_sector", "t", "excluded"});
  CsvWriter summary((dir / "self_clustering_min.csv").string());
  summary.write_row(
      {"window_start", "window_end", "sector", "t_min", "argmin_sector", "any_excluded"});
  ordered_json doc;
  doc["report"] = "self_clustering";
  doc["windows"] = ordered_json::array();
  for (const auto& w : outcomes) {
    if (w.failure) continue;
    ordered_json jw;
    jw["window_start"] = w.window.start.to_string();
    jw["window_end"] = w.window.end.to_string();
    jw["sectors"] = ordered_json::array();
    for (const auto& sc : w.self_clusters) {
      ordered_json js;
      js["sector"] = sc.sector.to_string();
      js["t_min"] = json_opt(sc.t_min);
      js["argmin_sector"] = sc.argmin_sector ? ordered_json(sc.argmin_sector->to_string())
                                             : ordered_json(nullptr);
      js["any_excluded"] = sc.any_excluded;
      js["per_sector_t"] = ordered_json::object();
      for (const auto& [other, t] : sc.per_sector_t) {
        csv.write_row({w.window.start.to_string(), w.window.end.to_string(),
                       sc.sector.to_string(), other.to_string(), fmt_opt(t),
                       t ? "false" : "true"});
        js["per_sector_t"][other.to_string()] = json_opt(t);
      }
      summary.write_row({w.window.start.to_string(), w.window.end.to_string(),
                         sc.sector.to_string(), fmt_opt(sc.t_min),
                         sc.argmin_sector ? sc.argmin_sector->to_string() : "",
                         sc.any_excluded ? "true" : "false"});
      jw["sectors"].push_back(js);
    }
    doc["windows"].push_back(jw);
  }
  csv.close();
  summary.close();
  write_json(doc, dir / "self_clustering.json");
}

void write_index_linkage_reports(const std::vector<WindowOutcome>& outcomes, const fs::path& dir) {
  CsvWriter csv((dir / "index_linkage.csv").string());
  csv.write_row({"window_start", "window_end", "index", "sector", "t", "status", "degenerate",
                 "p_hat", "p0", "n"});
  ordered_json doc;
  doc["report"] = "index_linkage";
  doc["windows"] = ordered_json::array();
  for (const auto& w : outcomes) {
    if (w.failure) continue;
    ordered_json jw;
    jw["window_start"] = w.window.start.to_string();
    jw["window_end"] = w.window.end.to_string();
    jw["tests"] = ordered_json::array();
    for (const auto& il : w.index_links) {
      csv.write_row({w.window.start.to_string(), w.window.end.to_string(), il.index_id,
                     il.sector.to_string(), fmt_opt(il.t), to_string(il.status),
                     il.degenerate ? "true" : "false", format_double(il.p_hat),
                     format_double(il.p0), std::to_string(il.n)});
      ordered_json jt;
      jt["index"] = il.index_id;
      jt["sector"] = il.sector.to_string();
      jt["t"] = json_opt(il.t);
      jt["status"] = to_string(il.status);
      jt["degenerate"] = il.degenerate;
      jt["p_hat"] = il.p_hat;
      jt["p0"] = il.p0;
      jt["n"] = il.n;
      jw["tests"].push_back(jt);
    }
    doc["windows"].push_back(jw);
  }
  csv.close();
  write_json(doc, dir / "index_linkage.json");
}

void write_trim_curve_reports(const std::vector<WindowOutcome>& outcomes, const fs::path& dir) {
  CsvWriter csv((dir / "trim_curves.csv").string());
  csv.write_row({"window_start", "window_end", "k", "n_trimmed", "avg_corr", "n_defined_pairs",
                 "n_undefined_pairs"});
  ordered_json doc;
  doc["report"] = "trim_curves";
  doc["windows"] = ordered_json::array();
  for (const auto& w : outcomes) {
    if (w.failure) continue;
    ordered_json jw;
    jw["window_start"] = w.window.start.to_string();
    jw["window_end"] = w.window.end.to_string();
    jw["points"] = ordered_json::array();
    for (const auto& pt : w.trim_curve) {
      csv.write_row({w.window.start.to_string(), w.window.end.to_string(), std::to_string(pt.k),
                     std::to_string(pt.n_trimmed), fmt_opt(pt.avg.mean),
                     std::to_string(pt.avg.n_defined), std::to_string(pt.avg.n_undefined)});
      ordered_json jp;
      jp["k"] = pt.k;
      jp["n_trimmed"] = pt.n_trimmed;
      jp["avg_corr"] = json_opt(pt.avg.mean);
      jp["n_defined_pairs"] = pt.avg.n_defined;
      jp["n_undefined_pairs"] = pt.avg.n_undefined;
      jw["points"].push_back(jp);
    }
    doc["windows"].push_back(jw);
  }
  csv.close();
  write_json(doc, dir / "trim_curves.json");
}

struct SeriesPoint {
  DateWindow window;
  double value;
};

void append_trend(std::vector<TrendTestResult>& trends, const std::string& name,
                  const std::vector<SeriesPoint>& series) {
  if (series.size() < 3) {
    log_warning("trend series '" + name + "' has fewer than 3 defined points; skipped");
    return;
  }
  std::vector<double> values;
  values.reserve(series.size());
  for (const auto& p : series) values.push_back(p.value);
  trends.push_back(slope_trend_test(values, name));
}

void write_trend_reports(const std::vector<TrendTestResult>& trends, const fs::path& dir) {
  CsvWriter csv((dir / "trends.csv").string());
  csv.write_row({"series", "slope", "t_slope", "p", "n_used", "degenerate_fit"});
  ordered_json doc;
  doc["report"] = "trend_tests";
  doc["series"] = ordered_json::array();
  for (const auto& t : trends) {
    csv.write_row({t.series_name, format_double(t.slope),
                   std::isinf(t.t_slope) ? "inf" : format_double(t.t_slope), format_pvalue(t.p),
                   std::to_string(t.n), t.degenerate_fit ? "true" : "false"});
    ordered_json jt;
    jt["series"] = t.series_name;
    jt["slope"] = t.slope;
    jt["t_slope"] = std::isinf(t.t_slope) ? ordered_json(nullptr) : ordered_json(t.t_slope);
    jt["p"] = format_pvalue(t.p);
    jt["n_used"] = t.n;
    jt["degenerate_fit"] = t.degenerate_fit;
    doc["series"].push_back(jt);
  }
  csv.close();
  write_json(doc, dir / "trends.json");
}

void write_sign_change_reports(
    const std::vector<std::pair<std::string, SignChangeResult>>& results, int year,
    const fs::path& dir) {
  CsvWriter csv((dir / "sign_change.csv").string());
  csv.write_row({"series", "year", "changed", "p_sign", "pre_mean", "year_mean", "p_pre",
                 "p_year", "n_pre", "n_year"});
  ordered_json doc;
  doc["report"] = "sign_change_tests";
  doc["year"] = year;
  doc["series"] = ordered_json::array();
  for (const auto& [name, r] : results) {
    csv.write_row({name, std::to_string(year), r.changed ? "true" : "false",
                   format_pvalue(r.p_sign), format_double(r.pre_mean),
                   format_double(r.year_mean), format_pvalue(r.p_pre), format_pvalue(r.p_year),
                   std::to_string(r.n_pre), std::to_string(r.n_year)});
    ordered_json jr;
    jr["series"] = name;
    jr["changed"] = r.changed;
    jr["p_sign"] = format_pvalue(r.p_sign);
    jr["pre_mean"] = r.pre_mean;
    jr["year_mean"] = r.year_mean;
    jr["p_pre"] = format_pvalue(r.p_pre);
    jr["p_year"] = format_pvalue(r.p_year);
    jr["n_pre"] = r.n_pre;
    jr["n_year"] = r.n_year;
    doc["series"].push_back(jr);
  }
  csv.close();
  write_json(doc, dir / "sign_change.json");
}

void write_decline_report(const std::optional<DeclineTestResult>& result,
                          const std::optional<std::string>& skip_reason, const fs::path& dir) {
  CsvWriter csv((dir / "decline.csv").string());
  csv.write_row({"t", "p_one_sided", "n_decline", "n_rise", "mean_decline", "mean_rise",
                 "degenerate", "skipped_reason"});
  ordered_json doc;
  doc["report"] = "decline_coincidence";
  if (result) {
    const auto& r = *result;
    csv.write_row({fmt_opt(r.t), format_pvalue(r.p_one_sided), std::to_string(r.n_decline),
                   std::to_string(r.n_rise), format_double(r.mean_decline),
                   format_double(r.mean_rise), r.degenerate ? "true" : "false", ""});
    doc["t"] = json_opt(r.t);
    doc["p_one_sided"] = format_pvalue(r.p_one_sided);
    doc["n_decline"] = r.n_decline;
    doc["n_rise"] = r.n_rise;
    doc["mean_decline"] = r.mean_decline;
    doc["mean_rise"] = r.mean_rise;
    doc["degenerate"] = r.degenerate;
  } else {
    std::string reason = skip_reason.value_or("skipped");
    for (char& c : reason)
      if (c == ',' || c == '\n' || c == '\r') c = ';';
    csv.write_row({"", "", "", "", "", "", "", reason});
    doc["skipped_reason"] = reason;
  }
  csv.close();
  write_json(doc, dir / "decline.json");
}

void write_market_returns(const std::vector<WindowOutcome>& outcomes, const fs::path& dir) {
  CsvWriter csv((dir / "market_returns.csv").string());
  csv.write_row({"window_start", "window_end", "market_return", "avg_corr"});
  for (const auto& w : outcomes) {
    if (w.failure) continue;
    csv.write_row({w.window.start.to_string(), w.window.end.to_string(),
                   fmt_opt(w.market_return), fmt_opt(w.avg_corr)});
  }
  csv.close();
}

void write_failures(const std::vector<WindowOutcome>& outcomes, const fs::path& dir) {
  CsvWriter csv((dir / "window_failures.csv").string());
  csv.write_row({"window_start", "window_end", "error"});
  for (const auto& w : outcomes) {
    if (!w.failure) continue;
    std::string msg = *w.failure;
    for (char& c : msg)
      if (c == ',' || c == '\n' || c == '\r') c = ';';
    csv.write_row({w.window.start.to_string(), w.window.end.to_string(), msg});
  }
  csv.close();
}

}  // namespace

void run_analyze(const RunConfig& cfg) {
  PricePanel prices = load_prices(cfg.prices_path, cfg.prices_format);
  SectorMap sector_map = load_sector_map(cfg.sector_map_path);
  apply_sector_map(prices.assets, sector_map);
  ReturnPanel returns = compute_log_returns(prices);

  std::map<std::string, ExogenousSeries> exo;
  for (const auto& [name, path] : cfg.exogenous) exo.emplace(name, load_exogenous(path, name));
  const ExogenousSeries* market = nullptr;
  if (auto it = exo.find(cfg.market_series); it != exo.end()) market = &it->second;

  std::vector<DateWindow> windows = enumerate_windows(cfg.window);
  if (windows.empty()) throw ArgumentError("window specification yields no windows");

  std::vector<SectorLabel> groups = resolve_sector_groups(returns.assets, cfg.granularity);
  std::vector<std::string> index_ids;
  for (const auto& a : returns.assets) {
    if (a.kind == AssetKind::Index) index_ids.push_back(a.id);
  }
  std::sort(index_ids.begin(), index_ids.end());

  fs::path out_root(cfg.out_dir);
  fs::path cache_dir = out_root / "cache";
  fs::path networks_dir = out_root / "networks";
  fs::path reports_dir = out_root / "reports";
  std::error_code ec;
  fs::create_directories(cache_dir, ec);
  fs::create_directories(networks_dir, ec);
  fs::create_directories(reports_dir, ec);
  if (!fs::is_directory(cache_dir) || !fs::is_directory(networks_dir) ||
      !fs::is_directory(reports_dir)) {
    throw IoError("cannot create output directory tree under " + cfg.out_dir);
  }

  std::vector<WindowOutcome> outcomes(windows.size());
  std::vector<std::exception_ptr> fatal(windows.size());
  parallel_for(windows.size(), resolve_threads(cfg.threads), [&](size_t i) {
    try {
      outcomes[i] = process_window(cfg, returns, windows[i], groups, index_ids, market, cache_dir,
                                   networks_dir);
    } catch (...) {
      fatal[i] = std::current_exception();
    }
  });
  for (size_t i = 0; i < windows.size(); ++i) {
    if (fatal[i]) {
      try {
        std::rethrow_exception(fatal[i]);
      } catch (const std::exception& e) {
        throw IoError("window " + windows[i].label() + ": " + e.what());
      }
    }
    if (outcomes[i].failure) {
      log_warning("window " + windows[i].label() + " flagged undefined: " + *outcomes[i].failure);
    }
  }

  write_link_density_reports(outcomes, reports_dir);
  write_merge_reports(outcomes, cfg.alpha_merge, reports_dir);
  write_self_clustering_reports(outcomes, reports_dir);
  write_index_linkage_reports(outcomes, reports_dir);
  write_trim_curve_reports(outcomes, reports_dir);
  write_market_returns(outcomes, reports_dir);
  write_failures(outcomes, reports_dir);

  // Cross-window statistics. Quarter series are indexed over the windows
  // where the statistic is defined.
  std::vector<TrendTestResult> trends;
  std::map<std::string, std::vector<SeriesPoint>> self_series;
  std::map<std::string, std::vector<SeriesPoint>> merge_series;
  std::map<std::string, std::vector<SeriesPoint>> between_density_series;
  for (const auto& w : outcomes) {
    if (w.failure) continue;
    for (const auto& sc : w.self_clusters) {
      if (sc.t_min) {
        self_series["self_clustering." + sc.sector.to_string()].push_back({w.window, *sc.t_min});
      }
    }
    for (const auto& m : w.merges) {
      std::string key = m.sector_a.to_string() + "|" + m.sector_b.to_string();
      if (m.t) merge_series["merge_t." + key].push_back({w.window, *m.t});
      if (m.density_between) {
        between_density_series["between_density." + key].push_back(
            {w.window, *m.density_between});
      }
    }
  }
  for (const auto& [name, series] : self_series) append_trend(trends, name, series);
  for (const auto& [name, series] : merge_series) append_trend(trends, name, series);
  for (const auto& [name, series] : between_density_series) append_trend(trends, name, series);
  write_trend_reports(trends, reports_dir);

  if (cfg.sign_change_year) {
    std::vector<std::pair<std::string, SignChangeResult>> sign_results;
    for (const auto& [name, series] : self_series) {
      std::vector<Date> quarters;
      std::vector<double> values;
      for (const auto& p : series) {
        quarters.push_back(p.window.start);
        values.push_back(p.value);
      }
      try {
        sign_results.emplace_back(name,
                                  sign_change_test(quarters, values, *cfg.sign_change_year));
      } catch (const ArgumentError& e) {
        log_warning("sign-change test skipped for '" + name + "': " + e.what());
      }
    }
    write_sign_change_reports(sign_results, *cfg.sign_change_year, reports_dir);
  }

  std::optional<DeclineTestResult> decline;
  std::optional<std::string> decline_skip;
  {
    std::vector<double> corr_series, ret_series;
    for (const auto& w : outcomes) {
      if (w.failure || !w.avg_corr || !w.market_return) continue;
      corr_series.push_back(*w.avg_corr);
      ret_series.push_back(*w.market_return);
    }
    try {
      decline = decline_coincidence_test(corr_series, ret_series);
    } catch (const ArgumentError& e) {
      decline_skip = e.what();
      log_warning(std::string("decline-coincidence test skipped: ") + e.what());
    }
  }
  write_decline_report(decline, decline_skip, reports_dir);

  if (exo.count("libor") && exo.count("ffr")) {
    std::vector<Date> quarter_starts;
    for (const auto& w : windows) quarter_starts.push_back(w.start);
    try {
      ExogenousSeries spread = derive_libor_spread(exo.at("libor"), exo.at("ffr"), quarter_starts);
      CsvWriter csv((reports_dir / "libor_spread.csv").string());
      csv.write_raw_line("#units: " + spread.units);
      csv.write_row({"date", "value"});
      for (size_t i = 0; i < spread.dates.size(); ++i) {
        csv.write_row({spread.dates[i].to_string(), format_double(spread.values[i])});
      }
      csv.close();
    } catch (const std::exception& e) {
      log_warning(std::string("LIBOR spread report skipped: ") + e.what());
    }
  }
}

void run_synth(const std::string& spec_path, const std::string& out_dir,
               std::optional<uint64_t> seed_override) {
  auto [spec, schedule] = load_synth_spec(spec_path);
  if (seed_override) spec.seed = *seed_override;

  fs::path root(out_dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (!fs::is_directory(root)) throw IoError("cannot create output directory " + out_dir);

  ReturnPanel returns = generate_returns(spec, schedule);
  write_wide_csv(returns, (root / "panel_returns.csv").string());
  write_wide_csv(to_price_panel(returns), (root / "panel_prices.csv").string());
  write_analytic_truth_csv(spec, (root / "truth.csv").string());

  CsvWriter sectors((root / "sector_map.csv").string());
  sectors.write_row({"asset_id", "major", "minor"});
  for (const auto& a : spec.asset_records()) {
    std::string major = a.sector->majored().to_string();
    std::string minor =
        a.sector->minor == SectorMinor::None ? "" : a.sector->to_string().substr(major.size() + 1);
    sectors.write_row({a.id, major, minor});
  }
  sectors.close();

  std::ofstream meta(root / "generator.txt", std::ios::binary | std::ios::trunc);
  meta << "generator = " << kGeneratorTag << "\n"
       << "seed = " << spec.seed << "\n"
       << "dates = " << spec.n_dates << "\n"
       << "start_date = " << spec.start_date.to_string() << "\n";
  if (!meta) throw IoError("cannot write generator metadata under " + out_dir);
}

void run_export(const RunConfig& cfg, const std::string& window_selector, GraphFormat format) {
  PricePanel prices = load_prices(cfg.prices_path, cfg.prices_format);
  SectorMap sector_map = load_sector_map(cfg.sector_map_path);
  apply_sector_map(prices.assets, sector_map);
  ReturnPanel returns = compute_log_returns(prices);

  std::vector<DateWindow> windows = enumerate_windows(cfg.window);
  if (windows.empty()) throw ArgumentError("window specification yields no windows");

  auto list_windows = [&]() {
    std::string msg;
    for (const auto& w : windows) {
      if (!msg.empty()) msg += ", ";
      msg += w.start.to_string();
    }
    return msg;
  };

  std::vector<DateWindow> selected;
  if (window_selector == "all") {
    selected = windows;
  } else {
    int y_lo = 0, y_hi = 0;
    try {
      if (window_selector.size() == 4) {
        y_lo = y_hi = int(parse_long(window_selector, "window selector"));
      } else if (window_selector.size() == 9 && window_selector[4] == '-') {
        y_lo = int(parse_long(window_selector.substr(0, 4), "window selector"));
        y_hi = int(parse_long(window_selector.substr(5), "window selector"));
      } else {
        throw ParseError("bad selector shape");
      }
    } catch (const ParseError&) {
      throw ArgumentError("window selector '" + window_selector +
                          "' must be a year, a year range (YYYY-YYYY), or 'all'; "
                          "available window starts: " +
                          list_windows());
    }
    for (const auto& w : windows) {
      if (w.start.year() >= y_lo && w.start.year() <= y_hi) selected.push_back(w);
    }
    if (selected.empty()) {
      throw ArgumentError("no analysis window starts in '" + window_selector +
                          "'; available window starts: " + list_windows());
    }
  }

  fs::path cache_dir = fs::path(cfg.out_dir) / "cache";
  fs::path export_dir = fs::path(cfg.out_dir) / "exports";
  std::error_code ec;
  fs::create_directories(cache_dir, ec);
  fs::create_directories(export_dir, ec);
  if (!fs::is_directory(export_dir)) {
    throw IoError("cannot create export directory under " + cfg.out_dir);
  }

  const char* ext = format == GraphFormat::EdgeList ? ".edges.csv"
                    : format == GraphFormat::GraphML ? ".graphml"
                                                     : ".dot";

  std::vector<CorrelationNetwork> nets;
  for (const auto& w : selected) {
    CorrelationMatrix m =
        matrix_for(returns, w, cfg.primary_trim_k(), cfg.min_overlap, cache_dir);
    nets.push_back(build_threshold_network(m, cfg.quantile));
  }

  if (window_selector == "all") {
    TemporalNetwork temporal = stack_temporal(std::move(nets));
    export_network(temporal, format, (export_dir / (std::string("temporal") + ext)).string());
    return;
  }
  for (size_t i = 0; i < nets.size(); ++i) {
    export_network(nets[i], format,
                   (export_dir / ("net_" + selected[i].label() + ext)).string());
  }
}

}  // namespace corrnet
