#pragma once

#include <optional>
#include <string>
#include <vector>

#include "corrnet/corrwin.hpp"
#include "corrnet/dates.hpp"
#include "corrnet/ingest.hpp"
#include "corrnet/network.hpp"
#include "corrnet/sectorstats.hpp"

namespace corrnet {

enum class SectorGranularity { Major, Minor };

/// Declarative run configuration (see README for the key schema). CLI
/// flags override individual keys.
struct RunConfig {
  std::string prices_path;
  PriceFormat prices_format = PriceFormat::Wide;
  std::string sector_map_path;
  std::vector<std::pair<std::string, std::string>> exogenous;  // name -> path
  WindowSpec window;
  std::vector<int> trim_ks = {0, 2, 5, 10, 20};  // first entry drives networks and stats
  double quantile = kDefaultQuantile;
  int min_overlap = kDefaultMinOverlap;
  double alpha_merge = kDefaultAlphaMerge;
  SectorGranularity granularity = SectorGranularity::Minor;
  std::optional<int> sign_change_year;
  std::string market_series = "market";
  std::string out_dir = "out";
  int threads = 0;  // 0: CORRNET_THREADS env var, then hardware concurrency

  int primary_trim_k() const { return trim_ks.empty() ? 0 : trim_ks[0]; }
};

RunConfig load_run_config(const std::string& path);

struct RunOverrides {
  std::optional<std::string> out_dir;
  std::optional<int> trim_k;
  std::optional<double> quantile;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
};

void apply_overrides(RunConfig& cfg, const RunOverrides& ov);

/// Full pipeline: per-window correlation matrices (cached), thresholded
/// networks, the sector statistics battery, then cross-window trend, sign
/// change, and decline-coincidence tests. Everything lands under
/// cfg.out_dir; reruns with unchanged inputs are byte-identical.
void run_analyze(const RunConfig& cfg);

/// Generates a synthetic panel (returns + cumulated prices) and its
/// analytic correlation truth table under out_dir.
void run_synth(const std::string& spec_path, const std::string& out_dir,
               std::optional<uint64_t> seed_override);

/// Exports thresholded networks for the selected windows ("all" stacks the
/// layers into the temporal network). Matrices are read from the analyze
/// cache when present, recomputed otherwise.
void run_export(const RunConfig& cfg, const std::string& window_selector, GraphFormat format);

}  // namespace corrnet
