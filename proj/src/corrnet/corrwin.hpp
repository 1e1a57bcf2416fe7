#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corrnet/dates.hpp"
#include "corrnet/ingest.hpp"

namespace corrnet {

enum class WindowMode { Rolling, CalendarYear };

struct WindowSpec {
  int length_months = 12;
  int shift_months = 3;
  Date start;
  Date end;
  WindowMode mode = WindowMode::Rolling;

  void validate() const;
};

/// Rolling mode: one window per shift step from `start` while the window
/// start is <= `end`, each spanning `length_months`, end-exclusive.
/// CalendarYear mode: one Jan-Dec window per calendar year intersecting
/// [start, end].
std::vector<DateWindow> enumerate_windows(const WindowSpec& spec);

constexpr int kDefaultMinOverlap = 100;

struct TrimResult {
  ReturnPanel panel;           // restricted to the window, k dates removed
  std::vector<Date> omitted;   // in removal-priority order
};

/// Removes the k dates with the largest absolute cross-sectional mean
/// return; ties keep the earlier date first in removal order.
TrimResult trim_extreme_days(const ReturnPanel& panel, DateWindow window, int k);

/// Symmetric pairwise-complete Pearson matrix for one window. NaN entries
/// are undefined (insufficient overlap or zero variance).
struct CorrelationMatrix {
  DateWindow window;
  std::vector<AssetRecord> assets;
  std::vector<double> rho;       // n*n, NaN = undefined
  std::vector<int32_t> n_obs;    // n*n pairwise observation counts
  std::vector<Date> trimmed_days;
  int trim_k = 0;
  int min_overlap = kDefaultMinOverlap;

  size_t n_assets() const { return assets.size(); }
  double rho_at(size_t i, size_t j) const { return rho[i * assets.size() + j]; }
  int32_t obs_at(size_t i, size_t j) const { return n_obs[i * assets.size() + j]; }
  bool defined(size_t i, size_t j) const { return !std::isnan(rho_at(i, j)); }
};

CorrelationMatrix pearson_matrix(const ReturnPanel& panel, DateWindow window, int trim_k,
                                 int min_overlap = kDefaultMinOverlap);

struct BlockAverage {
  std::optional<double> mean;  // empty when no defined pairs
  size_t n_defined = 0;
  size_t n_undefined = 0;
};

/// Mean of defined correlations over unordered distinct pairs within the
/// group (groupA == groupB) or over all cross pairs (deduplicated, no
/// self-pairs). Groups are asset indices into `corr.assets`.
BlockAverage average_block_correlation(const CorrelationMatrix& corr,
                                       std::span<const size_t> group_a,
                                       std::span<const size_t> group_b);

/// All unordered distinct pairs of the whole matrix.
BlockAverage average_all_pairs_correlation(const CorrelationMatrix& corr);

/// CSV export: header row/column of asset ids, empty cell = undefined.
void write_corr_csv(const CorrelationMatrix& corr, const std::string& path);

/// Compact binary cache: versioned header, little-endian 64-bit floats,
/// row-major upper triangle.
void write_corr_cache(const CorrelationMatrix& corr, const std::string& path);
CorrelationMatrix read_corr_cache(const std::string& path);

/// Deterministic cache file name for (window, trim k, min_overlap).
std::string corr_cache_name(DateWindow window, int trim_k, int min_overlap);

}  // namespace corrnet
