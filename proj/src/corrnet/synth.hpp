#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corrnet/dates.hpp"
#include "corrnet/ingest.hpp"

namespace corrnet {

/// Synthetic market ground truth: r_i(t) = beta_market f_m(t)
/// + beta_sector(s(i)) f_{s(i)}(t) + sigma_idio eps_i(t) with independent
/// unit-variance Gaussian factors.
struct SectorSpecEntry {
  SectorLabel label;
  int count = 0;
  double beta_sector = 0.0;
};

struct FactorModelSpec {
  std::vector<SectorSpecEntry> sectors;
  double beta_market = 0.0;
  double sigma_idio = 1.0;
  int n_dates = 0;
  uint64_t seed = 0;
  Date start_date = Date::from_ymd(2003, 1, 1);

  void validate() const;
  /// Asset records in generation order, ids "<sector-leaf>_<NN>".
  std::vector<AssetRecord> asset_records() const;
};

struct RegimeEvent {
  enum class Kind { MergeSectors, SetMarketBeta, SetSectorBeta, ShockDay };
  Kind kind = Kind::ShockDay;
  Date date;
  SectorLabel sector_a;  // MergeSectors / SetSectorBeta
  SectorLabel sector_b;  // MergeSectors
  double value = 0.0;    // SetMarketBeta / SetSectorBeta / ShockDay magnitude
};

struct RegimeSchedule {
  std::vector<RegimeEvent> events;
};

/// Deterministic generation: mt19937_64 seeded from spec.seed, Gaussians by
/// Box-Muller (each draw consumes two generator words, the sine branch is
/// discarded). Per date the draw order is the market factor, one factor
/// per declared sector, then one idiosyncratic draw per asset; factors are
/// drawn whether or not a merge makes them unused, so the stream does not
/// depend on the schedule. Dates are consecutive weekdays from start_date.
ReturnPanel generate_returns(const FactorModelSpec& spec, const RegimeSchedule& schedule);

/// Closed-form correlation of assets i, j (indices into asset_records())
/// under the static regime, from the factor variance decomposition.
double analytic_correlation(const FactorModelSpec& spec, size_t i, size_t j);

/// Adds `magnitude` to every present return on the listed dates.
ReturnPanel inject_shock_days(const ReturnPanel& panel, const std::vector<Date>& dates,
                              double magnitude);

/// Cumulates a return panel into a price panel (base price 100), so
/// generated data can flow through the price-ingestion path.
PricePanel to_price_panel(const ReturnPanel& returns, double base_price = 100.0);

/// Key-value spec file; see README for the schema.
std::pair<FactorModelSpec, RegimeSchedule> load_synth_spec(const std::string& path);

/// Pairwise static analytic correlations as CSV (asset_i, asset_j, rho).
void write_analytic_truth_csv(const FactorModelSpec& spec, const std::string& path);

}  // namespace corrnet
