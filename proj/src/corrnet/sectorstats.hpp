#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corrnet/dates.hpp"
#include "corrnet/ingest.hpp"
#include "corrnet/network.hpp"

namespace corrnet {

/// Reported p-values never underflow to zero; extremes are floored here.
constexpr double kPValueFloor = 1e-300;

/// Upper-tail Student-t probability P(T_dof > t), floored at kPValueFloor.
double student_t_sf(double t, double dof);

/// Welch two-sample t-test on Bernoulli link indicators with unbiased
/// sample variances s^2 = p(1-p) n/(n-1) and Welch-Satterthwaite degrees
/// of freedom. One-sided alternative: rate1 > rate2. Degenerate when both
/// sample variances vanish (t undefined).
struct WelchProportionResult {
  std::optional<double> t;
  double dof = 0.0;
  std::optional<double> p_one_sided;
  bool degenerate = false;
  double p1 = 0.0;
  double p2 = 0.0;
};
WelchProportionResult welch_proportion_test(size_t k1, size_t n1, size_t k2, size_t n2);

/// Welch two-sample t-test on real samples, one-sided alternative
/// mean(x) > mean(y).
struct WelchMeanResult {
  std::optional<double> t;
  double dof = 0.0;
  double p_one_sided = 1.0;
  bool degenerate = false;
  double mean_x = 0.0;
  double mean_y = 0.0;
};
WelchMeanResult welch_mean_test_greater(std::span<const double> x, std::span<const double> y);

struct OneSampleTResult {
  std::optional<double> t;
  double dof = 0.0;
  double p_two_sided = 1.0;
  bool degenerate = false;
  double mean = 0.0;
  size_t n = 0;
};
OneSampleTResult one_sample_t_test(std::span<const double> x, double mu0);

/// Stock nodes carrying `label`. A query without a minor subsector also
/// matches its minored members ("Finance" includes Finance.RealEstate).
std::vector<size_t> members_of(const CorrelationNetwork& net, const SectorLabel& label);

/// Distinct full sector labels over stock nodes, sorted by name.
std::vector<SectorLabel> sectors_in(const CorrelationNetwork& net);

struct LinkDensity {
  std::optional<double> density;  // empty when no designated defined pairs
  size_t n_pairs = 0;             // designated defined pairs
};

/// Fraction of designated defined pairs that are edges. groupA == groupB
/// designates unordered distinct pairs within the group, otherwise all
/// cross pairs (deduplicated, no self-pairs).
LinkDensity link_density(const CorrelationNetwork& net, std::span<const size_t> group_a,
                         std::span<const size_t> group_b);

/// Sector merging test: pooled within-A/within-B link indicators against
/// between-(A,B) indicators. merged <=> p_one_sided >= alpha_merge; with a
/// degenerate t the classification falls back to the raw density
/// comparison and is flagged.
struct MergeTestResult {
  SectorLabel sector_a;
  SectorLabel sector_b;
  std::optional<double> t;
  double dof = 0.0;
  std::optional<double> p_one_sided;
  bool merged = false;
  bool degenerate = false;
  size_t n_within = 0;   // defined within pairs (pooled A and B)
  size_t n_between = 0;  // defined between pairs
  std::optional<double> density_within;
  std::optional<double> density_between;
  static constexpr bool pools_both_within = true;  // pooling convention marker
};
constexpr double kDefaultAlphaMerge = 0.05;
MergeTestResult merge_tstat(const CorrelationNetwork& net, const SectorLabel& a,
                            const SectorLabel& b, double alpha_merge = kDefaultAlphaMerge);

/// Self-clustering: the minimum over other sectors of the t comparing
/// within-A density against between-(A,B) density. Undefined per-sector
/// statistics are excluded from the minimum and flagged.
struct SelfClusterResult {
  SectorLabel sector;
  std::optional<double> t_min;
  std::optional<SectorLabel> argmin_sector;
  std::vector<std::pair<SectorLabel, std::optional<double>>> per_sector_t;
  bool any_excluded = false;
};
SelfClusterResult self_clustering(const CorrelationNetwork& net, const SectorLabel& sector,
                                  std::span<const SectorLabel> others);

/// Index linkage: one-sample t of the index-to-member link rate against
/// the graph's global density. Linked iff t > 4, Unlinked iff t < 2
/// (strict), else Indeterminate.
enum class LinkStatus { Linked, Unlinked, Indeterminate };

const char* to_string(LinkStatus s);

struct IndexLinkResult {
  std::string index_id;
  SectorLabel sector;
  std::optional<double> t;
  LinkStatus status = LinkStatus::Indeterminate;
  bool degenerate = false;
  double p_hat = 0.0;
  double p0 = 0.0;
  size_t n = 0;  // defined index-member pairs
};
IndexLinkResult index_linkage(const CorrelationNetwork& net, const std::string& index_id,
                              const SectorLabel& sector);

/// OLS of a quarterly statistic on its quarter index; two-sided slope
/// significance from Student t with n-2 dof. A perfect fit with nonzero
/// slope reports the floored p; a constant series reports slope 0, p = 1.
struct TrendTestResult {
  std::string series_name;
  double slope = 0.0;
  double intercept = 0.0;
  double t_slope = 0.0;
  double p = 1.0;
  size_t n = 0;
  bool degenerate_fit = false;  // zero residual variance
};
TrendTestResult slope_trend_test(std::span<const double> series, std::string series_name);

/// Tests whether the series mean inside `year` flips sign relative to the
/// pre-year mean: both one-sample tests significant at 0.05 with opposite
/// signs. p_sign is the one-sided p of the year's mean lying on the
/// opposite side of zero from the pre-year mean.
struct SignChangeResult {
  bool changed = false;
  double p_sign = 1.0;
  double pre_mean = 0.0;
  double year_mean = 0.0;
  double p_pre = 1.0;
  double p_year = 1.0;
  size_t n_pre = 0;
  size_t n_year = 0;
};
SignChangeResult sign_change_test(std::span<const Date> quarters, std::span<const double> values,
                                  int year);

/// One-sided Welch test that decline-quarter correlations (market return
/// < 0) exceed rise-quarter correlations. Needs >= 4 quarters per group.
struct DeclineTestResult {
  std::optional<double> t;
  double dof = 0.0;
  double p_one_sided = 1.0;
  bool degenerate = false;
  size_t n_decline = 0;
  size_t n_rise = 0;
  double mean_decline = 0.0;
  double mean_rise = 0.0;
};
DeclineTestResult decline_coincidence_test(std::span<const double> avg_corr,
                                           std::span<const double> market_return);

}  // namespace corrnet
