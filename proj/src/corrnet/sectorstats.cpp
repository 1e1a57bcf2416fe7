#include "corrnet/sectorstats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "corrnet/errors.hpp"

namespace corrnet {

double student_t_sf(double t, double dof) {
  if (!(dof > 0.0)) throw ComputeError("Student t needs positive degrees of freedom");
  if (std::isinf(t)) return t > 0 ? kPValueFloor : 1.0;
  boost::math::students_t_distribution<double> dist(dof);
  double p = boost::math::cdf(boost::math::complement(dist, t));
  return std::max(p, kPValueFloor);
}

WelchProportionResult welch_proportion_test(size_t k1, size_t n1, size_t k2, size_t n2) {
  if (n1 < 2 || n2 < 2) {
    throw ArgumentError("Welch proportion test needs at least 2 indicators per sample");
  }
  if (k1 > n1 || k2 > n2) throw ArgumentError("link count exceeds pair count");

  WelchProportionResult r;
  r.p1 = double(k1) / double(n1);
  r.p2 = double(k2) / double(n2);

  // Unbiased Bernoulli sample variance p(1-p) n/(n-1).
  double s1 = r.p1 * (1.0 - r.p1) * double(n1) / double(n1 - 1);
  double s2 = r.p2 * (1.0 - r.p2) * double(n2) / double(n2 - 1);
  double a = s1 / double(n1);
  double b = s2 / double(n2);

  if (a + b == 0.0) {
    r.degenerate = true;
    return r;
  }

  r.t = (r.p1 - r.p2) / std::sqrt(a + b);
  double denom = 0.0;
  if (a > 0.0) denom += a * a / double(n1 - 1);
  if (b > 0.0) denom += b * b / double(n2 - 1);
  r.dof = (a + b) * (a + b) / denom;
  r.p_one_sided = student_t_sf(*r.t, r.dof);
  return r;
}

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
  size_t n = 0;
};

Moments moments_of(std::span<const double> x) {
  Moments m;
  m.n = x.size();
  if (m.n == 0) return m;
  double sum = 0.0;
  for (double v : x) sum += v;
  m.mean = sum / double(m.n);
  if (m.n >= 2) {
    double ss = 0.0;
    for (double v : x) {
      double d = v - m.mean;
      ss += d * d;
    }
    m.var = ss / double(m.n - 1);
  }
  return m;
}

}  // namespace

WelchMeanResult welch_mean_test_greater(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) {
    throw ArgumentError("Welch test needs at least 2 observations per sample");
  }
  Moments mx = moments_of(x);
  Moments my = moments_of(y);

  WelchMeanResult r;
  r.mean_x = mx.mean;
  r.mean_y = my.mean;

  double a = mx.var / double(mx.n);
  double b = my.var / double(my.n);
  if (a + b == 0.0) {
    r.degenerate = true;
    r.p_one_sided = mx.mean > my.mean ? kPValueFloor : (mx.mean == my.mean ? 0.5 : 1.0);
    return r;
  }
  r.t = (mx.mean - my.mean) / std::sqrt(a + b);
  double denom = 0.0;
  if (a > 0.0) denom += a * a / double(mx.n - 1);
  if (b > 0.0) denom += b * b / double(my.n - 1);
  r.dof = (a + b) * (a + b) / denom;
  r.p_one_sided = student_t_sf(*r.t, r.dof);
  return r;
}

OneSampleTResult one_sample_t_test(std::span<const double> x, double mu0) {
  if (x.size() < 2) throw ArgumentError("one-sample t-test needs at least 2 observations");
  Moments m = moments_of(x);

  OneSampleTResult r;
  r.mean = m.mean;
  r.n = m.n;
  r.dof = double(m.n - 1);
  if (m.var == 0.0) {
    r.degenerate = true;
    r.p_two_sided = (m.mean == mu0) ? 1.0 : kPValueFloor;
    return r;
  }
  r.t = (m.mean - mu0) / std::sqrt(m.var / double(m.n));
  r.p_two_sided = std::min(1.0, 2.0 * student_t_sf(std::fabs(*r.t), r.dof));
  return r;
}

std::vector<size_t> members_of(const CorrelationNetwork& net, const SectorLabel& label) {
  std::vector<size_t> out;
  for (size_t i = 0; i < net.nodes.size(); ++i) {
    const AssetRecord& node = net.nodes[i];
    if (node.kind != AssetKind::Stock || !node.sector) continue;
    bool match = (*node.sector == label) ||
                 (label.minor == SectorMinor::None && node.sector->major == label.major);
    if (match) out.push_back(i);
  }
  return out;
}

std::vector<SectorLabel> sectors_in(const CorrelationNetwork& net) {
  std::set<SectorLabel> seen;
  for (const auto& node : net.nodes) {
    if (node.kind == AssetKind::Stock && node.sector) seen.insert(*node.sector);
  }
  std::vector<SectorLabel> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end(),
            [](const SectorLabel& a, const SectorLabel& b) { return a.to_string() < b.to_string(); });
  return out;
}

namespace {

struct PairCount {
  size_t edges = 0;
  size_t defined = 0;
};

PairCount count_pairs(const CorrelationNetwork& net,
                      const std::vector<std::pair<size_t, size_t>>& pairs) {
  PairCount c;
  for (auto [i, j] : pairs) {
    if (!net.pair_defined(i, j)) continue;
    ++c.defined;
    if (net.has_edge(i, j)) ++c.edges;
  }
  return c;
}

std::vector<std::pair<size_t, size_t>> within_pairs(std::span<const size_t> group) {
  std::vector<std::pair<size_t, size_t>> out;
  for (size_t x = 0; x < group.size(); ++x)
    for (size_t y = x + 1; y < group.size(); ++y)
      out.emplace_back(group[x], group[y]);
  return out;
}

std::vector<std::pair<size_t, size_t>> cross_pairs(std::span<const size_t> a,
                                                   std::span<const size_t> b) {
  std::vector<std::pair<size_t, size_t>> out;
  for (size_t i : a)
    for (size_t j : b)
      if (i != j) out.emplace_back(std::min(i, j), std::max(i, j));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void require_disjoint(std::span<const size_t> a, std::span<const size_t> b,
                      const SectorLabel& la, const SectorLabel& lb) {
  std::set<size_t> sa(a.begin(), a.end());
  for (size_t j : b) {
    if (sa.count(j)) {
      throw ArgumentError("sectors " + la.to_string() + " and " + lb.to_string() +
                          " share members; density comparison needs disjoint sectors");
    }
  }
}

}  // namespace

LinkDensity link_density(const CorrelationNetwork& net, std::span<const size_t> group_a,
                         std::span<const size_t> group_b) {
  if (group_a.empty() || group_b.empty()) throw ArgumentError("density groups must be non-empty");
  bool same = std::equal(group_a.begin(), group_a.end(), group_b.begin(), group_b.end());
  auto pairs = same ? within_pairs(group_a) : cross_pairs(group_a, group_b);
  PairCount c = count_pairs(net, pairs);

  LinkDensity d;
  d.n_pairs = c.defined;
  if (c.defined > 0) d.density = double(c.edges) / double(c.defined);
  return d;
}

MergeTestResult merge_tstat(const CorrelationNetwork& net, const SectorLabel& a,
                            const SectorLabel& b, double alpha_merge) {
  auto ga = members_of(net, a);
  auto gb = members_of(net, b);
  if (ga.size() < 2 || gb.size() < 2) {
    throw ArgumentError("merge test needs >= 2 members per sector (" + a.to_string() + ": " +
                        std::to_string(ga.size()) + ", " + b.to_string() + ": " +
                        std::to_string(gb.size()) + ")");
  }
  require_disjoint(ga, gb, a, b);

  auto wa = within_pairs(ga);
  auto wb = within_pairs(gb);
  wa.insert(wa.end(), wb.begin(), wb.end());
  PairCount within = count_pairs(net, wa);
  PairCount between = count_pairs(net, cross_pairs(ga, gb));

  MergeTestResult r;
  r.sector_a = a;
  r.sector_b = b;
  r.n_within = within.defined;
  r.n_between = between.defined;
  if (within.defined > 0) r.density_within = double(within.edges) / double(within.defined);
  if (between.defined > 0) r.density_between = double(between.edges) / double(between.defined);

  if (within.defined < 2 || between.defined < 2) {
    r.degenerate = true;
    if (r.density_within && r.density_between) r.merged = *r.density_within <= *r.density_between;
    return r;
  }

  WelchProportionResult w =
      welch_proportion_test(within.edges, within.defined, between.edges, between.defined);
  if (w.degenerate) {
    r.degenerate = true;
    r.merged = *r.density_within <= *r.density_between;
    return r;
  }
  r.t = w.t;
  r.dof = w.dof;
  r.p_one_sided = w.p_one_sided;
  r.merged = *w.p_one_sided >= alpha_merge;
  return r;
}

SelfClusterResult self_clustering(const CorrelationNetwork& net, const SectorLabel& sector,
                                  std::span<const SectorLabel> others) {
  if (others.empty()) throw ArgumentError("self-clustering needs at least one other sector");
  auto ga = members_of(net, sector);
  if (ga.size() < 2) {
    throw ArgumentError("self-clustering needs >= 2 members in sector " + sector.to_string());
  }
  PairCount within = count_pairs(net, within_pairs(ga));

  SelfClusterResult r;
  r.sector = sector;
  for (const SectorLabel& other : others) {
    if (other == sector) continue;
    std::optional<double> t;
    auto gb = members_of(net, other);
    if (gb.size() >= 2) {
      require_disjoint(ga, gb, sector, other);
      PairCount between = count_pairs(net, cross_pairs(ga, gb));
      if (within.defined >= 2 && between.defined >= 2) {
        WelchProportionResult w =
            welch_proportion_test(within.edges, within.defined, between.edges, between.defined);
        if (!w.degenerate) t = w.t;
      }
    }
    if (!t) r.any_excluded = true;
    r.per_sector_t.emplace_back(other, t);
    if (t && (!r.t_min || *t < *r.t_min)) {
      r.t_min = t;
      r.argmin_sector = other;
    }
  }
  return r;
}

const char* to_string(LinkStatus s) {
  switch (s) {
    case LinkStatus::Linked: return "Linked";
    case LinkStatus::Unlinked: return "Unlinked";
    case LinkStatus::Indeterminate: return "Indeterminate";
  }
  return "?";
}

IndexLinkResult index_linkage(const CorrelationNetwork& net, const std::string& index_id,
                              const SectorLabel& sector) {
  auto idx = net.node_index(index_id);
  if (!idx) throw ArgumentError("index node '" + index_id + "' is not in the network");
  auto members = members_of(net, sector);
  if (members.size() < 2) {
    throw ArgumentError("index linkage needs >= 2 members in sector " + sector.to_string());
  }

  IndexLinkResult r;
  r.index_id = index_id;
  r.sector = sector;
  r.p0 = net.global_density();

  size_t n = 0, k = 0;
  for (size_t m : members) {
    if (m == *idx) continue;
    if (!net.pair_defined(*idx, m)) continue;
    ++n;
    if (net.has_edge(*idx, m)) ++k;
  }
  r.n = n;
  if (n == 0) {
    r.degenerate = true;
    return r;
  }
  r.p_hat = double(k) / double(n);

  double s2 = n >= 2 ? r.p_hat * (1.0 - r.p_hat) * double(n) / double(n - 1) : 0.0;
  if (n < 2 || s2 == 0.0) {
    r.degenerate = true;
    if (r.p_hat > r.p0) r.status = LinkStatus::Linked;
    else if (r.p_hat < r.p0) r.status = LinkStatus::Unlinked;
    else r.status = LinkStatus::Indeterminate;
    return r;
  }

  r.t = (r.p_hat - r.p0) / std::sqrt(s2 / double(n));
  if (*r.t > 4.0) r.status = LinkStatus::Linked;
  else if (*r.t < 2.0) r.status = LinkStatus::Unlinked;
  else r.status = LinkStatus::Indeterminate;
  return r;
}

TrendTestResult slope_trend_test(std::span<const double> series, std::string series_name) {
  const size_t n = series.size();
  if (n < 3) throw ArgumentError("trend test needs at least 3 points");

  double mean_x = double(n - 1) / 2.0;
  double mean_y = 0.0;
  for (double v : series) mean_y += v;
  mean_y /= double(n);

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dx = double(i) - mean_x;
    double dy = series[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }

  TrendTestResult r;
  r.series_name = std::move(series_name);
  r.n = n;
  r.slope = sxy / sxx;
  r.intercept = mean_y - r.slope * mean_x;

  double sse = std::max(0.0, syy - r.slope * sxy);
  if (sse == 0.0) {
    r.degenerate_fit = true;
    if (r.slope == 0.0) {
      r.t_slope = 0.0;
      r.p = 1.0;
    } else {
      r.t_slope = std::numeric_limits<double>::infinity();
      r.p = kPValueFloor;
    }
    return r;
  }

  double se = std::sqrt(sse / double(n - 2) / sxx);
  r.t_slope = r.slope / se;
  r.p = std::min(1.0, 2.0 * student_t_sf(std::fabs(r.t_slope), double(n - 2)));
  return r;
}

SignChangeResult sign_change_test(std::span<const Date> quarters, std::span<const double> values,
                                  int year) {
  if (quarters.size() != values.size()) {
    throw ArgumentError("sign-change series has mismatched quarter/value lengths");
  }
  std::vector<double> pre, in_year;
  for (size_t i = 0; i < quarters.size(); ++i) {
    if (quarters[i].year() < year) pre.push_back(values[i]);
    else if (quarters[i].year() == year) in_year.push_back(values[i]);
  }
  if (in_year.size() < 2) {
    throw ArgumentError("sign-change test needs >= 2 points inside year " + std::to_string(year) +
                        ", got " + std::to_string(in_year.size()));
  }
  if (pre.size() < 4) {
    throw ArgumentError("sign-change test needs >= 4 points before year " + std::to_string(year) +
                        ", got " + std::to_string(pre.size()));
  }

  OneSampleTResult tp = one_sample_t_test(pre, 0.0);
  OneSampleTResult ty = one_sample_t_test(in_year, 0.0);

  SignChangeResult r;
  r.pre_mean = tp.mean;
  r.year_mean = ty.mean;
  r.p_pre = tp.p_two_sided;
  r.p_year = ty.p_two_sided;
  r.n_pre = pre.size();
  r.n_year = in_year.size();

  bool opposite = (tp.mean > 0.0 && ty.mean < 0.0) || (tp.mean < 0.0 && ty.mean > 0.0);
  r.changed = opposite && tp.p_two_sided < 0.05 && ty.p_two_sided < 0.05;

  if (tp.mean == 0.0) {
    r.p_sign = 1.0;
    return r;
  }
  // One-sided p that the year's mean lies opposite the pre-year sign.
  if (ty.degenerate || !ty.t) {
    r.p_sign = opposite ? kPValueFloor : 1.0;
  } else {
    double direction = tp.mean > 0.0 ? -1.0 : 1.0;
    r.p_sign = student_t_sf(direction * *ty.t, ty.dof);
  }
  return r;
}

DeclineTestResult decline_coincidence_test(std::span<const double> avg_corr,
                                           std::span<const double> market_return) {
  if (avg_corr.size() != market_return.size()) {
    throw ArgumentError("decline test series must align on the same quarters");
  }
  std::vector<double> decline, rise;
  for (size_t i = 0; i < avg_corr.size(); ++i) {
    if (market_return[i] < 0.0) decline.push_back(avg_corr[i]);
    else rise.push_back(avg_corr[i]);
  }
  if (decline.size() < 4) {
    throw ArgumentError("decline test needs >= 4 decline quarters, got " +
                        std::to_string(decline.size()));
  }
  if (rise.size() < 4) {
    throw ArgumentError("decline test needs >= 4 rise quarters, got " +
                        std::to_string(rise.size()));
  }

  WelchMeanResult w = welch_mean_test_greater(decline, rise);
  DeclineTestResult r;
  r.t = w.t;
  r.dof = w.dof;
  r.p_one_sided = w.p_one_sided;
  r.degenerate = w.degenerate;
  r.n_decline = decline.size();
  r.n_rise = rise.size();
  r.mean_decline = w.mean_x;
  r.mean_rise = w.mean_y;
  return r;
}

}  // namespace corrnet
