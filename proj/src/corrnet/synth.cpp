#include "corrnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "corrnet/csv.hpp"
#include "corrnet/errors.hpp"
#include "corrnet/kvconfig.hpp"

namespace corrnet {

void FactorModelSpec::validate() const {
  if (sectors.empty()) throw ArgumentError("factor model needs at least one sector");
  std::set<SectorLabel> seen;
  for (const auto& s : sectors) {
    if (s.count < 2) {
      throw ArgumentError("sector " + s.label.to_string() + " needs >= 2 members, has " +
                          std::to_string(s.count));
    }
    if (!std::isfinite(s.beta_sector)) {
      throw ArgumentError("sector loading for " + s.label.to_string() + " must be finite");
    }
    if (!seen.insert(s.label).second) {
      throw ArgumentError("sector " + s.label.to_string() + " declared twice");
    }
  }
  if (!std::isfinite(beta_market)) throw ArgumentError("market loading must be finite");
  if (!(sigma_idio > 0.0)) throw ArgumentError("idiosyncratic volatility must be positive");
  if (n_dates < 2) throw ArgumentError("factor model needs at least 2 dates");
  if (!start_date.valid()) throw ArgumentError("factor model start date is invalid");
}

std::vector<AssetRecord> FactorModelSpec::asset_records() const {
  std::vector<AssetRecord> out;
  for (const auto& s : sectors) {
    std::string leaf = s.label.to_string();
    size_t dot = leaf.find('.');
    if (dot != std::string::npos) leaf = leaf.substr(dot + 1);
    for (int i = 0; i < s.count; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "_%02d", i);
      out.push_back({leaf + buf, AssetKind::Stock, s.label});
    }
  }
  return out;
}

namespace {

bool is_weekday(Date d) {
  // 1970-01-01 was a Thursday; day 3 after it is the first Sunday.
  int dow = ((d.days() % 7) + 7) % 7;  // 0 = Thursday
  return dow != 2 && dow != 3;         // Saturday, Sunday
}

std::vector<Date> weekday_calendar(Date start, int n) {
  std::vector<Date> out;
  Date d = start;
  while (int(out.size()) < n) {
    if (is_weekday(d)) out.push_back(d);
    d = d.next_day();
  }
  return out;
}

/// Deterministic standard normal: Box-Muller on two mt19937_64 words per
/// draw; only the cosine branch is used.
class GaussianStream {
 public:
  explicit GaussianStream(uint64_t seed) : rng_(seed) {}

  double next() {
    double u1 = (double(rng_() >> 11) + 1.0) * 0x1p-53;  // (0, 1]
    double u2 = double(rng_() >> 11) * 0x1p-53;          // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

ReturnPanel generate_returns(const FactorModelSpec& spec, const RegimeSchedule& schedule) {
  spec.validate();

  std::vector<Date> dates = weekday_calendar(spec.start_date, spec.n_dates);
  for (const auto& ev : schedule.events) {
    if (ev.date < dates.front() || dates.back() < ev.date) {
      throw ArgumentError("schedule event on " + ev.date.to_string() +
                          " lies outside the panel range " + dates.front().to_string() + ".." +
                          dates.back().to_string());
    }
  }

  std::map<SectorLabel, size_t> sector_idx;
  for (size_t s = 0; s < spec.sectors.size(); ++s) sector_idx[spec.sectors[s].label] = s;
  auto sector_of = [&](const SectorLabel& label) {
    auto it = sector_idx.find(label);
    if (it == sector_idx.end()) {
      throw ArgumentError("schedule references undeclared sector " + label.to_string());
    }
    return it->second;
  };

  std::vector<RegimeEvent> events = schedule.events;
  std::stable_sort(events.begin(), events.end(),
                   [](const RegimeEvent& a, const RegimeEvent& b) { return a.date < b.date; });

  ReturnPanel panel;
  panel.dates = dates;
  panel.assets = spec.asset_records();
  panel.values.assign(panel.n_dates() * panel.n_assets(), 0.0);

  const size_t n_sectors = spec.sectors.size();
  std::vector<size_t> asset_sector;
  for (const auto& s : panel.assets) asset_sector.push_back(sector_of(*s.sector));

  // Mutable regime state.
  double beta_market = spec.beta_market;
  std::vector<double> beta_sector(n_sectors);
  for (size_t s = 0; s < n_sectors; ++s) beta_sector[s] = spec.sectors[s].beta_sector;
  std::vector<size_t> factor_alias(n_sectors);
  for (size_t s = 0; s < n_sectors; ++s) factor_alias[s] = s;
  auto resolve_factor = [&](size_t s) {
    while (factor_alias[s] != s) s = factor_alias[s];
    return s;
  };

  GaussianStream gauss(spec.seed);
  std::vector<double> sector_factor(n_sectors);
  size_t next_event = 0;

  for (size_t d = 0; d < panel.n_dates(); ++d) {
    double shock = 0.0;
    // Consume every event dated on or before today; an event dated on a
    // non-trading day takes effect on the next panel date.
    while (next_event < events.size() && events[next_event].date <= dates[d]) {
      const RegimeEvent& ev = events[next_event];
      switch (ev.kind) {
        case RegimeEvent::Kind::MergeSectors:
          factor_alias[sector_of(ev.sector_b)] = sector_of(ev.sector_a);
          break;
        case RegimeEvent::Kind::SetMarketBeta:
          beta_market = ev.value;
          break;
        case RegimeEvent::Kind::SetSectorBeta:
          beta_sector[sector_of(ev.sector_a)] = ev.value;
          break;
        case RegimeEvent::Kind::ShockDay:
          shock += ev.value;
          break;
      }
      ++next_event;
    }

    double market_factor = gauss.next();
    for (size_t s = 0; s < n_sectors; ++s) sector_factor[s] = gauss.next();

    for (size_t a = 0; a < panel.n_assets(); ++a) {
      size_t s = asset_sector[a];
      double f_s = sector_factor[resolve_factor(s)];
      double eps = gauss.next();
      panel.at(d, a) =
          beta_market * market_factor + beta_sector[s] * f_s + spec.sigma_idio * eps + shock;
    }
  }
  return panel;
}

namespace {

struct AssetBeta {
  size_t sector;
  double beta;
};

std::vector<AssetBeta> asset_betas(const FactorModelSpec& spec) {
  std::vector<AssetBeta> out;
  for (size_t s = 0; s < spec.sectors.size(); ++s) {
    for (int i = 0; i < spec.sectors[s].count; ++i) {
      out.push_back({s, spec.sectors[s].beta_sector});
    }
  }
  return out;
}

double analytic_pair_rho(const FactorModelSpec& spec, const AssetBeta& a, const AssetBeta& b) {
  double bm2 = spec.beta_market * spec.beta_market;
  double cov = bm2 + (a.sector == b.sector ? a.beta * b.beta : 0.0);
  double var_a = bm2 + a.beta * a.beta + spec.sigma_idio * spec.sigma_idio;
  double var_b = bm2 + b.beta * b.beta + spec.sigma_idio * spec.sigma_idio;
  return cov / std::sqrt(var_a * var_b);
}

}  // namespace

double analytic_correlation(const FactorModelSpec& spec, size_t i, size_t j) {
  spec.validate();
  auto betas = asset_betas(spec);
  if (i >= betas.size() || j >= betas.size()) throw ArgumentError("asset index out of range");
  if (i == j) throw ArgumentError("analytic correlation needs two distinct assets");
  return analytic_pair_rho(spec, betas[i], betas[j]);
}

ReturnPanel inject_shock_days(const ReturnPanel& panel, const std::vector<Date>& dates,
                              double magnitude) {
  std::set<size_t> rows;
  for (Date d : dates) {
    auto it = std::lower_bound(panel.dates.begin(), panel.dates.end(), d);
    if (it == panel.dates.end() || *it != d) {
      throw ArgumentError("shock date " + d.to_string() + " is not a panel date");
    }
    rows.insert(size_t(it - panel.dates.begin()));
  }

  ReturnPanel out = panel;
  for (size_t d : rows) {
    for (size_t a = 0; a < out.n_assets(); ++a) {
      double& cell = out.at(d, a);
      if (!is_missing(cell)) cell += magnitude;
    }
  }
  return out;
}

PricePanel to_price_panel(const ReturnPanel& returns, double base_price) {
  PricePanel out;
  out.assets = returns.assets;
  out.dates.reserve(returns.n_dates() + 1);
  // Seed date one weekday before the first return date.
  Date seed = returns.dates.empty() ? Date::from_ymd(2000, 1, 3) : returns.dates.front();
  if (!returns.dates.empty()) {
    do {
      seed = Date::from_days(seed.days() - 1);
    } while (!is_weekday(seed));
  }
  out.dates.push_back(seed);
  out.dates.insert(out.dates.end(), returns.dates.begin(), returns.dates.end());

  out.values.assign(out.n_dates() * out.n_assets(), kMissing);
  for (size_t a = 0; a < out.n_assets(); ++a) out.at(0, a) = base_price;
  for (size_t d = 0; d < returns.n_dates(); ++d) {
    for (size_t a = 0; a < returns.n_assets(); ++a) {
      double prev = out.at(d, a);
      double r = returns.at(d, a);
      if (!is_missing(prev) && !is_missing(r)) out.at(d + 1, a) = prev * std::exp(r);
    }
  }
  return out;
}

namespace {

SectorSpecEntry parse_sector_entry(const std::string& text, const std::string& source) {
  auto parts = split_list(text, ':');
  if (parts.size() != 3) {
    throw ParseError(source + ": sector entry '" + text + "' must be 'Label:count:beta_sector'");
  }
  SectorSpecEntry entry;
  entry.label = SectorLabel::parse(parts[0]);
  entry.count = int(parse_long(parts[1], source + ": sector count"));
  entry.beta_sector = parse_double(parts[2], source + ": sector loading");
  return entry;
}

RegimeEvent parse_event(const std::string& text, const std::string& source) {
  auto tokens = split_list(text, ' ');
  if (tokens.size() < 2) {
    throw ParseError(source + ": event '" + text + "' must be '<date> <kind> <args...>'");
  }
  RegimeEvent ev;
  ev.date = Date::parse(tokens[0]);
  const std::string& kind = tokens[1];
  if (kind == "merge_sectors") {
    if (tokens.size() != 4) throw ParseError(source + ": merge_sectors needs two sector labels");
    ev.kind = RegimeEvent::Kind::MergeSectors;
    ev.sector_a = SectorLabel::parse(tokens[2]);
    ev.sector_b = SectorLabel::parse(tokens[3]);
  } else if (kind == "set_market_beta") {
    if (tokens.size() != 3) throw ParseError(source + ": set_market_beta needs one value");
    ev.kind = RegimeEvent::Kind::SetMarketBeta;
    ev.value = parse_double(tokens[2], source + ": set_market_beta");
  } else if (kind == "set_sector_beta") {
    if (tokens.size() != 4) throw ParseError(source + ": set_sector_beta needs a sector and value");
    ev.kind = RegimeEvent::Kind::SetSectorBeta;
    ev.sector_a = SectorLabel::parse(tokens[2]);
    ev.value = parse_double(tokens[3], source + ": set_sector_beta");
  } else if (kind == "shock_day") {
    if (tokens.size() != 3) throw ParseError(source + ": shock_day needs one magnitude");
    ev.kind = RegimeEvent::Kind::ShockDay;
    ev.value = parse_double(tokens[2], source + ": shock_day");
  } else {
    throw ParseError(source + ": unknown event kind '" + kind + "'");
  }
  return ev;
}

}  // namespace

std::pair<FactorModelSpec, RegimeSchedule> load_synth_spec(const std::string& path) {
  KvConfig cfg = KvConfig::load(path);

  FactorModelSpec spec;
  spec.beta_market = cfg.get_double("beta_market", 0.0);
  spec.sigma_idio = cfg.get_double("sigma_idio", 1.0);
  spec.n_dates = int(cfg.get_long("dates", 0));
  spec.seed = uint64_t(cfg.get_long("seed", 0));
  if (auto s = cfg.get("start_date")) spec.start_date = Date::parse(*s);
  for (const auto& entry : cfg.get_all("sector")) {
    spec.sectors.push_back(parse_sector_entry(entry, path));
  }

  RegimeSchedule schedule;
  for (const auto& entry : cfg.get_all("event")) {
    schedule.events.push_back(parse_event(entry, path));
  }
  spec.validate();
  return {std::move(spec), std::move(schedule)};
}

void write_analytic_truth_csv(const FactorModelSpec& spec, const std::string& path) {
  spec.validate();
  auto assets = spec.asset_records();
  auto betas = asset_betas(spec);
  CsvWriter w(path);
  w.write_row({"asset_i", "asset_j", "rho"});
  for (size_t i = 0; i < assets.size(); ++i) {
    for (size_t j = i + 1; j < assets.size(); ++j) {
      w.write_row(
          {assets[i].id, assets[j].id, format_double(analytic_pair_rho(spec, betas[i], betas[j]))});
    }
  }
  w.close();
}

}  // namespace corrnet
