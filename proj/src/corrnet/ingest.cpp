#include "corrnet/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "corrnet/csv.hpp"
#include "corrnet/errors.hpp"
#include "corrnet/kvconfig.hpp"

namespace corrnet {

std::string SectorLabel::to_string() const {
  static const char* majors[] = {"Technology", "BasicMaterials", "Finance"};
  static const char* minors[] = {"Oil", "OtherMaterials", "RealEstate", "OtherFinance"};
  std::string out = majors[size_t(major)];
  if (minor != SectorMinor::None) {
    out += '.';
    out += minors[size_t(minor)];
  }
  return out;
}

namespace {

std::optional<SectorMajor> parse_major(const std::string& s) {
  if (s == "Technology") return SectorMajor::Technology;
  if (s == "BasicMaterials") return SectorMajor::BasicMaterials;
  if (s == "Finance") return SectorMajor::Finance;
  return std::nullopt;
}

std::optional<SectorMinor> parse_minor(const std::string& s) {
  if (s.empty() || s == "None") return SectorMinor::None;
  if (s == "Oil") return SectorMinor::Oil;
  if (s == "OtherMaterials") return SectorMinor::OtherMaterials;
  if (s == "RealEstate") return SectorMinor::RealEstate;
  if (s == "OtherFinance") return SectorMinor::OtherFinance;
  return std::nullopt;
}

}  // namespace

void SectorLabel::validate(SectorMajor major, SectorMinor minor) {
  bool ok = false;
  switch (minor) {
    case SectorMinor::None:
      ok = true;
      break;
    case SectorMinor::Oil:
    case SectorMinor::OtherMaterials:
      ok = (major == SectorMajor::BasicMaterials);
      break;
    case SectorMinor::RealEstate:
    case SectorMinor::OtherFinance:
      ok = (major == SectorMajor::Finance);
      break;
  }
  if (!ok) {
    throw DataError("minor sector '" + SectorLabel{major, minor}.to_string() +
                    "' is invalid under its major sector");
  }
}

SectorLabel SectorLabel::from_parts(const std::string& major, const std::string& minor) {
  auto maj = parse_major(major);
  if (!maj) throw ParseError("unknown major sector '" + major + "'");
  auto min = parse_minor(minor);
  if (!min) throw ParseError("unknown minor sector '" + minor + "'");
  validate(*maj, *min);
  return {*maj, *min};
}

SectorLabel SectorLabel::parse(const std::string& text) {
  size_t dot = text.find('.');
  if (dot == std::string::npos) return from_parts(text, "");
  return from_parts(text.substr(0, dot), text.substr(dot + 1));
}

std::optional<size_t> PricePanel::asset_index(const std::string& id) const {
  for (size_t i = 0; i < assets.size(); ++i)
    if (assets[i].id == id) return i;
  return std::nullopt;
}

std::optional<size_t> ReturnPanel::asset_index(const std::string& id) const {
  for (size_t i = 0; i < assets.size(); ++i)
    if (assets[i].id == id) return i;
  return std::nullopt;
}

std::optional<std::pair<Date, double>> ExogenousSeries::at_or_after(Date d) const {
  auto it = std::lower_bound(dates.begin(), dates.end(), d);
  if (it == dates.end()) return std::nullopt;
  size_t idx = size_t(it - dates.begin());
  return std::make_pair(dates[idx], values[idx]);
}

namespace {

PricePanel load_prices_long(const std::string& path) {
  CsvReader reader(path);
  std::vector<std::string> row;
  if (!reader.next_row(row)) throw ParseError(path + ": empty price file");
  if (row.size() != 3 || row[0] != "date" || row[1] != "asset_id" || row[2] != "adjusted_close") {
    throw ParseError(path + ": expected header 'date,asset_id,adjusted_close'");
  }

  struct Obs {
    Date date;
    size_t asset;
    double price;
  };
  std::vector<Obs> obs;
  std::vector<AssetRecord> assets;
  std::map<std::string, size_t> asset_idx;
  std::set<Date> dates;

  while (reader.next_row(row)) {
    const std::string where = path + ":" + std::to_string(reader.line_number());
    if (row.size() != 3) throw ParseError(where + ": expected 3 fields");
    auto date = Date::try_parse(row[0]);
    if (!date) throw ParseError(where + ": bad date '" + row[0] + "'");
    if (row[1].empty()) throw ParseError(where + ": empty asset_id");
    double price = parse_double(row[2], where);
    if (!(price > 0.0) || !std::isfinite(price)) {
      throw DataError(where + ": non-positive price " + row[2] + " for asset '" + row[1] +
                      "' on " + row[0]);
    }
    auto [it, inserted] = asset_idx.try_emplace(row[1], assets.size());
    if (inserted) assets.push_back({row[1], AssetKind::Stock, std::nullopt});
    obs.push_back({*date, it->second, price});
    dates.insert(*date);
  }

  PricePanel panel;
  panel.dates.assign(dates.begin(), dates.end());
  panel.assets = std::move(assets);
  panel.values.assign(panel.n_dates() * panel.n_assets(), kMissing);

  std::map<Date, size_t> date_idx;
  for (size_t i = 0; i < panel.dates.size(); ++i) date_idx[panel.dates[i]] = i;
  for (const Obs& o : obs) {
    double& cell = panel.at(date_idx[o.date], o.asset);
    if (!is_missing(cell)) {
      throw DataError(path + ": duplicate entry for asset '" + panel.assets[o.asset].id +
                      "' on " + o.date.to_string());
    }
    cell = o.price;
  }
  return panel;
}

PricePanel load_prices_wide(const std::string& path) {
  CsvReader reader(path);
  std::vector<std::string> row;
  if (!reader.next_row(row)) throw ParseError(path + ": empty price file");
  if (row.size() < 2 || row[0] != "date") {
    throw ParseError(path + ": expected header 'date,<asset_id>,...'");
  }

  PricePanel panel;
  std::set<std::string> seen_ids;
  for (size_t c = 1; c < row.size(); ++c) {
    if (row[c].empty()) throw ParseError(path + ": empty asset_id in header column " +
                                         std::to_string(c + 1));
    if (!seen_ids.insert(row[c]).second) {
      throw DataError(path + ": duplicate asset column '" + row[c] + "'");
    }
    panel.assets.push_back({row[c], AssetKind::Stock, std::nullopt});
  }

  std::vector<std::pair<Date, std::vector<double>>> rows;
  std::set<Date> seen_dates;
  while (reader.next_row(row)) {
    const std::string where = path + ":" + std::to_string(reader.line_number());
    if (row.size() != panel.assets.size() + 1) {
      throw ParseError(where + ": expected " + std::to_string(panel.assets.size() + 1) +
                       " fields, got " + std::to_string(row.size()));
    }
    auto date = Date::try_parse(row[0]);
    if (!date) throw ParseError(where + ": bad date '" + row[0] + "'");
    if (!seen_dates.insert(*date).second) {
      throw DataError(where + ": duplicate date " + row[0]);
    }
    std::vector<double> vals(panel.assets.size(), kMissing);
    for (size_t c = 1; c < row.size(); ++c) {
      if (row[c].empty()) continue;
      double price = parse_double(row[c], where);
      if (!(price > 0.0) || !std::isfinite(price)) {
        throw DataError(where + ": non-positive price " + row[c] + " for asset '" +
                        panel.assets[c - 1].id + "' on " + row[0]);
      }
      vals[c - 1] = price;
    }
    rows.emplace_back(*date, std::move(vals));
  }

  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  panel.values.reserve(rows.size() * panel.assets.size());
  for (auto& [date, vals] : rows) {
    panel.dates.push_back(date);
    panel.values.insert(panel.values.end(), vals.begin(), vals.end());
  }
  return panel;
}

template <typename PanelT>
void write_wide_csv_impl(const PanelT& panel, const std::string& path) {
  CsvWriter w(path);
  std::vector<std::string> row;
  row.push_back("date");
  for (const auto& a : panel.assets) row.push_back(a.id);
  w.write_row(row);
  for (size_t d = 0; d < panel.n_dates(); ++d) {
    row.clear();
    row.push_back(panel.dates[d].to_string());
    for (size_t a = 0; a < panel.n_assets(); ++a) {
      double v = panel.at(d, a);
      row.push_back(is_missing(v) ? "" : format_double(v));
    }
    w.write_row(row);
  }
  w.close();
}

}  // namespace

PricePanel load_prices(const std::string& path, PriceFormat format) {
  return format == PriceFormat::Long ? load_prices_long(path) : load_prices_wide(path);
}

void write_wide_csv(const PricePanel& panel, const std::string& path) {
  write_wide_csv_impl(panel, path);
}

void write_wide_csv(const ReturnPanel& panel, const std::string& path) {
  write_wide_csv_impl(panel, path);
}

ReturnPanel compute_log_returns(const PricePanel& panel) {
  if (panel.n_dates() < 2) {
    throw ArgumentError("log returns need at least 2 dates, panel has " +
                        std::to_string(panel.n_dates()));
  }
  ReturnPanel out;
  out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
  out.assets = panel.assets;
  out.values.assign(out.n_dates() * out.n_assets(), kMissing);
  for (size_t d = 1; d < panel.n_dates(); ++d) {
    for (size_t a = 0; a < panel.n_assets(); ++a) {
      double prev = panel.at(d - 1, a);
      double cur = panel.at(d, a);
      if (!is_missing(prev) && !is_missing(cur)) {
        out.at(d - 1, a) = std::log(cur / prev);
      }
    }
  }
  return out;
}

SectorMap load_sector_map(const std::string& path) {
  CsvReader reader(path);
  std::vector<std::string> row;
  if (!reader.next_row(row)) {
    log_warning(path + ": empty sector map");
    return {};
  }
  if (row.size() != 3 || row[0] != "asset_id" || row[1] != "major" || row[2] != "minor") {
    throw ParseError(path + ": expected header 'asset_id,major,minor'");
  }

  SectorMap map;
  size_t n_rows = 0;
  while (reader.next_row(row)) {
    ++n_rows;
    const std::string where = path + ":" + std::to_string(reader.line_number());
    if (row.size() != 3) throw ParseError(where + ": expected 3 fields");
    if (row[0].empty()) throw ParseError(where + ": empty asset_id");

    SectorMapEntry entry;
    if (row[1] == "Index") {
      if (!row[2].empty() && row[2] != "None") {
        throw DataError(where + ": index asset '" + row[0] + "' must not carry a minor sector");
      }
      entry = {AssetKind::Index, std::nullopt};
    } else {
      entry = {AssetKind::Stock, SectorLabel::from_parts(row[1], row[2])};
    }

    auto [it, inserted] = map.try_emplace(row[0], entry);
    if (!inserted && (it->second.kind != entry.kind || it->second.sector != entry.sector)) {
      throw DataError(where + ": asset '" + row[0] + "' listed twice with different labels");
    }
  }
  if (n_rows == 0) log_warning(path + ": sector map has a header but no rows");
  return map;
}

void apply_sector_map(std::vector<AssetRecord>& assets, const SectorMap& map) {
  for (auto& asset : assets) {
    auto it = map.find(asset.id);
    if (it == map.end()) {
      throw DataError("asset '" + asset.id + "' has no sector map entry");
    }
    asset.kind = it->second.kind;
    asset.sector = it->second.sector;
  }
}

ExogenousSeries load_exogenous(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);

  ExogenousSeries series;
  series.name = name;

  std::string line;
  size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("#units:", 0) == 0) {
      series.units = trim(line.substr(7));
      continue;
    }
    if (line[0] == '#') continue;
    auto fields = split_csv_line(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (!header_seen) {
      if (fields.size() != 2 || fields[0] != "date" || fields[1] != "value") {
        throw ParseError(where + ": expected header 'date,value'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2) throw ParseError(where + ": expected 2 fields");
    auto date = Date::try_parse(fields[0]);
    if (!date) throw ParseError(where + ": bad date '" + fields[0] + "'");
    if (!series.dates.empty() && !(series.dates.back() < *date)) {
      throw DataError(where + ": dates must be strictly increasing (duplicate or reordered " +
                      fields[0] + ")");
    }
    series.dates.push_back(*date);
    series.values.push_back(parse_double(fields[1], where));
  }
  if (!header_seen) throw ParseError(path + ": empty exogenous series file");
  return series;
}

ExogenousSeries derive_libor_spread(const ExogenousSeries& libor, const ExogenousSeries& ffr,
                                    const std::vector<Date>& quarters) {
  ExogenousSeries out;
  out.name = "libor_spread";
  out.units = "dimensionless";
  for (Date q : quarters) {
    auto lv = libor.at_or_after(q);
    auto fv = ffr.at_or_after(q);
    if (!lv) throw DataError("LIBOR series does not cover quarter " + q.to_string());
    if (!fv) throw DataError("Fed Funds series does not cover quarter " + q.to_string());
    if (fv->second == 0.0) {
      throw ComputeError("Fed Funds rate is zero at quarter " + q.to_string() +
                         "; spread is undefined");
    }
    out.dates.push_back(q);
    out.values.push_back((lv->second - fv->second) / fv->second);
  }
  return out;
}

}  // namespace corrnet
