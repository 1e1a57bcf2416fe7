#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corrnet/dates.hpp"

namespace corrnet {

enum class AssetKind : uint8_t { Stock, Index };

enum class SectorMajor : uint8_t { Technology, BasicMaterials, Finance };
enum class SectorMinor : uint8_t { Oil, OtherMaterials, RealEstate, OtherFinance, None };

/// Economic sector assignment. Minor subsectors are only valid under their
/// major: Oil/OtherMaterials under BasicMaterials, RealEstate/OtherFinance
/// under Finance; Technology carries no minor.
struct SectorLabel {
  SectorMajor major = SectorMajor::Technology;
  SectorMinor minor = SectorMinor::None;

  auto operator<=>(const SectorLabel&) const = default;

  /// "Finance", "Finance.RealEstate", ...
  std::string to_string() const;
  /// Drops the minor subsector.
  SectorLabel majored() const { return {major, SectorMinor::None}; }

  static SectorLabel parse(const std::string& text);
  static SectorLabel from_parts(const std::string& major, const std::string& minor);
  static void validate(SectorMajor major, SectorMinor minor);
};

struct AssetRecord {
  std::string id;
  AssetKind kind = AssetKind::Stock;
  std::optional<SectorLabel> sector;  // required for Stock, absent for Index
};

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

/// Aligned [date x asset] matrix of adjusted close prices. Missing cells
/// hold NaN; present prices are strictly positive.
struct PricePanel {
  std::vector<Date> dates;
  std::vector<AssetRecord> assets;
  std::vector<double> values;  // row-major, dates.size() * assets.size()

  double at(size_t d, size_t a) const { return values[d * assets.size() + a]; }
  double& at(size_t d, size_t a) { return values[d * assets.size() + a]; }
  size_t n_dates() const { return dates.size(); }
  size_t n_assets() const { return assets.size(); }
  std::optional<size_t> asset_index(const std::string& id) const;
};

/// Daily log returns, same layout as PricePanel. A cell is present only when
/// the price is present on both the date and the immediately preceding
/// panel date; gaps are never spanned.
struct ReturnPanel {
  std::vector<Date> dates;
  std::vector<AssetRecord> assets;
  std::vector<double> values;

  double at(size_t d, size_t a) const { return values[d * assets.size() + a]; }
  double& at(size_t d, size_t a) { return values[d * assets.size() + a]; }
  size_t n_dates() const { return dates.size(); }
  size_t n_assets() const { return assets.size(); }
  std::optional<size_t> asset_index(const std::string& id) const;
};

struct ExogenousSeries {
  std::string name;
  std::string units;
  std::vector<Date> dates;   // strictly increasing
  std::vector<double> values;

  /// First observation on or after `d`, if any.
  std::optional<std::pair<Date, double>> at_or_after(Date d) const;
};

struct SectorMapEntry {
  AssetKind kind = AssetKind::Stock;
  std::optional<SectorLabel> sector;
};
using SectorMap = std::map<std::string, SectorMapEntry>;

enum class PriceFormat { Long, Wide };

/// Long rows are (date, asset_id, adjusted_close); wide files carry a date
/// column plus one column per asset, empty cell = missing. Dates are the
/// sorted union of all observed dates.
PricePanel load_prices(const std::string& path, PriceFormat format);

void write_wide_csv(const PricePanel& panel, const std::string& path);
void write_wide_csv(const ReturnPanel& panel, const std::string& path);

ReturnPanel compute_log_returns(const PricePanel& panel);

/// CSV rows (asset_id, major, minor); minor may be empty. `major` may also
/// be the sentinel "Index" for sector-agnostic index assets (spot oil,
/// treasury bonds), in which case minor must be empty.
SectorMap load_sector_map(const std::string& path);

/// Attaches kind/sector from `map` to every panel asset. Panel assets
/// absent from the map are a data error.
void apply_sector_map(std::vector<AssetRecord>& assets, const SectorMap& map);

/// CSV rows (date, value); a sidecar metadata line `#units: ...` before the
/// header documents the units.
ExogenousSeries load_exogenous(const std::string& path, const std::string& name);

/// Quarter-start spread (LIBOR(q) - FFR(q)) / FFR(q); the first observation
/// on or after each quarter date is used.
ExogenousSeries derive_libor_spread(const ExogenousSeries& libor, const ExogenousSeries& ffr,
                                    const std::vector<Date>& quarters);

}  // namespace corrnet
