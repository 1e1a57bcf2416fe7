#include "corrnet/corrwin.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "corrnet/csv.hpp"
#include "corrnet/errors.hpp"

namespace corrnet {

void WindowSpec::validate() const {
  if (length_months < 1) throw ArgumentError("window length must be >= 1 month");
  if (shift_months < 1) throw ArgumentError("window shift must be >= 1 month");
  if (!start.valid() || !end.valid()) throw ArgumentError("window range dates are invalid");
  if (end < start) throw ArgumentError("window range end precedes start");
}

std::vector<DateWindow> enumerate_windows(const WindowSpec& spec) {
  spec.validate();
  std::vector<DateWindow> out;
  if (spec.mode == WindowMode::Rolling) {
    for (int i = 0;; ++i) {
      Date ws = spec.start.add_months(i * spec.shift_months);
      if (spec.end < ws) break;
      out.push_back({ws, ws.add_months(spec.length_months)});
    }
  } else {
    for (int y = spec.start.year(); y <= spec.end.year(); ++y) {
      DateWindow w{Date::from_ymd(y, 1, 1), Date::from_ymd(y + 1, 1, 1)};
      if (w.end <= spec.start || spec.end < w.start) continue;
      out.push_back(w);
    }
  }
  return out;
}

namespace {

std::pair<size_t, size_t> window_date_span(const ReturnPanel& panel, DateWindow window) {
  auto lo = std::lower_bound(panel.dates.begin(), panel.dates.end(), window.start);
  auto hi = std::lower_bound(panel.dates.begin(), panel.dates.end(), window.end);
  return {size_t(lo - panel.dates.begin()), size_t(hi - panel.dates.begin())};
}

ReturnPanel restrict_to_dates(const ReturnPanel& panel, std::span<const size_t> date_idx) {
  ReturnPanel out;
  out.assets = panel.assets;
  out.dates.reserve(date_idx.size());
  out.values.reserve(date_idx.size() * panel.n_assets());
  for (size_t d : date_idx) {
    out.dates.push_back(panel.dates[d]);
    const double* row = panel.values.data() + d * panel.n_assets();
    out.values.insert(out.values.end(), row, row + panel.n_assets());
  }
  return out;
}

}  // namespace

TrimResult trim_extreme_days(const ReturnPanel& panel, DateWindow window, int k) {
  if (k < 0) throw ArgumentError("trim count must be >= 0");
  auto [lo, hi] = window_date_span(panel, window);
  size_t n_days = hi - lo;
  if (n_days == 0) {
    throw ArgumentError("window " + window.label() + " holds no return dates");
  }
  if (size_t(k) >= n_days) {
    throw ArgumentError("trim count " + std::to_string(k) + " must be below the window length " +
                        std::to_string(n_days));
  }

  // |cross-sectional mean return| per day; days with no data rank lowest.
  std::vector<std::pair<double, size_t>> magnitude;
  magnitude.reserve(n_days);
  for (size_t d = lo; d < hi; ++d) {
    double sum = 0.0;
    size_t n = 0;
    for (size_t a = 0; a < panel.n_assets(); ++a) {
      double v = panel.at(d, a);
      if (!is_missing(v)) {
        sum += v;
        ++n;
      }
    }
    magnitude.emplace_back(n ? std::fabs(sum / double(n)) : 0.0, d);
  }

  std::vector<size_t> order(n_days);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (magnitude[a].first != magnitude[b].first) return magnitude[a].first > magnitude[b].first;
    return magnitude[a].second < magnitude[b].second;  // tie: earlier date removed first
  });

  std::vector<bool> removed(n_days, false);
  TrimResult result;
  for (int i = 0; i < k; ++i) {
    removed[order[i]] = true;
    result.omitted.push_back(panel.dates[magnitude[order[i]].second]);
  }

  std::vector<size_t> kept;
  kept.reserve(n_days - size_t(k));
  for (size_t i = 0; i < n_days; ++i) {
    if (!removed[i]) kept.push_back(lo + i);
  }
  result.panel = restrict_to_dates(panel, kept);
  return result;
}

CorrelationMatrix pearson_matrix(const ReturnPanel& panel, DateWindow window, int trim_k,
                                 int min_overlap) {
  TrimResult trimmed = trim_extreme_days(panel, window, trim_k);
  const ReturnPanel& p = trimmed.panel;
  if (p.n_dates() == 0) throw ArgumentError("window " + window.label() + " holds no return dates");

  const size_t n = p.n_assets();
  const size_t t = p.n_dates();

  CorrelationMatrix m;
  m.window = window;
  m.assets = p.assets;
  m.trimmed_days = trimmed.omitted;
  m.trim_k = trim_k;
  m.min_overlap = min_overlap;
  m.rho.assign(n * n, kMissing);
  m.n_obs.assign(n * n, 0);

  std::vector<int32_t> own_obs(n, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t d = 0; d < t; ++d) {
      if (!is_missing(p.at(d, i))) ++own_obs[i];
    }
    m.n_obs[i * n + i] = own_obs[i];
    if (own_obs[i] >= 2) {
      m.rho[i * n + i] = 1.0;
    } else {
      log_warning("asset '" + p.assets[i].id + "' has fewer than 2 observations in window " +
                  window.label() + "; its correlations are undefined");
    }
  }

  // Pairwise-complete two-pass Pearson, computed once per unordered pair.
  std::vector<size_t> joint;
  joint.reserve(t);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      joint.clear();
      for (size_t d = 0; d < t; ++d) {
        if (!is_missing(p.at(d, i)) && !is_missing(p.at(d, j))) joint.push_back(d);
      }
      const int32_t n_ij = int32_t(joint.size());
      m.n_obs[i * n + j] = m.n_obs[j * n + i] = n_ij;
      if (n_ij < std::max(min_overlap, 2)) continue;

      double mean_i = 0.0, mean_j = 0.0;
      for (size_t d : joint) {
        mean_i += p.at(d, i);
        mean_j += p.at(d, j);
      }
      mean_i /= double(n_ij);
      mean_j /= double(n_ij);

      double sxy = 0.0, sxx = 0.0, syy = 0.0;
      for (size_t d : joint) {
        double dx = p.at(d, i) - mean_i;
        double dy = p.at(d, j) - mean_j;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
      }
      if (sxx == 0.0 || syy == 0.0) continue;  // zero variance: undefined, not 0 or 1

      double r = sxy / std::sqrt(sxx * syy);
      r = std::clamp(r, -1.0, 1.0);
      m.rho[i * n + j] = m.rho[j * n + i] = r;
    }
  }
  return m;
}

namespace {

BlockAverage average_over_pairs(const CorrelationMatrix& corr,
                                const std::vector<std::pair<size_t, size_t>>& pairs) {
  BlockAverage out;
  double sum = 0.0;
  for (auto [i, j] : pairs) {
    if (corr.defined(i, j)) {
      sum += corr.rho_at(i, j);
      ++out.n_defined;
    } else {
      ++out.n_undefined;
    }
  }
  if (out.n_defined > 0) out.mean = sum / double(out.n_defined);
  return out;
}

}  // namespace

BlockAverage average_block_correlation(const CorrelationMatrix& corr,
                                       std::span<const size_t> group_a,
                                       std::span<const size_t> group_b) {
  if (group_a.empty() || group_b.empty()) throw ArgumentError("block groups must be non-empty");
  for (size_t i : group_a)
    if (i >= corr.n_assets()) throw ArgumentError("group index out of range");
  for (size_t j : group_b)
    if (j >= corr.n_assets()) throw ArgumentError("group index out of range");

  std::vector<std::pair<size_t, size_t>> pairs;
  bool same = std::equal(group_a.begin(), group_a.end(), group_b.begin(), group_b.end());
  if (same) {
    for (size_t x = 0; x < group_a.size(); ++x)
      for (size_t y = x + 1; y < group_a.size(); ++y)
        pairs.emplace_back(group_a[x], group_a[y]);
  } else {
    for (size_t i : group_a)
      for (size_t j : group_b)
        if (i != j) pairs.emplace_back(std::min(i, j), std::max(i, j));
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  }
  return average_over_pairs(corr, pairs);
}

BlockAverage average_all_pairs_correlation(const CorrelationMatrix& corr) {
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t i = 0; i < corr.n_assets(); ++i)
    for (size_t j = i + 1; j < corr.n_assets(); ++j)
      pairs.emplace_back(i, j);
  return average_over_pairs(corr, pairs);
}

void write_corr_csv(const CorrelationMatrix& corr, const std::string& path) {
  CsvWriter w(path);
  std::vector<std::string> row;
  row.push_back("asset_id");
  for (const auto& a : corr.assets) row.push_back(a.id);
  w.write_row(row);
  for (size_t i = 0; i < corr.n_assets(); ++i) {
    row.clear();
    row.push_back(corr.assets[i].id);
    for (size_t j = 0; j < corr.n_assets(); ++j) {
      row.push_back(corr.defined(i, j) ? format_double(corr.rho_at(i, j)) : "");
    }
    w.write_row(row);
  }
  w.close();
}

// Cache layout (all integers little-endian):
//   magic "CNC1", u32 version, i64 window start/end (epoch days),
//   u32 trim_k, u32 min_overlap, u64 n_assets, assets (u32 len + bytes +
//   u8 kind + u8 has_sector + u8 major + u8 minor), u64 n_trimmed +
//   trimmed days (i64), upper-triangle-with-diagonal rho (f64) and
//   n_obs (i32), row-major.
namespace {

constexpr char kMagic[4] = {'C', 'N', 'C', '1'};
constexpr uint32_t kCacheVersion = 1;

void put_bytes(std::string& buf, const void* p, size_t n) {
  buf.append(static_cast<const char*>(p), n);
}

template <typename T>
void put_le(std::string& buf, T v) {
  unsigned char bytes[sizeof(T)];
  using U = std::make_unsigned_t<std::conditional_t<std::is_floating_point_v<T>, int64_t, T>>;
  U raw;
  if constexpr (std::is_floating_point_v<T>) {
    static_assert(sizeof(T) == 8);
    std::memcpy(&raw, &v, sizeof(T));
  } else {
    raw = static_cast<U>(v);
  }
  for (size_t i = 0; i < sizeof(T); ++i) bytes[i] = (unsigned char)((raw >> (8 * i)) & 0xff);
  put_bytes(buf, bytes, sizeof(T));
}

class ByteParser {
 public:
  ByteParser(const std::string& data, const std::string& path) : data_(data), path_(path) {}

  const char* take(size_t n) {
    if (pos_ + n > data_.size()) throw DataError("corrupt correlation cache: " + path_);
    const char* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }

  template <typename T>
  T get_le() {
    const unsigned char* p = reinterpret_cast<const unsigned char*>(take(sizeof(T)));
    using U = std::make_unsigned_t<std::conditional_t<std::is_floating_point_v<T>, int64_t, T>>;
    U raw = 0;
    for (size_t i = 0; i < sizeof(T); ++i) raw |= U(p[i]) << (8 * i);
    if constexpr (std::is_floating_point_v<T>) {
      T out;
      std::memcpy(&out, &raw, sizeof(T));
      return out;
    } else {
      return static_cast<T>(raw);
    }
  }

  bool exhausted() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::string path_;
  size_t pos_ = 0;
};

}  // namespace

void write_corr_cache(const CorrelationMatrix& corr, const std::string& path) {
  std::string buf;
  put_bytes(buf, kMagic, 4);
  put_le<uint32_t>(buf, kCacheVersion);
  put_le<int64_t>(buf, corr.window.start.days());
  put_le<int64_t>(buf, corr.window.end.days());
  put_le<uint32_t>(buf, uint32_t(corr.trim_k));
  put_le<uint32_t>(buf, uint32_t(corr.min_overlap));
  put_le<uint64_t>(buf, corr.n_assets());
  for (const auto& a : corr.assets) {
    put_le<uint32_t>(buf, uint32_t(a.id.size()));
    put_bytes(buf, a.id.data(), a.id.size());
    put_le<uint8_t>(buf, uint8_t(a.kind));
    put_le<uint8_t>(buf, a.sector ? 1 : 0);
    put_le<uint8_t>(buf, a.sector ? uint8_t(a.sector->major) : 0);
    put_le<uint8_t>(buf, a.sector ? uint8_t(a.sector->minor) : 0);
  }
  put_le<uint64_t>(buf, corr.trimmed_days.size());
  for (Date d : corr.trimmed_days) put_le<int64_t>(buf, d.days());
  for (size_t i = 0; i < corr.n_assets(); ++i) {
    for (size_t j = i; j < corr.n_assets(); ++j) {
      put_le<double>(buf, corr.rho_at(i, j));
      put_le<int32_t>(buf, corr.obs_at(i, j));
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open cache file for writing: " + path);
  out.write(buf.data(), std::streamsize(buf.size()));
  if (!out) throw IoError("cache write failed: " + path);
}

CorrelationMatrix read_corr_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open cache file: " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  ByteParser p(data, path);
  if (std::memcmp(p.take(4), kMagic, 4) != 0) {
    throw DataError("not a correlation cache file: " + path);
  }
  uint32_t version = p.get_le<uint32_t>();
  if (version != kCacheVersion) {
    throw DataError("unsupported cache version " + std::to_string(version) + ": " + path);
  }

  CorrelationMatrix m;
  m.window.start = Date::from_days(int(p.get_le<int64_t>()));
  m.window.end = Date::from_days(int(p.get_le<int64_t>()));
  m.trim_k = int(p.get_le<uint32_t>());
  m.min_overlap = int(p.get_le<uint32_t>());
  uint64_t n = p.get_le<uint64_t>();
  m.assets.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    AssetRecord a;
    uint32_t len = p.get_le<uint32_t>();
    a.id.assign(p.take(len), len);
    a.kind = AssetKind(p.get_le<uint8_t>());
    bool has_sector = p.get_le<uint8_t>() != 0;
    uint8_t major = p.get_le<uint8_t>();
    uint8_t minor = p.get_le<uint8_t>();
    if (has_sector) a.sector = SectorLabel{SectorMajor(major), SectorMinor(minor)};
    m.assets.push_back(std::move(a));
  }
  uint64_t n_trim = p.get_le<uint64_t>();
  for (uint64_t i = 0; i < n_trim; ++i) {
    m.trimmed_days.push_back(Date::from_days(int(p.get_le<int64_t>())));
  }
  m.rho.assign(n * n, kMissing);
  m.n_obs.assign(n * n, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i; j < n; ++j) {
      double r = p.get_le<double>();
      int32_t obs = p.get_le<int32_t>();
      m.rho[i * n + j] = m.rho[j * n + i] = r;
      m.n_obs[i * n + j] = m.n_obs[j * n + i] = obs;
    }
  }
  if (!p.exhausted()) throw DataError("trailing bytes in correlation cache: " + path);
  return m;
}

std::string corr_cache_name(DateWindow window, int trim_k, int min_overlap) {
  return "corr_" + window.label() + "_k" + std::to_string(trim_k) + "_m" +
         std::to_string(min_overlap) + ".bin";
}

}  // namespace corrnet
