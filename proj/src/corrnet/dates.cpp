#include "corrnet/dates.hpp"

#include <chrono>
#include <cstdio>

#include "corrnet/errors.hpp"

namespace corrnet {

namespace chr = std::chrono;

namespace {

chr::year_month_day to_ymd(int days) {
  return chr::year_month_day{chr::sys_days{chr::days{days}}};
}

int from_ymd_checked(int y, int m, int d, std::string_view context) {
  chr::year_month_day ymd{chr::year{y}, chr::month{unsigned(m)}, chr::day{unsigned(d)}};
  if (!ymd.ok()) {
    throw ParseError("invalid calendar date: " + std::string(context));
  }
  return chr::sys_days{ymd}.time_since_epoch().count();
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
  Date out;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  out.days_ = from_ymd_checked(year, month, day, buf);
  return out;
}

Date Date::parse(std::string_view iso) {
  auto d = try_parse(iso);
  if (!d) {
    throw ParseError("expected ISO-8601 date (YYYY-MM-DD), got '" + std::string(iso) + "'");
  }
  return *d;
}

std::optional<Date> Date::try_parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  auto digits = [&](size_t pos, size_t len) -> std::optional<int> {
    int v = 0;
    for (size_t i = pos; i < pos + len; ++i) {
      char c = iso[i];
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + (c - '0');
    }
    return v;
  };
  auto y = digits(0, 4), m = digits(5, 2), d = digits(8, 2);
  if (!y || !m || !d) return std::nullopt;
  chr::year_month_day ymd{chr::year{*y}, chr::month{unsigned(*m)}, chr::day{unsigned(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return from_days(chr::sys_days{ymd}.time_since_epoch().count());
}

std::string Date::to_string() const {
  if (!valid()) return "(invalid)";
  auto ymd = to_ymd(days_);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return buf;
}

int Date::year() const { return int(to_ymd(days_).year()); }
int Date::month() const { return int(unsigned(to_ymd(days_).month())); }
int Date::day() const { return int(unsigned(to_ymd(days_).day())); }

Date Date::add_months(int n) const {
  auto ymd = to_ymd(days_);
  chr::year_month_day shifted = ymd + chr::months{n};
  if (!shifted.ok()) {
    // Day overflowed the target month; clamp to its last day.
    shifted = shifted.year() / shifted.month() / chr::last;
  }
  return from_days(chr::sys_days{shifted}.time_since_epoch().count());
}

Date Date::quarter_start() const {
  auto ymd = to_ymd(days_);
  int m = int(unsigned(ymd.month()));
  int qm = 1 + 3 * ((m - 1) / 3);
  return from_ymd(int(ymd.year()), qm, 1);
}

Date Date::year_start() const { return from_ymd(year(), 1, 1); }

}  // namespace corrnet
