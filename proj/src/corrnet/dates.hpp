#pragma once

#include <compare>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace corrnet {

/// Calendar date, stored as days since the civil epoch 1970-01-01.
/// Supports the calendar-month arithmetic used for analysis windows.
class Date {
 public:
  Date() = default;

  static Date from_ymd(int year, int month, int day);
  static Date from_days(int days) {
    Date d;
    d.days_ = days;
    return d;
  }

  /// Parses an ISO-8601 date (YYYY-MM-DD). Throws ParseError on anything else.
  static Date parse(std::string_view iso);
  static std::optional<Date> try_parse(std::string_view iso);

  std::string to_string() const;  // YYYY-MM-DD

  int year() const;
  int month() const;  // 1..12
  int day() const;    // 1..31

  int days() const { return days_; }
  bool valid() const { return days_ != kInvalid; }

  /// Calendar-month shift; the day of month is clamped to the target
  /// month's length (Jan 31 + 1 month -> Feb 28/29).
  Date add_months(int n) const;

  /// First day of this date's calendar quarter.
  Date quarter_start() const;

  /// First day of this date's calendar year.
  Date year_start() const;

  Date next_day() const { return from_days(days_ + 1); }

  auto operator<=>(const Date&) const = default;

 private:
  static constexpr int kInvalid = std::numeric_limits<int>::min();
  int days_ = kInvalid;
};

/// Half-open date range [start, end).
struct DateWindow {
  Date start;
  Date end;

  bool contains(Date d) const { return start <= d && d < end; }
  auto operator<=>(const DateWindow&) const = default;
  std::string label() const { return start.to_string() + "_" + end.to_string(); }
};

}  // namespace corrnet
