#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace reclens {

using Duration = std::chrono::milliseconds;
using Timestamp = std::chrono::sys_time<Duration>;
using Date = std::chrono::sys_days;

namespace detail {

inline bool read_digits(std::string_view s, std::size_t pos, std::size_t count,
                        int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

[[noreturn]] inline void bad_time(std::string_view s, const char* why) {
  throw std::invalid_argument("bad timestamp '" + std::string(s) + "': " + why);
}

}  // namespace detail

// Parses an RFC 3339 instant. An explicit `Z` or `+HH:MM`/`-HH:MM` offset is
// required. Fractions finer than a millisecond must be zero.
inline Timestamp parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  int y, mo, d, h, mi, sec;
  if (!detail::read_digits(s, 0, 4, y) || s.size() < 19 || s[4] != '-' ||
      !detail::read_digits(s, 5, 2, mo) || s[7] != '-' ||
      !detail::read_digits(s, 8, 2, d) ||
      (s[10] != 'T' && s[10] != 't') || !detail::read_digits(s, 11, 2, h) ||
      s[13] != ':' || !detail::read_digits(s, 14, 2, mi) || s[16] != ':' ||
      !detail::read_digits(s, 17, 2, sec)) {
    detail::bad_time(s, "expected YYYY-MM-DDTHH:MM:SS");
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) detail::bad_time(s, "invalid calendar date");
  if (h > 23 || mi > 59 || sec > 59) detail::bad_time(s, "invalid time of day");

  std::size_t pos = 19;
  std::int64_t millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      std::size_t digit = pos - start;
      int v = s[pos] - '0';
      if (digit < 3) {
        millis = millis * 10 + v;
      } else if (v != 0) {
        detail::bad_time(s, "sub-millisecond precision is not supported");
      }
      ++pos;
    }
    std::size_t ndigits = pos - start;
    if (ndigits == 0) detail::bad_time(s, "empty fraction");
    for (std::size_t i = ndigits; i < 3; ++i) millis *= 10;
  }

  if (pos >= s.size()) detail::bad_time(s, "missing UTC offset");
  std::int64_t offset_minutes = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    int oh, om;
    if (!detail::read_digits(s, pos + 1, 2, oh) || pos + 3 >= s.size() ||
        s[pos + 3] != ':' || !detail::read_digits(s, pos + 4, 2, om) ||
        oh > 23 || om > 59) {
      detail::bad_time(s, "bad UTC offset");
    }
    offset_minutes = oh * 60 + om;
    if (s[pos] == '-') offset_minutes = -offset_minutes;
    pos += 6;
  } else {
    detail::bad_time(s, "missing UTC offset");
  }
  if (pos != s.size()) detail::bad_time(s, "trailing characters");

  auto local = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} +
               milliseconds{millis};
  return Timestamp{local - minutes{offset_minutes}};
}

// Always emits UTC with `Z`; the fraction appears only when non-zero.
inline std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  auto day_point = floor<days>(ts);
  year_month_day ymd{day_point};
  auto tod = ts - day_point;
  auto h = duration_cast<hours>(tod);
  auto mi = duration_cast<minutes>(tod - h);
  auto sec = duration_cast<seconds>(tod - h - mi);
  auto ms = (tod - h - mi - sec).count();
  char buf[40];
  int y = static_cast<int>(ymd.year());
  unsigned mo = static_cast<unsigned>(ymd.month());
  unsigned d = static_cast<unsigned>(ymd.day());
  if (ms == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", y, mo, d,
                  static_cast<int>(h.count()), static_cast<int>(mi.count()),
                  static_cast<int>(sec.count()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", y, mo,
                  d, static_cast<int>(h.count()), static_cast<int>(mi.count()),
                  static_cast<int>(sec.count()), static_cast<int>(ms));
  }
  return buf;
}

inline std::string format_date(Date date) {
  std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

inline Date parse_date(std::string_view s) {
  using namespace std::chrono;
  int y, mo, d;
  if (s.size() != 10 || !detail::read_digits(s, 0, 4, y) || s[4] != '-' ||
      !detail::read_digits(s, 5, 2, mo) || s[7] != '-' ||
      !detail::read_digits(s, 8, 2, d)) {
    throw std::invalid_argument("bad date '" + std::string(s) + "'");
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw std::invalid_argument("bad date '" + std::string(s) + "'");
  return sys_days{ymd};
}

// Calendar date of `ts` shifted by a fixed UTC offset.
inline Date date_of(Timestamp ts, Duration utc_offset) {
  return std::chrono::floor<std::chrono::days>(ts + utc_offset);
}

// Parses durations such as "5m", "24h", "90s", "1h30m", "250ms", "7d".
inline Duration parse_duration(std::string_view s) {
  using namespace std::chrono;
  if (s.empty()) throw std::invalid_argument("empty duration");
  Duration total{0};
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t start = pos;
    std::int64_t value = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      value = value * 10 + (s[pos] - '0');
      if (value > 1'000'000'000) {
        throw std::invalid_argument("duration too large '" + std::string(s) + "'");
      }
      ++pos;
    }
    if (pos == start) {
      throw std::invalid_argument("bad duration '" + std::string(s) + "'");
    }
    std::size_t unit_start = pos;
    while (pos < s.size() && (s[pos] < '0' || s[pos] > '9')) ++pos;
    std::string_view unit = s.substr(unit_start, pos - unit_start);
    if (unit == "ms") {
      total += milliseconds{value};
    } else if (unit == "s") {
      total += seconds{value};
    } else if (unit == "m" || unit == "min") {
      total += minutes{value};
    } else if (unit == "h") {
      total += hours{value};
    } else if (unit == "d") {
      total += days{value};
    } else {
      throw std::invalid_argument("bad duration unit in '" + std::string(s) + "'");
    }
  }
  return total;
}

inline std::string format_duration(Duration d) {
  using namespace std::chrono;
  auto ms = d.count();
  std::string sign = ms < 0 ? "-" : "";
  if (ms < 0) ms = -ms;
  if (ms % 3'600'000 == 0) return sign + std::to_string(ms / 3'600'000) + "h";
  if (ms % 60'000 == 0) return sign + std::to_string(ms / 60'000) + "m";
  if (ms % 1'000 == 0) return sign + std::to_string(ms / 1'000) + "s";
  return sign + std::to_string(ms) + "ms";
}

// Fixed UTC offset: "+02:00", "-05:30", or a signed duration like "-5h".
inline Duration parse_utc_offset(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty UTC offset");
  bool negative = s.front() == '-';
  std::string_view body = (s.front() == '-' || s.front() == '+') ? s.substr(1) : s;
  Duration d{0};
  int h, m;
  if (body.size() == 5 && body[2] == ':' && detail::read_digits(body, 0, 2, h) &&
      detail::read_digits(body, 3, 2, m) && m < 60) {
    d = std::chrono::hours{h} + std::chrono::minutes{m};
  } else if (body == "0") {
    d = Duration{0};
  } else {
    d = parse_duration(body);
  }
  if (d > std::chrono::hours{24}) {
    throw std::invalid_argument("UTC offset out of range '" + std::string(s) + "'");
  }
  return negative ? -d : d;
}

}  // namespace reclens
