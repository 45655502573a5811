#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reclens/attribution.hpp"
#include "reclens/errors.hpp"
#include "reclens/events.hpp"
#include "reclens/time.hpp"

namespace reclens {

enum class MetricKind { CTR, CTR_NoRepeat, ATC_TR, ATC_TR_NoRepeat, BTR, ClickAndBuy };

inline constexpr std::array<MetricKind, 6> kAllMetrics = {
    MetricKind::CTR,    MetricKind::CTR_NoRepeat, MetricKind::ATC_TR,
    MetricKind::ATC_TR_NoRepeat, MetricKind::BTR, MetricKind::ClickAndBuy};

// Stable machine name, used in JSON and on the command line.
inline std::string_view metric_id(MetricKind k) {
  switch (k) {
    case MetricKind::CTR: return "ctr";
    case MetricKind::CTR_NoRepeat: return "ctr_norepeat";
    case MetricKind::ATC_TR: return "atc_tr";
    case MetricKind::ATC_TR_NoRepeat: return "atc_tr_norepeat";
    case MetricKind::BTR: return "btr";
    case MetricKind::ClickAndBuy: return "click_and_buy";
  }
  return "?";
}

inline std::string_view metric_label(MetricKind k) {
  switch (k) {
    case MetricKind::CTR: return "CTR";
    case MetricKind::CTR_NoRepeat: return "CTR-NoRepeat";
    case MetricKind::ATC_TR: return "ATC-TR";
    case MetricKind::ATC_TR_NoRepeat: return "ATC-TR-NoRepeat";
    case MetricKind::BTR: return "BTR";
    case MetricKind::ClickAndBuy: return "Click & Buy rate";
  }
  return "?";
}

// Accepts the machine name or the display label.
inline MetricKind parse_metric(std::string_view s) {
  for (auto k : kAllMetrics) {
    if (metric_id(k) == s || metric_label(k) == s) return k;
  }
  throw std::invalid_argument("unknown metric '" + std::string(s) + "'");
}

inline bool flag_of(const AttributedActions& a, MetricKind k) {
  switch (k) {
    case MetricKind::CTR: return a.clicked;
    case MetricKind::CTR_NoRepeat: return a.clicked_norepeat;
    case MetricKind::ATC_TR: return a.atc;
    case MetricKind::ATC_TR_NoRepeat: return a.atc_norepeat;
    case MetricKind::BTR: return a.bought;
    case MetricKind::ClickAndBuy: return a.clicked_and_bought;
  }
  return false;
}

// Hit-level Bernoulli rate with the variance of its mean.
struct MetricValue {
  MetricKind kind = MetricKind::CTR;
  std::size_t successes = 0;
  std::size_t trials = 0;
  double rate = 0.0;
  double variance_of_mean = 0.0;

  static MetricValue from_counts(MetricKind kind, std::size_t successes, std::size_t trials) {
    if (trials == 0) throw EmptyDenominator();
    MetricValue v{kind, successes, trials, 0.0, 0.0};
    v.rate = static_cast<double>(successes) / static_cast<double>(trials);
    v.variance_of_mean = v.rate * (1.0 - v.rate) / static_cast<double>(trials);
    return v;
  }

  friend bool operator==(const MetricValue&, const MetricValue&) = default;
};

inline MetricValue compute_metric(const AttributionResult& attr, MetricKind kind) {
  std::size_t successes = 0;
  for (const auto& h : attr.per_hit) successes += flag_of(h, kind) ? 1 : 0;
  return MetricValue::from_counts(kind, successes, attr.per_hit.size());
}

inline std::vector<MetricValue> compute_all(const AttributionResult& attr) {
  if (attr.per_hit.empty()) throw EmptyDenominator();
  std::array<std::size_t, 6> counts{};
  for (const auto& h : attr.per_hit) {
    for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
      counts[i] += flag_of(h, kAllMetrics[i]) ? 1 : 0;
    }
  }
  std::vector<MetricValue> out;
  out.reserve(kAllMetrics.size());
  for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
    out.push_back(MetricValue::from_counts(kAllMetrics[i], counts[i], attr.per_hit.size()));
  }
  return out;
}

struct DailyValue {
  Date date;
  MetricValue value;

  friend bool operator==(const DailyValue&, const DailyValue&) = default;
};

struct DailyMetricSeries {
  MetricKind kind = MetricKind::CTR;
  std::vector<DailyValue> days;

  std::vector<double> rates() const {
    std::vector<double> r;
    r.reserve(days.size());
    for (const auto& d : days) r.push_back(d.value.rate);
    return r;
  }

  friend bool operator==(const DailyMetricSeries&, const DailyMetricSeries&) = default;
};

// Daily series for several metrics in one pass. Each hit goes to the calendar
// date of (hit.ts + tz_offset); days without hits are omitted.
inline std::vector<DailyMetricSeries> bucket_daily(const AttributionResult& attr,
                                                   const EventLog& log,
                                                   std::span<const MetricKind> kinds,
                                                   Duration tz_offset) {
  if (attr.per_hit.size() != log.hits.size()) {
    throw std::invalid_argument("attribution does not match log");
  }
  if (log.hits.empty()) throw EmptyDenominator();
  struct Counts {
    std::size_t trials = 0;
    std::vector<std::size_t> successes;
  };
  std::map<Date, Counts> by_day;
  for (std::size_t i = 0; i < log.hits.size(); ++i) {
    auto& c = by_day[date_of(log.hits[i].ts, tz_offset)];
    c.successes.resize(kinds.size());
    ++c.trials;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      c.successes[k] += flag_of(attr.per_hit[i], kinds[k]) ? 1 : 0;
    }
  }
  std::vector<DailyMetricSeries> out(kinds.size());
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    out[k].kind = kinds[k];
    out[k].days.reserve(by_day.size());
    for (const auto& [date, c] : by_day) {
      out[k].days.push_back({date, MetricValue::from_counts(kinds[k], c.successes[k], c.trials)});
    }
  }
  return out;
}

inline DailyMetricSeries bucket_daily(const AttributionResult& attr, const EventLog& log,
                                      MetricKind kind, Duration tz_offset) {
  return bucket_daily(attr, log, std::span<const MetricKind>(&kind, 1), tz_offset).front();
}

// Whole-log value re-derived from a daily series.
inline MetricValue total_of(const DailyMetricSeries& s) {
  std::size_t successes = 0, trials = 0;
  for (const auto& d : s.days) {
    successes += d.value.successes;
    trials += d.value.trials;
  }
  return MetricValue::from_counts(s.kind, successes, trials);
}

}  // namespace reclens
