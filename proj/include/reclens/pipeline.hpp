#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "reclens/attribution.hpp"
#include "reclens/behavior.hpp"
#include "reclens/events.hpp"
#include "reclens/filters.hpp"
#include "reclens/metrics.hpp"
#include "reclens/report.hpp"
#include "reclens/stats.hpp"

namespace reclens {

struct EvaluationOptions {
  WindowConfig windows;
  Duration tz_offset{0};
  unsigned threads = 1;
  bool daily = true;
  bool ttests = true;
  bool correlation = true;
  bool behavior = true;
  std::vector<std::pair<MetricKind, MetricKind>> extra_pairs;
  double bounce_threshold = kDefaultBounceThreshold;
  std::optional<FilterConfig> filters;
};

// Metrics for the correlation matrix, in display order.
inline constexpr std::array<MetricKind, 4> kCorrelationMetrics = {
    MetricKind::CTR, MetricKind::CTR_NoRepeat, MetricKind::BTR, MetricKind::ClickAndBuy};

inline std::optional<DateRange> date_range_of(const EventLog& log, Duration tz_offset) {
  if (log.hits.empty()) return std::nullopt;
  return DateRange{date_of(log.hits.front().ts, tz_offset),
                   date_of(log.hits.back().ts, tz_offset)};
}

// Runs every stage on a normalized log. Throws EmptyDenominator when the log
// has no hits.
inline EvaluationReport evaluate(const EventLog& log, const EvaluationOptions& opt) {
  opt.windows.validate();
  EvaluationReport r;
  r.source_name = log.source_name;
  r.date_range = date_range_of(log, opt.tz_offset);
  r.bounce_threshold = opt.bounce_threshold;

  const AttributionResult attr = attribute(log, opt.windows, opt.threads);
  r.metrics = compute_all(attr);

  if (opt.daily || opt.correlation) {
    auto daily = bucket_daily(attr, log, kAllMetrics, opt.tz_offset);
    if (opt.correlation) {
      std::vector<DailyMetricSeries> picked;
      for (auto k : kCorrelationMetrics) picked.push_back(daily[static_cast<std::size_t>(k)]);
      r.correlation = correlation_matrix(picked);
    }
    if (opt.daily) r.daily = std::move(daily);
  }

  if (opt.ttests) {
    auto pairs = std::vector(kHeadlinePairs.begin(), kHeadlinePairs.end());
    for (const auto& p : opt.extra_pairs) {
      if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) pairs.push_back(p);
    }
    for (auto [a, b] : pairs) {
      r.ttests.push_back({a, b,
                          compare_metrics(r.metrics[static_cast<std::size_t>(a)],
                                          r.metrics[static_cast<std::size_t>(b)])});
    }
  }

  if (opt.behavior) r.behavior = behavior_report(log);
  if (opt.filters) r.filter_impact = simulate_filters(log, *opt.filters, opt.windows);
  return r;
}

}  // namespace reclens
