#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "reclens/errors.hpp"
#include "reclens/events.hpp"

namespace reclens {

// Customer-behavior indicators over the population of customers who received
// at least one hit. Actions are raw (not window-attributed).
struct BehaviorReport {
  std::size_t customers = 0;
  std::size_t hits = 0;
  std::size_t clicks = 0;
  std::size_t buys = 0;
  std::size_t buyers = 0;
  double hits_per_customer = 0.0;
  double buyers_per_customer = 0.0;
  double clicks_per_customer = 0.0;
  std::optional<double> clicks_per_buy;

  friend bool operator==(const BehaviorReport&, const BehaviorReport&) = default;
};

inline constexpr double kDefaultBounceThreshold = 1.5;

inline constexpr std::string_view kHitsPerCustomerCaveat =
    "hits per customer approximates session length only when recommendation "
    "widgets appear on most pages";

inline BehaviorReport behavior_report(const EventLog& log) {
  std::unordered_set<std::string_view> population;
  for (const auto& h : log.hits) population.insert(h.customer.value());
  if (population.empty()) throw EmptyPopulation();

  BehaviorReport r;
  r.customers = population.size();
  r.hits = log.hits.size();
  std::unordered_set<std::string_view> buyers;
  for (const auto& a : log.actions) {
    if (!population.contains(a.customer.value())) continue;
    if (a.kind == ActionKind::Click) {
      ++r.clicks;
    } else if (a.kind == ActionKind::Buy) {
      ++r.buys;
      buyers.insert(a.customer.value());
    }
  }
  r.buyers = buyers.size();
  const double n = static_cast<double>(r.customers);
  r.hits_per_customer = static_cast<double>(r.hits) / n;
  r.buyers_per_customer = static_cast<double>(r.buyers) / n;
  r.clicks_per_customer = static_cast<double>(r.clicks) / n;
  if (r.buys > 0) r.clicks_per_buy = static_cast<double>(r.clicks) / static_cast<double>(r.buys);
  return r;
}

// Advisory: few clicks per customer hints at a high bounce rate.
inline bool bounce_indicator(const BehaviorReport& r,
                             double threshold = kDefaultBounceThreshold) {
  return r.clicks_per_customer < threshold;
}

}  // namespace reclens
