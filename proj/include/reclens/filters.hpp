#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "reclens/attribution.hpp"
#include "reclens/errors.hpp"
#include "reclens/events.hpp"
#include "reclens/metrics.hpp"
#include "reclens/time.hpp"

namespace reclens {

struct FilterConfig {
  // Drop products the customer clicked earlier on the same calendar day.
  bool clicked_today = true;
  // Drop products added to cart within the trailing window of this many
  // 24-hour days. 0 disables the filter.
  int atc_window_days = 7;
  bool atc_filter_enabled = true;
  // Calendar-day boundary for the clicked-today rule.
  Duration day_offset{0};

  bool atc_active() const { return atc_filter_enabled && atc_window_days > 0; }
  Duration atc_window() const { return std::chrono::hours{24} * atc_window_days; }

  void validate() const {
    if (atc_window_days < 0) throw InvalidConfig("atc_window_days must be >= 0");
  }
};

struct CustomerHistory {
  CustomerId customer;
  std::vector<std::pair<ProductId, Timestamp>> clicks;
  std::vector<std::pair<ProductId, Timestamp>> atcs;
};

struct FilterDecision {
  bool by_clicked_today = false;
  bool by_atc = false;
  bool removed() const { return by_clicked_today || by_atc; }
};

// Why each product would be removed, given history up to `now` inclusive.
inline std::vector<FilterDecision> explain_filters(std::span<const ProductId> products,
                                                   const CustomerHistory& history,
                                                   Timestamp now, const FilterConfig& cfg) {
  cfg.validate();
  std::vector<FilterDecision> out(products.size());
  const Date today = date_of(now, cfg.day_offset);
  for (std::size_t i = 0; i < products.size(); ++i) {
    if (cfg.clicked_today) {
      for (const auto& [p, ts] : history.clicks) {
        if (p == products[i] && ts <= now && date_of(ts, cfg.day_offset) == today) {
          out[i].by_clicked_today = true;
          break;
        }
      }
    }
    if (cfg.atc_active()) {
      for (const auto& [p, ts] : history.atcs) {
        if (p == products[i] && ts <= now && now - ts <= cfg.atc_window()) {
          out[i].by_atc = true;
          break;
        }
      }
    }
  }
  return out;
}

// Survivors keep their relative order; the result may be empty.
inline std::vector<ProductId> filter_recommendations(std::span<const ProductId> products,
                                                     const CustomerHistory& history,
                                                     Timestamp now, const FilterConfig& cfg) {
  auto decisions = explain_filters(products, history, now, cfg);
  std::vector<ProductId> kept;
  for (std::size_t i = 0; i < products.size(); ++i) {
    if (!decisions[i].removed()) kept.push_back(products[i]);
  }
  return kept;
}

struct FilterImpactReport {
  std::size_t hits = 0;
  std::size_t hit_product_pairs = 0;
  std::size_t removed_pairs = 0;
  std::size_t removed_by_clicked_today = 0;
  std::size_t removed_by_atc = 0;
  std::size_t emptied_hits = 0;
  double removed_fraction = 0.0;
  double emptied_fraction = 0.0;
  std::size_t counterfactual_hits = 0;
  // All six metrics; empty when the corresponding log has no hits.
  std::vector<MetricValue> original;
  std::vector<MetricValue> counterfactual;

  friend bool operator==(const FilterImpactReport&, const FilterImpactReport&) = default;
};

struct FilterSimulation {
  FilterImpactReport report;
  EventLog counterfactual_log;
};

// Replays the log in time order. Each hit is filtered against the customer's
// clicks and ATCs strictly before the hit; removed products leave the hit,
// emptied hits leave the log, and the metrics are recomputed on what remains.
inline FilterSimulation simulate_filters_detailed(const EventLog& log, const FilterConfig& cfg,
                                                  const WindowConfig& windows = {}) {
  cfg.validate();
  require_normalized(log);

  struct LastSeen {
    std::unordered_map<std::string_view, Timestamp> click;
    std::unordered_map<std::string_view, Timestamp> atc;
  };
  std::unordered_map<std::string_view, LastSeen> state;

  FilterSimulation sim;
  FilterImpactReport& r = sim.report;
  EventLog& cf = sim.counterfactual_log;
  cf.source_name = log.source_name;
  cf.actions = log.actions;

  std::size_t next_action = 0;
  for (const Hit& hit : log.hits) {
    for (; next_action < log.actions.size() && log.actions[next_action].ts < hit.ts;
         ++next_action) {
      const Action& a = log.actions[next_action];
      auto& s = state[a.customer.value()];
      if (a.kind == ActionKind::Click) s.click[a.product.value()] = a.ts;
      if (a.kind == ActionKind::AddToCart) s.atc[a.product.value()] = a.ts;
    }
    ++r.hits;
    r.hit_product_pairs += hit.products.size();
    const Date today = date_of(hit.ts, cfg.day_offset);
    auto it = state.find(hit.customer.value());
    Hit kept = hit;
    kept.products.clear();
    for (const auto& p : hit.products) {
      FilterDecision d;
      if (it != state.end()) {
        if (cfg.clicked_today) {
          auto c = it->second.click.find(p.value());
          d.by_clicked_today =
              c != it->second.click.end() && date_of(c->second, cfg.day_offset) == today;
        }
        if (cfg.atc_active()) {
          auto c = it->second.atc.find(p.value());
          d.by_atc = c != it->second.atc.end() && hit.ts - c->second <= cfg.atc_window();
        }
      }
      if (d.removed()) {
        ++r.removed_pairs;
        r.removed_by_clicked_today += d.by_clicked_today ? 1 : 0;
        r.removed_by_atc += d.by_atc ? 1 : 0;
      } else {
        kept.products.push_back(p);
      }
    }
    if (kept.products.empty()) {
      ++r.emptied_hits;
    } else {
      cf.hits.push_back(std::move(kept));
    }
  }

  if (r.hits > 0) {
    r.removed_fraction =
        static_cast<double>(r.removed_pairs) / static_cast<double>(r.hit_product_pairs);
    r.emptied_fraction = static_cast<double>(r.emptied_hits) / static_cast<double>(r.hits);
    r.original = compute_all(attribute(log, windows));
  }
  r.counterfactual_hits = cf.hits.size();
  if (!cf.hits.empty()) r.counterfactual = compute_all(attribute(cf, windows));
  return sim;
}

inline FilterImpactReport simulate_filters(const EventLog& log, const FilterConfig& cfg,
                                           const WindowConfig& windows = {}) {
  return simulate_filters_detailed(log, cfg, windows).report;
}

}  // namespace reclens
