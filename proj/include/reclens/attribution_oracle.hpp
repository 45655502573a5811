#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "reclens/attribution.hpp"

namespace reclens {

// Reference implementation of `attribute`: a direct O(hits x actions) scan
// that checks every rule explicitly. Meant for cross-validation on small logs.
inline AttributionResult attribution_oracle(const EventLog& log, const WindowConfig& cfg) {
  cfg.validate();
  require_normalized(log);

  AttributionResult out;
  out.per_hit.resize(log.hits.size());
  for (std::size_t i = 0; i < log.hits.size(); ++i) out.per_hit[i].hit_id = log.hits[i].hit_id;

  // credited_to[a] = hit index that action a is credited to, if any.
  std::vector<std::optional<std::size_t>> credited_to(log.actions.size());
  for (std::size_t a = 0; a < log.actions.size(); ++a) {
    const Action& act = log.actions[a];
    std::optional<std::size_t> best;
    for (std::size_t h = 0; h < log.hits.size(); ++h) {
      const Hit& hit = log.hits[h];
      if (hit.customer != act.customer) continue;
      bool shown = false;
      for (const auto& p : hit.products) shown = shown || p == act.product;
      if (!shown) continue;
      auto elapsed = act.ts - hit.ts;
      if (elapsed <= Duration{0} || elapsed > cfg.window_for(act.kind)) continue;
      // Most recent wins; on equal timestamps the later hit in log order.
      if (!best || hit.ts >= log.hits[*best].ts) best = h;
    }
    credited_to[a] = best;
    if (!best) {
      ++out.unattributed[index_of(act.kind)];
      continue;
    }
    out.per_hit[*best].credited.push_back({act.kind, act.product, act.ts});
  }

  auto day_key = [&](Timestamp ts) -> long long {
    if (cfg.norepeat_scope == NoRepeatScope::Log) return 0;
    return date_of(ts, cfg.day_offset).time_since_epoch().count();
  };

  std::set<std::tuple<std::string, std::string, long long>> clicked_pairs, atc_pairs;
  for (std::size_t a = 0; a < log.actions.size(); ++a) {
    if (!credited_to[a]) continue;
    const Action& act = log.actions[a];
    AttributedActions& rec = out.per_hit[*credited_to[a]];
    auto key = std::make_tuple(act.customer.value(), act.product.value(), day_key(act.ts));
    if (act.kind == ActionKind::Click) {
      rec.clicked = true;
      if (!clicked_pairs.contains(key)) {
        clicked_pairs.insert(key);
        rec.clicked_norepeat = true;
      }
    } else if (act.kind == ActionKind::AddToCart) {
      rec.atc = true;
      if (!atc_pairs.contains(key)) {
        atc_pairs.insert(key);
        rec.atc_norepeat = true;
      }
    } else {
      rec.bought = true;
    }
  }

  // Click & Buy: a buy credited to the hit, preceded in action order by a leg
  // action on the same product also credited to the hit.
  const ActionKind leg = cfg.leg_kind();
  for (std::size_t b = 0; b < log.actions.size(); ++b) {
    if (!credited_to[b] || log.actions[b].kind != ActionKind::Buy) continue;
    for (std::size_t c = 0; c < b; ++c) {
      if (credited_to[c] == credited_to[b] && log.actions[c].kind == leg &&
          log.actions[c].product == log.actions[b].product) {
        out.per_hit[*credited_to[b]].clicked_and_bought = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace reclens
