#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "reclens/errors.hpp"
#include "reclens/events.hpp"
#include "reclens/parallel.hpp"
#include "reclens/time.hpp"

namespace reclens {

// Scope over which repeated clicks/ATCs on the same (customer, product) pair
// are collapsed for the NoRepeat metrics.
enum class NoRepeatScope { Log, Day };

// Which credited action must precede a credited buy for Click & Buy.
enum class ClickAndBuyLeg { Click, AddToCart };

struct WindowConfig {
  Duration click_window = std::chrono::minutes{5};
  Duration atc_window = std::chrono::minutes{30};
  Duration buy_window = std::chrono::hours{24};
  NoRepeatScope norepeat_scope = NoRepeatScope::Log;
  ClickAndBuyLeg candb_leg = ClickAndBuyLeg::Click;
  // Calendar-day boundary for NoRepeatScope::Day.
  Duration day_offset{0};

  Duration window_for(ActionKind k) const {
    switch (k) {
      case ActionKind::Click: return click_window;
      case ActionKind::AddToCart: return atc_window;
      case ActionKind::Buy: return buy_window;
    }
    return Duration{0};
  }

  ActionKind leg_kind() const {
    return candb_leg == ClickAndBuyLeg::Click ? ActionKind::Click : ActionKind::AddToCart;
  }

  void validate() const {
    if (click_window <= Duration{0} || atc_window <= Duration{0} ||
        buy_window <= Duration{0}) {
      throw InvalidConfig("attribution windows must be strictly positive");
    }
    if (click_window > atc_window || atc_window > buy_window) {
      throw InvalidConfig("attribution windows must satisfy click <= atc <= buy");
    }
  }
};

struct CreditedAction {
  ActionKind kind;
  ProductId product;
  Timestamp ts;

  friend bool operator==(const CreditedAction&, const CreditedAction&) = default;
};

// Per-Hit outcome: each flag is the Bernoulli X_i of one metric.
struct AttributedActions {
  std::string hit_id;
  bool clicked = false;
  bool clicked_norepeat = false;
  bool atc = false;
  bool atc_norepeat = false;
  bool bought = false;
  bool clicked_and_bought = false;
  // In log action order.
  std::vector<CreditedAction> credited;

  friend bool operator==(const AttributedActions&, const AttributedActions&) = default;
};

struct AttributionResult {
  // One entry per hit, in log hit order.
  std::vector<AttributedActions> per_hit;
  std::array<std::size_t, kActionKinds> unattributed{};

  std::size_t unattributed_of(ActionKind k) const { return unattributed[index_of(k)]; }

  friend bool operator==(const AttributionResult&, const AttributionResult&) = default;
};

inline void require_normalized(const EventLog& log) {
  auto by_ts = [](const auto& a, const auto& b) { return a.ts < b.ts; };
  if (!std::is_sorted(log.hits.begin(), log.hits.end(), by_ts) ||
      !std::is_sorted(log.actions.begin(), log.actions.end(), by_ts)) {
    throw Error("event log is not normalized (call normalize first)");
  }
}

namespace detail {

struct ProductDayKey {
  std::string_view product;
  std::int64_t day;
  bool operator==(const ProductDayKey&) const = default;
};

struct ProductDayHash {
  std::size_t operator()(const ProductDayKey& k) const noexcept {
    return std::hash<std::string_view>{}(k.product) ^
           (std::hash<std::int64_t>{}(k.day) * 0x9e3779b97f4a7c15ULL);
  }
};

// Tracks the first credited occurrence per (product[, day]) for one customer.
class FirstSeen {
 public:
  FirstSeen(NoRepeatScope scope, Duration day_offset)
      : scope_(scope), day_offset_(day_offset) {}

  bool insert(const ProductId& p, Timestamp ts) {
    std::int64_t day = 0;
    if (scope_ == NoRepeatScope::Day) {
      day = date_of(ts, day_offset_).time_since_epoch().count();
    }
    return seen_.insert({p.value(), day}).second;
  }

 private:
  NoRepeatScope scope_;
  Duration day_offset_;
  std::unordered_set<ProductDayKey, ProductDayHash> seen_;
};

// Attributes one customer's actions. `hit_idx` and `action_idx` hold global
// indices in log order; results land in per_hit slots owned by this customer.
inline void attribute_customer(const EventLog& log, const WindowConfig& cfg,
                               std::span<const std::uint32_t> hit_idx,
                               std::span<const std::uint32_t> action_idx,
                               std::vector<AttributedActions>& per_hit,
                               std::array<std::size_t, kActionKinds>& unattributed) {
  std::unordered_map<std::string_view, std::vector<std::uint32_t>> showing;
  for (std::uint32_t h : hit_idx) {
    for (const auto& p : log.hits[h].products) showing[p.value()].push_back(h);
  }

  FirstSeen first_click(cfg.norepeat_scope, cfg.day_offset);
  FirstSeen first_atc(cfg.norepeat_scope, cfg.day_offset);
  const ActionKind leg = cfg.leg_kind();

  for (std::uint32_t ai : action_idx) {
    const Action& a = log.actions[ai];
    auto it = showing.find(a.product.value());
    if (it == showing.end()) {
      ++unattributed[index_of(a.kind)];
      continue;
    }
    const auto& candidates = it->second;
    // Last-touch: the latest hit strictly before the action; among equal
    // timestamps the later one in log order.
    auto pos = std::partition_point(
        candidates.begin(), candidates.end(),
        [&](std::uint32_t h) { return log.hits[h].ts < a.ts; });
    if (pos == candidates.begin() ||
        a.ts - log.hits[*(pos - 1)].ts > cfg.window_for(a.kind)) {
      ++unattributed[index_of(a.kind)];
      continue;
    }
    AttributedActions& rec = per_hit[*(pos - 1)];
    switch (a.kind) {
      case ActionKind::Click:
        rec.clicked = true;
        if (first_click.insert(a.product, a.ts)) rec.clicked_norepeat = true;
        break;
      case ActionKind::AddToCart:
        rec.atc = true;
        if (first_atc.insert(a.product, a.ts)) rec.atc_norepeat = true;
        break;
      case ActionKind::Buy:
        rec.bought = true;
        if (!rec.clicked_and_bought) {
          for (const auto& c : rec.credited) {
            if (c.kind == leg && c.product == a.product) {
              rec.clicked_and_bought = true;
              break;
            }
          }
        }
        break;
    }
    rec.credited.push_back({a.kind, a.product, a.ts});
  }
}

}  // namespace detail

// Windowed last-touch join of actions onto hits. Customers are independent,
// so they are processed in parallel partitions; the result is identical for
// any thread count.
inline AttributionResult attribute(const EventLog& log, const WindowConfig& cfg,
                                   unsigned threads = 1) {
  cfg.validate();
  require_normalized(log);

  AttributionResult result;
  result.per_hit.resize(log.hits.size());
  for (std::size_t i = 0; i < log.hits.size(); ++i) {
    result.per_hit[i].hit_id = log.hits[i].hit_id;
  }

  std::unordered_map<std::string_view, std::uint32_t> customer_ids;
  customer_ids.reserve(log.hits.size() / 4 + 16);
  auto id_of = [&](const CustomerId& c) {
    auto [it, inserted] =
        customer_ids.try_emplace(c.value(), static_cast<std::uint32_t>(customer_ids.size()));
    return it->second;
  };
  std::vector<std::uint32_t> hit_customer(log.hits.size());
  std::vector<std::uint32_t> action_customer(log.actions.size());
  for (std::size_t i = 0; i < log.hits.size(); ++i) hit_customer[i] = id_of(log.hits[i].customer);
  for (std::size_t i = 0; i < log.actions.size(); ++i) {
    action_customer[i] = id_of(log.actions[i].customer);
  }
  const std::size_t customers = customer_ids.size();

  // Counting sort of event indices by customer; stable, so log order is kept
  // inside each customer's range.
  auto group = [customers](const std::vector<std::uint32_t>& owner,
                           std::vector<std::size_t>& start,
                           std::vector<std::uint32_t>& order) {
    start.assign(customers + 1, 0);
    for (auto c : owner) ++start[c + 1];
    for (std::size_t c = 0; c < customers; ++c) start[c + 1] += start[c];
    order.resize(owner.size());
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < owner.size(); ++i) {
      order[fill[owner[i]]++] = static_cast<std::uint32_t>(i);
    }
  };
  std::vector<std::size_t> hit_start, action_start;
  std::vector<std::uint32_t> hit_order, action_order;
  group(hit_customer, hit_start, hit_order);
  group(action_customer, action_start, action_order);

  std::vector<std::array<std::size_t, kActionKinds>> partial(
      std::max<std::size_t>(1, std::min<std::size_t>(threads, customers)));
  parallel_chunks(customers, threads,
                  [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                    for (std::size_t c = begin; c < end; ++c) {
                      std::span<const std::uint32_t> hits(
                          hit_order.data() + hit_start[c], hit_start[c + 1] - hit_start[c]);
                      std::span<const std::uint32_t> actions(
                          action_order.data() + action_start[c],
                          action_start[c + 1] - action_start[c]);
                      detail::attribute_customer(log, cfg, hits, actions, result.per_hit,
                                                 partial[chunk]);
                    }
                  });
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < kActionKinds; ++k) result.unattributed[k] += p[k];
  }
  return result;
}

}  // namespace reclens
