#pragma once

#include <array>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "reclens/reclens.hpp"

namespace reclens::fixtures {

// "2023-01-01T" + hhmmss, or a full timestamp when it contains 'T'.
inline Timestamp ts(const std::string& s) {
  if (s.find('T') != std::string::npos) return parse_timestamp(s);
  std::string full = "2023-01-01T" + s;
  if (s.size() == 5) full += ":00";
  return parse_timestamp(full + "Z");
}

class LogBuilder {
 public:
  LogBuilder& hit(std::string id, std::string customer, std::vector<std::string> products,
                  const std::string& when, std::string widget = "w1") {
    Hit h;
    h.hit_id = std::move(id);
    h.customer = CustomerId(std::move(customer));
    h.widget_id = std::move(widget);
    h.ts = ts(when);
    for (auto& p : products) h.products.emplace_back(std::move(p));
    log_.hits.push_back(std::move(h));
    return *this;
  }

  LogBuilder& action(ActionKind kind, std::string customer, std::string product,
                     const std::string& when) {
    log_.actions.push_back(
        Action{kind, CustomerId(std::move(customer)), ProductId(std::move(product)), ts(when)});
    return *this;
  }

  LogBuilder& click(std::string c, std::string p, const std::string& when) {
    return action(ActionKind::Click, std::move(c), std::move(p), when);
  }
  LogBuilder& atc(std::string c, std::string p, const std::string& when) {
    return action(ActionKind::AddToCart, std::move(c), std::move(p), when);
  }
  LogBuilder& buy(std::string c, std::string p, const std::string& when) {
    return action(ActionKind::Buy, std::move(c), std::move(p), when);
  }

  EventLog build() const {
    EventLog log = log_;
    log.source_name = "test";
    normalize(log);
    return log;
  }

 private:
  EventLog log_;
};

inline std::string to_jsonl(const EventLog& log) {
  std::ostringstream out;
  write_log(log, out);
  return out.str();
}

inline const AttributedActions& by_id(const AttributionResult& r, const std::string& id) {
  for (const auto& a : r.per_hit) {
    if (a.hit_id == id) return a;
  }
  throw std::out_of_range(id);
}

// Small random config that keeps generation fast.
template <class Rng>
GeneratorConfig random_config(Rng& rng, std::uint64_t seed) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 3);
  GeneratorConfig c;
  c.seed = seed;
  c.customers = 20 + static_cast<std::size_t>(u(rng) * 60);
  c.days = 2 + static_cast<std::size_t>(u(rng) * 6);
  c.hits_per_customer_per_day = 0.5 + 4.0 * u(rng);
  c.products_per_hit = 2 + static_cast<std::size_t>(u(rng) * 5);
  c.catalog_size = 5000;
  c.click_prob = u(rng);
  c.repeat_click_prob = u(rng);
  c.atc_given_click_prob = u(rng);
  c.buy_given_click_prob = u(rng);
  c.stray_buy_prob = 0.2 * u(rng);
  c.latency_quantile_in_window = u(rng);
  const std::array<std::array<int, 3>, 4> windows{
      {{300, 1800, 86400}, {60, 60, 3600}, {120, 600, 7200}, {600, 3600, 172800}}};
  const auto& w = windows[static_cast<std::size_t>(pick(rng))];
  c.windows.click_window = std::chrono::seconds{w[0]};
  c.windows.atc_window = std::chrono::seconds{w[1]};
  c.windows.buy_window = std::chrono::seconds{w[2]};
  c.windows.norepeat_scope = u(rng) < 0.5 ? NoRepeatScope::Log : NoRepeatScope::Day;
  c.windows.candb_leg = u(rng) < 0.5 ? ClickAndBuyLeg::Click : ClickAndBuyLeg::AddToCart;
  return c;
}

}  // namespace reclens::fixtures
