#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <iterator>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "reclens/attribution.hpp"
#include "reclens/errors.hpp"
#include "reclens/events.hpp"
#include "reclens/metrics.hpp"
#include "reclens/parallel.hpp"
#include "reclens/time.hpp"

namespace reclens {

// Behavioral model of the synthetic log.
//
// Each customer gets min(Poisson(hits_per_customer_per_day), cap) hits per
// day, spaced at least 3 x atc_window + 1 s apart (so every click and ATC of
// one hit lands before the customer's next hit). A hit shows
// `products_per_hit` products the customer has never been shown before.
// Per hit:
//   - with click_prob the customer clicks one product. If the customer has a
//     favorite (the product of their latest in-window first-time click), the
//     click is a repeat with repeat_click_prob: the favorite is re-shown in a
//     random slot and clicked again. Otherwise a random shown product is
//     clicked.
//   - the hit's episode lands inside its windows with probability
//     latency_quantile_in_window; the click, its ATC and its buy share that
//     fate.
//   - after any click, an ATC on the same product with atc_given_click_prob.
//   - after a first-time click, a buy of the same product with
//     buy_given_click_prob. Repeat clicks are re-views and never lead to buys.
//   - independently, with stray_buy_prob, a buy of another shown product
//     that was never clicked, inside the buy window with the same quantile.
// Latencies: in-window actions are uniform over whole seconds inside the
// window (ATCs after their click, buys after their click and ATC, and those
// buys also before the customer's next hit); the rest are uniform in
// (window, 3 x window].
//
// Randomness: one std::mt19937_64 per customer, seeded with
// std::seed_seq{seed_lo, seed_hi, customer_lo, customer_hi}. Unit draws are
// (x >> 11) * 2^-53, bounded integers use rejection sampling and Poisson
// draws use Knuth's multiplication method. All of these are fully specified,
// so logs are reproducible across platforms.
struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::size_t customers = 1000;
  std::size_t days = 14;
  double hits_per_customer_per_day = 3.0;
  std::size_t products_per_hit = 5;
  std::size_t catalog_size = 20000;
  double click_prob = 0.15;
  double repeat_click_prob = 0.5;
  double atc_given_click_prob = 0.3;
  double buy_given_click_prob = 0.3;
  double stray_buy_prob = 0.01;
  double latency_quantile_in_window = 0.9;
  std::size_t widgets = 3;
  WindowConfig windows;
  Date start_date = std::chrono::sys_days{std::chrono::year{2023} / 1 / 1};

  Duration hit_gap() const { return 3 * windows.atc_window + std::chrono::seconds{1}; }

  // Most hits one customer can receive in a day under the spacing rule.
  std::size_t max_hits_per_day() const {
    const auto day = std::chrono::duration_cast<Duration>(std::chrono::hours{24});
    return static_cast<std::size_t>((day - hit_gap()) / hit_gap()) + 1;
  }

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidConfig(std::string(name) + " must be within [0, 1]");
      }
    };
    prob(click_prob, "click_prob");
    prob(repeat_click_prob, "repeat_click_prob");
    prob(atc_given_click_prob, "atc_given_click_prob");
    prob(buy_given_click_prob, "buy_given_click_prob");
    prob(stray_buy_prob, "stray_buy_prob");
    prob(latency_quantile_in_window, "latency_quantile_in_window");
    if (customers < 1 || days < 1 || widgets < 1 || catalog_size < 1) {
      throw InvalidConfig("customers, days, widgets and catalog_size must be >= 1");
    }
    if (products_per_hit < 2) throw InvalidConfig("products_per_hit must be >= 2");
    if (!(hits_per_customer_per_day > 0.0 && hits_per_customer_per_day <= 100.0)) {
      throw InvalidConfig("hits_per_customer_per_day must be within (0, 100]");
    }
    windows.validate();
    for (auto w : {windows.click_window, windows.atc_window, windows.buy_window}) {
      if (w % std::chrono::seconds{1} != Duration{0}) {
        throw InvalidConfig("generator windows must be whole seconds");
      }
    }
    if (hit_gap() > std::chrono::hours{24}) {
      throw InvalidConfig("atc_window too long for daily hit spacing (max 8h)");
    }
    const double expected_shown =
        hits_per_customer_per_day * static_cast<double>(days * products_per_hit);
    if (expected_shown > 0.5 * static_cast<double>(catalog_size)) {
      throw InvalidConfig("catalog_size too small for the number of products shown");
    }
  }
};

struct RateBand {
  MetricKind kind;
  double expected = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
};

// Expected metric rates implied by a GeneratorConfig, with bands of
// expected +- 5 sqrt(p(1-p)/n) where n is the expected hit count.
struct GroundTruth {
  double expected_hits = 0.0;
  std::vector<RateBand> rates;

  const RateBand& of(MetricKind k) const {
    for (const auto& r : rates) {
      if (r.kind == k) return r;
    }
    throw std::out_of_range("metric not in ground truth");
  }
};

namespace detail {

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

  // Uniform over [lo, hi] by rejection.
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % range);
  }

  std::size_t poisson(double mean) {
    const double limit = std::exp(-mean);
    std::size_t k = 0;
    double prod = unit();
    while (prod > limit) {
      ++k;
      prod *= unit();
    }
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

struct GeneratedEvent {
  Timestamp ts;
  std::size_t customer;
  std::size_t seq;
  Event event;
};

inline std::string numbered(char prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, n);
  return buf;
}

inline std::vector<GeneratedEvent> generate_customer(const GeneratorConfig& cfg,
                                                     std::size_t customer) {
  using std::chrono::seconds;
  Rng rng(cfg.seed, customer);
  const CustomerId cust(numbered('c', customer, 6));
  const std::int64_t gap = std::chrono::duration_cast<seconds>(cfg.hit_gap()).count();
  const std::int64_t day_span = 86400 - gap;
  const std::int64_t wc = std::chrono::duration_cast<seconds>(cfg.windows.click_window).count();
  const std::int64_t wa = std::chrono::duration_cast<seconds>(cfg.windows.atc_window).count();
  const std::int64_t wb = std::chrono::duration_cast<seconds>(cfg.windows.buy_window).count();
  const std::size_t cap = cfg.max_hits_per_day();
  const std::int64_t products = static_cast<std::int64_t>(cfg.products_per_hit);

  std::vector<GeneratedEvent> out;
  std::unordered_set<std::size_t> seen;
  std::optional<std::size_t> favorite;
  std::size_t seq = 0, hit_no = 0;

  auto fresh_product = [&]() -> std::size_t {
    if (seen.size() >= cfg.catalog_size) {
      throw InvalidConfig("catalog exhausted for customer " + cust.value());
    }
    while (true) {
      auto p = static_cast<std::size_t>(
          rng.uniform(0, static_cast<std::int64_t>(cfg.catalog_size) - 1));
      if (seen.insert(p).second) return p;
    }
  };
  auto product_id = [](std::size_t p) { return ProductId(numbered('p', p, 6)); };
  // Whole-second latency: inside (lower, window] or in (window, 3 x window].
  auto latency = [&](bool inside, std::int64_t lower, std::int64_t window) {
    if (inside) return lower >= window ? window : rng.uniform(lower + 1, window);
    return rng.uniform(window + 1, 3 * window);
  };
  auto emit_action = [&](ActionKind kind, std::size_t product, Timestamp ts) {
    out.push_back({ts, customer, seq++, Action{kind, cust, product_id(product), ts}});
  };

  std::vector<Timestamp> hit_times;
  for (std::size_t d = 0; d < cfg.days; ++d) {
    const std::size_t k = std::min(rng.poisson(cfg.hits_per_customer_per_day), cap);
    std::vector<std::int64_t> offsets(k);
    for (auto& o : offsets) o = rng.uniform(0, day_span - static_cast<std::int64_t>(k - 1) * gap);
    std::sort(offsets.begin(), offsets.end());
    const Timestamp day_start{cfg.start_date + std::chrono::days{static_cast<int>(d)}};
    for (std::size_t i = 0; i < k; ++i) {
      hit_times.push_back(day_start + seconds{offsets[i] + static_cast<std::int64_t>(i) * gap});
    }
  }

  for (std::size_t i = 0; i < hit_times.size(); ++i) {
    const Timestamp hit_ts = hit_times[i];
    // In-window buys after a click stay before the next hit, which could
    // re-show the product and take the credit.
    const std::int64_t buy_limit =
        i + 1 < hit_times.size()
            ? std::min(wb, std::chrono::duration_cast<seconds>(hit_times[i + 1] - hit_ts).count() - 1)
            : wb;
    Hit hit;
    hit.hit_id = "h" + numbered('c', customer, 6).substr(1) + "-" + std::to_string(hit_no++);
    hit.customer = cust;
    hit.widget_id = numbered('w', static_cast<std::size_t>(
                                      rng.uniform(1, static_cast<std::int64_t>(cfg.widgets))),
                             1);
    hit.ts = hit_ts;
    std::vector<std::size_t> shown(cfg.products_per_hit);
    for (auto& p : shown) p = fresh_product();

    std::optional<std::int64_t> clicked_slot;
    struct Pending {
      ActionKind kind;
      std::size_t product;
      std::int64_t latency;
    };
    std::vector<Pending> pending;
    if (rng.bernoulli(cfg.click_prob)) {
      const bool repeat = favorite && rng.bernoulli(cfg.repeat_click_prob);
      const std::int64_t slot = rng.uniform(0, products - 1);
      if (repeat) shown[static_cast<std::size_t>(slot)] = *favorite;
      clicked_slot = slot;
      const std::size_t target = shown[static_cast<std::size_t>(slot)];
      const bool inside = rng.bernoulli(cfg.latency_quantile_in_window);
      const std::int64_t click_lat = latency(inside, 0, wc);
      pending.push_back({ActionKind::Click, target, click_lat});
      std::int64_t last_lat = click_lat;
      if (rng.bernoulli(cfg.atc_given_click_prob)) {
        const std::int64_t atc_lat = latency(inside, click_lat, wa);
        pending.push_back({ActionKind::AddToCart, target, atc_lat});
        last_lat = std::max(last_lat, atc_lat);
      }
      if (!repeat && rng.bernoulli(cfg.buy_given_click_prob)) {
        const std::int64_t buy_lat =
            inside ? (last_lat >= buy_limit ? buy_limit : rng.uniform(last_lat + 1, buy_limit))
                   : latency(false, 0, wb);
        pending.push_back({ActionKind::Buy, target, buy_lat});
      }
      if (inside && !repeat) favorite = target;
    }
    if (rng.bernoulli(cfg.stray_buy_prob)) {
      std::int64_t slot;
      if (clicked_slot) {
        slot = rng.uniform(0, products - 2);
        if (slot >= *clicked_slot) ++slot;
      } else {
        slot = rng.uniform(0, products - 1);
      }
      const bool inside = rng.bernoulli(cfg.latency_quantile_in_window);
      pending.push_back(
          {ActionKind::Buy, shown[static_cast<std::size_t>(slot)], latency(inside, 0, wb)});
    }

    hit.products.reserve(shown.size());
    for (auto p : shown) hit.products.push_back(product_id(p));
    out.push_back({hit_ts, customer, seq++, std::move(hit)});
    for (const auto& p : pending) emit_action(p.kind, p.product, hit_ts + seconds{p.latency});
  }
  return out;
}

// Distribution of the number of in-window clicks per customer: a binomial
// thinning of the (capped-Poisson) hit count summed over days.
struct ClickCountModel {
  double expected_hits = 0.0;
  std::vector<double> k_pmf;
};

inline ClickCountModel click_count_model(const GeneratorConfig& cfg) {
  const std::size_t cap = cfg.max_hits_per_day();
  const double lambda = cfg.hits_per_customer_per_day;
  std::vector<double> day_pmf(cap + 1, 0.0);
  double tail = 1.0;
  for (std::size_t k = 0; k < cap; ++k) {
    day_pmf[k] = std::exp(-lambda + static_cast<double>(k) * std::log(lambda) -
                          std::lgamma(static_cast<double>(k) + 1.0));
    tail -= day_pmf[k];
  }
  day_pmf[cap] = std::max(0.0, tail);

  std::vector<double> n_pmf{1.0};
  for (std::size_t d = 0; d < cfg.days; ++d) {
    std::vector<double> next(n_pmf.size() + cap, 0.0);
    for (std::size_t i = 0; i < n_pmf.size(); ++i) {
      if (n_pmf[i] == 0.0) continue;
      for (std::size_t k = 0; k <= cap; ++k) next[i + k] += n_pmf[i] * day_pmf[k];
    }
    n_pmf = std::move(next);
  }

  ClickCountModel m;
  for (std::size_t n = 0; n < n_pmf.size(); ++n) m.expected_hits += static_cast<double>(n) * n_pmf[n];

  const double pi = cfg.click_prob * cfg.latency_quantile_in_window;
  m.k_pmf.assign(n_pmf.size(), 0.0);
  for (std::size_t n = 0; n < n_pmf.size(); ++n) {
    if (n_pmf[n] < 1e-300) continue;
    for (std::size_t k = 0; k <= n; ++k) {
      double log_binom = std::lgamma(static_cast<double>(n) + 1.0) -
                         std::lgamma(static_cast<double>(k) + 1.0) -
                         std::lgamma(static_cast<double>(n - k) + 1.0);
      double term;
      if (pi == 0.0) {
        term = k == 0 ? 1.0 : 0.0;
      } else if (pi == 1.0) {
        term = k == n ? 1.0 : 0.0;
      } else {
        term = std::exp(log_binom + static_cast<double>(k) * std::log(pi) +
                        static_cast<double>(n - k) * std::log1p(-pi));
      }
      m.k_pmf[k] += n_pmf[n] * term;
    }
  }
  return m;
}

}  // namespace detail

// Closed-form expectations of the rates under the model above. NoRepeat
// bands exist only for NoRepeatScope::Log; with per-day scope they are left
// out.
//
// With K the per-customer count of in-window clicks, the j-th of them starts
// a new favorite (a first-time click) for j = 1 and with 1 - r afterwards.
// The ATC-NoRepeat credit of the j-th is a (1 - a)^m where m counts earlier
// in-window episodes on the same favorite.
inline GroundTruth ground_truth(const GeneratorConfig& cfg) {
  cfg.validate();
  const auto model = detail::click_count_model(cfg);
  const double q = cfg.latency_quantile_in_window;
  const double r = cfg.repeat_click_prob;
  const double a = cfg.atc_given_click_prob;
  const double b = cfg.buy_given_click_prob;
  const double s = cfg.stray_buy_prob;
  const double hits = model.expected_hits;

  // P(K >= j)
  std::vector<double> at_least(model.k_pmf.size() + 1, 0.0);
  for (std::size_t j = model.k_pmf.size(); j-- > 0;) at_least[j] = at_least[j + 1] + model.k_pmf[j];

  double clicks = 0.0, first_clicks = 0.0, first_atcs = 0.0;
  for (std::size_t j = 1; j < at_least.size(); ++j) {
    const double w = at_least[j];
    if (w == 0.0) continue;
    clicks += w;
    first_clicks += (j == 1 ? 1.0 : 1.0 - r) * w;
    double g;
    if (j == 1) {
      g = a;
    } else {
      g = (1.0 - r) * a;
      // Chain started at click s0 < j; clicks s0+1 .. j are repeats.
      for (std::size_t s0 = 1; s0 < j; ++s0) {
        const double start = s0 == 1 ? 1.0 : 1.0 - r;
        g += r * std::pow(r, static_cast<double>(j - 1 - s0)) * start * a *
             std::pow(1.0 - a, static_cast<double>(j - s0));
      }
    }
    first_atcs += g * w;
  }

  GroundTruth t;
  t.expected_hits = hits * static_cast<double>(cfg.customers);
  auto band = [&](MetricKind k, double p) {
    p = std::clamp(p, 0.0, 1.0);
    const double half = 5.0 * std::sqrt(p * (1.0 - p) / t.expected_hits);
    t.rates.push_back({k, p, p - half, p + half});
  };
  const double per_hit = hits > 0.0 ? 1.0 / hits : 0.0;
  const bool log_scope = cfg.windows.norepeat_scope == NoRepeatScope::Log;
  band(MetricKind::CTR, clicks * per_hit);
  if (log_scope) band(MetricKind::CTR_NoRepeat, first_clicks * per_hit);
  band(MetricKind::ATC_TR, a * clicks * per_hit);
  if (log_scope) band(MetricKind::ATC_TR_NoRepeat, first_atcs * per_hit);
  // Buys follow first-time clicks only, and land after the episode's ATC.
  const double fresh_buy = b * first_clicks * per_hit;
  band(MetricKind::BTR, fresh_buy * (1.0 - s * q) + s * q);
  band(MetricKind::ClickAndBuy,
       cfg.windows.candb_leg == ClickAndBuyLeg::Click ? fresh_buy : a * fresh_buy);
  return t;
}

struct GeneratedLog {
  EventLog log;
  GroundTruth truth;
};

// Deterministic in (cfg); `threads` never changes the output.
inline GeneratedLog generate(const GeneratorConfig& cfg, unsigned threads = 1) {
  GeneratedLog g;
  g.truth = ground_truth(cfg);

  std::vector<std::vector<detail::GeneratedEvent>> per_customer(cfg.customers);
  parallel_chunks(cfg.customers, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) per_customer[c] = detail::generate_customer(cfg, c);
  });

  std::vector<detail::GeneratedEvent> all;
  std::size_t total = 0;
  for (const auto& v : per_customer) total += v.size();
  all.reserve(total);
  for (auto& v : per_customer) {
    std::move(v.begin(), v.end(), std::back_inserter(all));
    std::vector<detail::GeneratedEvent>().swap(v);
  }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    if (x.ts != y.ts) return x.ts < y.ts;
    if (x.customer != y.customer) return x.customer < y.customer;
    return x.seq < y.seq;
  });

  g.log.source_name = "generated(seed=" + std::to_string(cfg.seed) + ")";
  for (auto& e : all) {
    if (auto* hit = std::get_if<Hit>(&e.event)) {
      g.log.hits.push_back(std::move(*hit));
    } else {
      g.log.actions.push_back(std::move(std::get<Action>(e.event)));
    }
  }
  return g;
}

enum class Preset { Default, Table1, Table2 };

inline Preset parse_preset(std::string_view s) {
  if (s == "default") return Preset::Default;
  if (s == "table1") return Preset::Table1;
  if (s == "table2") return Preset::Table2;
  throw std::invalid_argument("unknown preset '" + std::string(s) + "'");
}

// `table1` and `table2` share one parameter set: 11 days, ~10^5 hits,
// CTR 0.09 / CTR-NoRepeat 0.07 and BTR 0.0042 / Click & Buy 0.0026.
inline GeneratorConfig preset_config(Preset p, std::uint64_t seed = 1) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  if (p == Preset::Default) return cfg;
  cfg.customers = 3000;
  cfg.days = 11;
  cfg.hits_per_customer_per_day = 3.0;
  cfg.products_per_hit = 5;
  cfg.catalog_size = 20000;
  cfg.click_prob = 0.1;
  cfg.latency_quantile_in_window = 0.9;
  cfg.repeat_click_prob = 0.3265;
  cfg.atc_given_click_prob = 0.3;
  cfg.buy_given_click_prob = 0.037143;
  cfg.stray_buy_prob = 0.0017824;
  return cfg;
}

struct TruthCheck {
  MetricKind kind;
  double measured = 0.0;
  RateBand band;
  bool pass = false;
};

struct TruthVerification {
  std::vector<TruthCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  }
};

// Runs attribute -> compute_all and checks every rate that has a band.
inline TruthVerification verify_ground_truth(const EventLog& log, const GroundTruth& truth,
                                             const WindowConfig& windows, unsigned threads = 1) {
  TruthVerification v;
  auto metrics = compute_all(attribute(log, windows, threads));
  for (const auto& m : metrics) {
    auto it = std::find_if(truth.rates.begin(), truth.rates.end(),
                           [&](const RateBand& r) { return r.kind == m.kind; });
    if (it == truth.rates.end()) continue;
    const RateBand& band = *it;
    v.checks.push_back({m.kind, m.rate, band, band.contains(m.rate)});
  }
  return v;
}

}  // namespace reclens
