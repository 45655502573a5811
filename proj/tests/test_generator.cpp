#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace reclens;

namespace {

GeneratorConfig small() {
  GeneratorConfig c;
  c.customers = 150;
  c.days = 5;
  return c;
}

std::vector<MetricValue> measure(const GeneratorConfig& c) {
  return compute_all(attribute(generate(c).log, c.windows));
}

}  // namespace

TEST(Generator, Deterministic) {
  auto c = small();
  EXPECT_EQ(fixtures::to_jsonl(generate(c).log), fixtures::to_jsonl(generate(c).log));
  EXPECT_EQ(fixtures::to_jsonl(generate(c, 4).log), fixtures::to_jsonl(generate(c, 1).log));
  auto d = c;
  d.seed = 2;
  EXPECT_NE(fixtures::to_jsonl(generate(d).log), fixtures::to_jsonl(generate(c).log));
}

TEST(Generator, OutputIsValidLog) {
  auto g = generate(small());
  auto text = fixtures::to_jsonl(g.log);
  auto back = parse_log_text(text, "x");
  EXPECT_EQ(back.size(), g.log.size());
  auto v = validate_log(back);
  EXPECT_EQ(v.find("action_precedes_first_hit"), nullptr);
  for (const auto& h : g.log.hits) EXPECT_EQ(h.products.size(), 5u);
}

TEST(Generator, ZeroClickProbGivesZeroRates) {
  auto c = small();
  c.click_prob = 0.0;
  c.stray_buy_prob = 0.0;
  for (const auto& m : measure(c)) EXPECT_EQ(m.rate, 0.0) << metric_id(m.kind);
}

TEST(Generator, NoInflationSourcesGiveEqualities) {
  auto c = small();
  c.repeat_click_prob = 0.0;
  c.stray_buy_prob = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    c.seed = seed;
    auto m = measure(c);
    EXPECT_EQ(m[0].successes, m[1].successes);
    EXPECT_EQ(m[4].successes, m[5].successes);
  }
}

TEST(Generator, GroundTruthBandsContainMeasuredRates) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 12; ++i) {
    auto c = fixtures::random_config(rng, static_cast<std::uint64_t>(100 + i));
    c.customers = 400;
    auto g = generate(c);
    auto v = verify_ground_truth(g.log, g.truth, c.windows);
    for (const auto& check : v.checks) {
      EXPECT_TRUE(check.pass) << "config " << i << " " << metric_id(check.kind) << " measured "
                              << check.measured << " expected " << check.band.expected;
    }
  }
}

TEST(Generator, GroundTruthSimpleCases) {
  auto c = small();
  auto t = ground_truth(c);
  EXPECT_NEAR(t.of(MetricKind::CTR).expected, c.click_prob * c.latency_quantile_in_window, 1e-12);
  EXPECT_NEAR(t.of(MetricKind::ATC_TR).expected,
              c.click_prob * c.latency_quantile_in_window * c.atc_given_click_prob, 1e-12);
  c.repeat_click_prob = 0.0;
  c.stray_buy_prob = 0.0;
  t = ground_truth(c);
  EXPECT_NEAR(t.of(MetricKind::CTR).expected, t.of(MetricKind::CTR_NoRepeat).expected, 1e-12);
  EXPECT_NEAR(t.of(MetricKind::BTR).expected, t.of(MetricKind::ClickAndBuy).expected, 1e-12);
}

TEST(Generator, RepeatAndStrayProbesWidenGaps) {
  auto c = small();
  c.customers = 600;
  double last_click_gap = -1.0, last_expected_gap = -1.0, last_buy_gap = -1.0;
  for (double r : {0.0, 0.3, 0.6, 0.9}) {
    c.repeat_click_prob = r;
    auto t = ground_truth(c);
    auto m = measure(c);
    const double gap = m[0].rate - m[1].rate;
    const double expected_gap =
        t.of(MetricKind::CTR).expected - t.of(MetricKind::CTR_NoRepeat).expected;
    EXPECT_GT(gap, last_click_gap);
    EXPECT_GT(expected_gap, last_expected_gap);
    last_click_gap = gap;
    last_expected_gap = expected_gap;
  }
  c.repeat_click_prob = 0.3;
  for (double s : {0.0, 0.05, 0.1, 0.2}) {
    c.stray_buy_prob = s;
    auto m = measure(c);
    const double gap = m[4].rate - m[5].rate;
    EXPECT_GT(gap, last_buy_gap);
    last_buy_gap = gap;
  }
}

TEST(Generator, PresetsHitTargets) {
  for (auto p : {Preset::Table1, Preset::Table2}) {
    auto c = preset_config(p, 42);
    auto t = ground_truth(c);
    EXPECT_NEAR(t.of(MetricKind::CTR).expected, 0.09, 1e-3);
    EXPECT_NEAR(t.of(MetricKind::CTR_NoRepeat).expected, 0.07, 1e-3);
    EXPECT_NEAR(t.of(MetricKind::BTR).expected, 0.0042, 1e-4);
    EXPECT_NEAR(t.of(MetricKind::ClickAndBuy).expected, 0.0026, 1e-4);
    EXPECT_GT(t.expected_hits, 9e4);
  }
  EXPECT_EQ(parse_preset("table1"), Preset::Table1);
  EXPECT_THROW(parse_preset("table9"), std::invalid_argument);
}

TEST(Generator, ValidateRejectsBadConfigs) {
  auto c = small();
  c.click_prob = 1.5;
  EXPECT_THROW(c.validate(), InvalidConfig);
  c = small();
  c.products_per_hit = 1;
  EXPECT_THROW(c.validate(), InvalidConfig);
  c = small();
  c.catalog_size = 100;
  EXPECT_THROW(c.validate(), InvalidConfig);
  c = small();
  c.windows.atc_window = std::chrono::hours{9};
  EXPECT_THROW(c.validate(), InvalidConfig);
  c = small();
  c.windows.click_window = std::chrono::milliseconds{1500};
  EXPECT_THROW(c.validate(), InvalidConfig);
}
