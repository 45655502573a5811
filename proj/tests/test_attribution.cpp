#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "reclens/attribution_oracle.hpp"

using namespace reclens;
using reclens::fixtures::by_id;
using reclens::fixtures::LogBuilder;

namespace {

AttributionResult run(const EventLog& log, const WindowConfig& cfg = {}) {
  auto fast = attribute(log, cfg);
  EXPECT_EQ(fast, attribution_oracle(log, cfg));
  return fast;
}

}  // namespace

TEST(Attribution, ClickInsideWindow) {
  auto r = run(LogBuilder().hit("h1", "c1", {"p1"}, "10:00").click("c1", "p1", "10:04").build());
  EXPECT_TRUE(by_id(r, "h1").clicked);
  EXPECT_TRUE(by_id(r, "h1").clicked_norepeat);
}

TEST(Attribution, ClickOutsideWindow) {
  auto r = run(LogBuilder().hit("h1", "c1", {"p1"}, "10:00").click("c1", "p1", "10:06").build());
  EXPECT_FALSE(by_id(r, "h1").clicked);
  EXPECT_EQ(r.unattributed_of(ActionKind::Click), 1u);
}

TEST(Attribution, WindowBoundaries) {
  // Exactly at the window end counts; a zero delay does not.
  auto r = run(LogBuilder()
                   .hit("h1", "c1", {"p1"}, "10:00")
                   .click("c1", "p1", "10:05")
                   .hit("h2", "c2", {"p1"}, "10:00")
                   .click("c2", "p1", "10:00")
                   .build());
  EXPECT_TRUE(by_id(r, "h1").clicked);
  EXPECT_FALSE(by_id(r, "h2").clicked);
}

TEST(Attribution, RepeatClickLosesNoRepeat) {
  auto r = run(LogBuilder()
                   .hit("h1", "c1", {"p1"}, "10:00")
                   .click("c1", "p1", "10:01")
                   .hit("h2", "c1", {"p1"}, "11:00")
                   .click("c1", "p1", "11:01")
                   .build());
  EXPECT_TRUE(by_id(r, "h1").clicked);
  EXPECT_TRUE(by_id(r, "h1").clicked_norepeat);
  EXPECT_TRUE(by_id(r, "h2").clicked);
  EXPECT_FALSE(by_id(r, "h2").clicked_norepeat);
}

TEST(Attribution, DayScopeRearmsNoRepeat) {
  auto log = LogBuilder()
                 .hit("h1", "c1", {"p1"}, "10:00")
                 .click("c1", "p1", "10:01")
                 .hit("h2", "c1", {"p1"}, "2023-01-02T10:00:00Z")
                 .click("c1", "p1", "2023-01-02T10:01:00Z")
                 .build();
  WindowConfig cfg;
  cfg.norepeat_scope = NoRepeatScope::Day;
  auto r = run(log, cfg);
  EXPECT_TRUE(by_id(r, "h2").clicked_norepeat);
  auto whole = run(log);
  EXPECT_FALSE(by_id(whole, "h2").clicked_norepeat);
}

TEST(Attribution, NoRepeatUsesFirstCreditedClick) {
  // The uncredited earlier click does not consume the pair.
  auto r = run(LogBuilder()
                   .hit("h1", "c1", {"p1"}, "10:00")
                   .click("c1", "p1", "10:20")
                   .hit("h2", "c1", {"p1"}, "11:00")
                   .click("c1", "p1", "11:01")
                   .build());
  EXPECT_FALSE(by_id(r, "h1").clicked);
  EXPECT_TRUE(by_id(r, "h2").clicked_norepeat);
}

TEST(Attribution, ClickThenBuyNextDay) {
  auto r = run(LogBuilder()
                   .hit("h1", "c1", {"p1"}, "10:00")
                   .click("c1", "p1", "10:03")
                   .buy("c1", "p1", "2023-01-02T09:00:00Z")
                   .build());
  EXPECT_TRUE(by_id(r, "h1").bought);
  EXPECT_TRUE(by_id(r, "h1").clicked_and_bought);
}

TEST(Attribution, BuyWithoutClick) {
  auto r = run(LogBuilder().hit("h1", "c1", {"p1"}, "10:00").buy("c1", "p1", "12:00").build());
  EXPECT_TRUE(by_id(r, "h1").bought);
  EXPECT_FALSE(by_id(r, "h1").clicked_and_bought);
}

TEST(Attribution, BuyAfterWindowNotCredited) {
  auto r = run(LogBuilder()
                   .hit("h1", "c1", {"p1"}, "10:00")
                   .click("c1", "p1", "10:03")
                   .buy("c1", "p1", "2023-01-02T10:00:01Z")
                   .build());
  EXPECT_FALSE(by_id(r, "h1").bought);
  EXPECT_FALSE(by_id(r, "h1").clicked_and_bought);
}

TEST(Attribution, ClickOnOtherProductDoesNotChain) {
  auto r = run(LogBuilder()
                   .hit("h1", "c1", {"p1", "p2"}, "10:00")
                   .click("c1", "p1", "10:03")
                   .buy("c1", "p2", "12:00")
                   .build());
  EXPECT_TRUE(by_id(r, "h1").clicked);
  EXPECT_TRUE(by_id(r, "h1").bought);
  EXPECT_FALSE(by_id(r, "h1").clicked_and_bought);
}

TEST(Attribution, BuyBeforeClickDoesNotChain) {
  auto r = run(LogBuilder()
                   .hit("h1", "c1", {"p1"}, "10:00")
                   .buy("c1", "p1", "10:02")
                   .click("c1", "p1", "10:03")
                   .build());
  EXPECT_TRUE(by_id(r, "h1").bought);
  EXPECT_FALSE(by_id(r, "h1").clicked_and_bought);
}

TEST(Attribution, BuyConsumedByOneHitOnly) {
  // Two hits both clicked; the single buy lands on the later hit only.
  auto r = run(LogBuilder()
                   .hit("h1", "c1", {"p1"}, "10:00")
                   .click("c1", "p1", "10:01")
                   .hit("h2", "c1", {"p1"}, "10:30")
                   .click("c1", "p1", "10:31")
                   .buy("c1", "p1", "12:00")
                   .build());
  EXPECT_FALSE(by_id(r, "h1").clicked_and_bought);
  EXPECT_TRUE(by_id(r, "h2").clicked_and_bought);
}

TEST(Attribution, AtcLegVariant) {
  auto log = LogBuilder()
                 .hit("h1", "c1", {"p1"}, "10:00")
                 .atc("c1", "p1", "10:20")
                 .buy("c1", "p1", "13:00")
                 .build();
  WindowConfig cfg;
  cfg.candb_leg = ClickAndBuyLeg::AddToCart;
  EXPECT_TRUE(by_id(run(log, cfg), "h1").clicked_and_bought);
  EXPECT_FALSE(by_id(run(log), "h1").clicked_and_bought);
  EXPECT_TRUE(by_id(run(log), "h1").atc_norepeat);
}

TEST(Attribution, LastTouchPicksLatestHit) {
  auto r = run(LogBuilder()
                   .hit("h1", "c1", {"p1"}, "10:00")
                   .hit("h2", "c1", {"p1", "p2"}, "10:02")
                   .hit("h3", "c1", {"p2"}, "10:03")
                   .click("c1", "p1", "10:04")
                   .build());
  EXPECT_FALSE(by_id(r, "h1").clicked);
  EXPECT_TRUE(by_id(r, "h2").clicked);
  EXPECT_FALSE(by_id(r, "h3").clicked);
  ASSERT_EQ(by_id(r, "h2").credited.size(), 1u);
}

TEST(Attribution, EqualTimestampHitsResolveToLaterInLog) {
  auto r = run(LogBuilder()
                   .hit("h1", "c1", {"p1"}, "10:00")
                   .hit("h2", "c1", {"p1"}, "10:00")
                   .click("c1", "p1", "10:01")
                   .build());
  EXPECT_FALSE(by_id(r, "h1").clicked);
  EXPECT_TRUE(by_id(r, "h2").clicked);
}

TEST(Attribution, OtherCustomersHitsIgnored) {
  auto r = run(LogBuilder()
                   .hit("h1", "c1", {"p1"}, "10:00")
                   .hit("h2", "c2", {"p1"}, "10:01")
                   .click("c1", "p1", "10:02")
                   .build());
  EXPECT_TRUE(by_id(r, "h1").clicked);
  EXPECT_FALSE(by_id(r, "h2").clicked);
}

TEST(Attribution, RejectsBadWindowsAndUnsortedLogs) {
  WindowConfig cfg;
  cfg.click_window = std::chrono::hours{1};
  EXPECT_THROW(attribute(EventLog{}, cfg), InvalidConfig);
  cfg = {};
  cfg.buy_window = Duration{0};
  EXPECT_THROW(attribute(EventLog{}, cfg), InvalidConfig);

  auto log = LogBuilder().hit("h1", "c1", {"p1"}, "10:00").hit("h2", "c1", {"p1"}, "11:00").build();
  std::swap(log.hits[0], log.hits[1]);
  EXPECT_THROW(attribute(log, {}), Error);
}

namespace {

// Small catalogs, coarse timestamps and many ties stress the tie rules.
EventLog chaos_log(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> customers(1, 3), products(1, 4), minute(0, 90),
      size(1, 3), kind(0, 2), count(1, 25);
  LogBuilder b;
  int hits = count(rng), actions = count(rng) * 2;
  for (int i = 0; i < hits; ++i) {
    std::vector<std::string> shown;
    int n = size(rng);
    for (int p = 1; shown.size() < static_cast<std::size_t>(n) && p <= 4; ++p) {
      if (products(rng) <= 2) shown.push_back("p" + std::to_string(p));
    }
    if (shown.empty()) shown.push_back("p1");
    char when[16];
    std::snprintf(when, sizeof when, "%02d:%02d", 10 + minute(rng) / 60, minute(rng) % 60);
    b.hit("h" + std::to_string(i), "c" + std::to_string(customers(rng)), shown, when);
  }
  for (int i = 0; i < actions; ++i) {
    char when[16];
    int m = minute(rng) + 2;
    std::snprintf(when, sizeof when, "%02d:%02d", 10 + m / 60, m % 60);
    b.action(static_cast<ActionKind>(kind(rng)), "c" + std::to_string(customers(rng)),
             "p" + std::to_string(products(rng)), when);
  }
  return b.build();
}

}  // namespace

TEST(AttributionProperty, ChaosLogsMatchOracle) {
  std::mt19937_64 rng(12345);
  for (int iter = 0; iter < 2000; ++iter) {
    auto log = chaos_log(rng);
    for (auto scope : {NoRepeatScope::Log, NoRepeatScope::Day}) {
      for (auto leg : {ClickAndBuyLeg::Click, ClickAndBuyLeg::AddToCart}) {
        WindowConfig cfg;
        cfg.click_window = std::chrono::minutes{5};
        cfg.atc_window = std::chrono::minutes{20};
        cfg.buy_window = std::chrono::minutes{45};
        cfg.norepeat_scope = scope;
        cfg.candb_leg = leg;
        cfg.day_offset = std::chrono::hours{-10};
        auto fast = attribute(log, cfg, 1 + iter % 3);
        ASSERT_EQ(fast, attribution_oracle(log, cfg)) << "iteration " << iter;
      }
    }
  }
}

TEST(AttributionProperty, Invariants) {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 40; ++iter) {
    auto cfg = fixtures::random_config(rng, static_cast<std::uint64_t>(iter));
    auto g = generate(cfg);
    auto r = attribute(g.log, cfg.windows);
    std::array<std::size_t, kActionKinds> credited{}, total{};
    for (const auto& a : g.log.actions) ++total[index_of(a.kind)];
    for (const auto& h : r.per_hit) {
      EXPECT_TRUE(!h.clicked_norepeat || h.clicked);
      EXPECT_TRUE(!h.atc_norepeat || h.atc);
      EXPECT_TRUE(!h.clicked_and_bought || h.bought);
      for (const auto& c : h.credited) ++credited[index_of(c.kind)];
    }
    for (std::size_t k = 0; k < kActionKinds; ++k) {
      EXPECT_EQ(credited[k] + r.unattributed[k], total[k]);
    }
  }
}

TEST(AttributionProperty, ThreadCountDoesNotChangeResult) {
  GeneratorConfig cfg;
  cfg.customers = 300;
  auto g = generate(cfg);
  auto one = attribute(g.log, cfg.windows, 1);
  for (unsigned t : {2u, 5u, 16u}) EXPECT_EQ(attribute(g.log, cfg.windows, t), one);
}
