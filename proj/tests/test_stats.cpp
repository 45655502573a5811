#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/statistics/bivariate_statistics.hpp>
#include <cmath>
#include <random>

#include "helpers.hpp"

using namespace reclens;

namespace {

double boost_two_sided(double t, double df) {
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

double rel(double got, double want) {
  if (got == want) return 0.0;
  return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
}

SampleSummary summary(double p, std::size_t n) {
  return SampleSummary::of(MetricValue::from_counts(
      MetricKind::CTR, static_cast<std::size_t>(std::llround(p * static_cast<double>(n))), n));
}

}  // namespace

TEST(Stats, StudentTMatchesBoost) {
  for (double df : {1.0, 2.0, 3.5, 10.0, 29.0, 100.0, 1000.0, 1e4, 2e5, 4e6}) {
    for (double t : {1e-6, 0.1, 0.5, 1.0, 1.96, 2.5, 4.0, 8.0, 20.0, 100.0}) {
      const double want = boost_two_sided(t, df);
      if (want < 1e-290) continue;
      EXPECT_LT(rel(student_t_two_sided(t, df), want), 1e-9) << "t=" << t << " df=" << df;
      EXPECT_EQ(student_t_two_sided(-t, df), student_t_two_sided(t, df));
    }
  }
}

TEST(Stats, StudentTEdges) {
  EXPECT_EQ(student_t_two_sided(0.0, 5.0), 1.0);
  EXPECT_EQ(student_t_two_sided(INFINITY, 5.0), 0.0);
  EXPECT_THROW(student_t_two_sided(1.0, 0.0), std::invalid_argument);
  // Known value: df = 1 is Cauchy, P(|T| >= 1) = 1/2.
  EXPECT_NEAR(student_t_two_sided(1.0, 1.0), 0.5, 1e-15);
}

TEST(Stats, ChooseTestBoundaries) {
  SampleSummary a{0.1, 2.0, 10}, b{0.1, 1.0, 10};
  EXPECT_EQ(choose_test(a, b).variant, TestVariant::Pooled);
  a.std_dev = 0.5;
  EXPECT_EQ(choose_test(a, b).variant, TestVariant::Pooled);
  a.std_dev = 2.0000001;
  EXPECT_EQ(choose_test(a, b).variant, TestVariant::Unpooled);
  a.std_dev = 0.4999999;
  EXPECT_EQ(choose_test(a, b).variant, TestVariant::Unpooled);
  a.std_dev = 0.0;
  auto c = choose_test(a, b);
  EXPECT_TRUE(c.degenerate);
  EXPECT_EQ(c.variant, TestVariant::Unpooled);
}

TEST(Stats, PooledMatchesDirectFormula) {
  SampleSummary a{0.09, 0.0012, 103212}, b{0.07, 0.0011, 103212};
  auto r = pooled_ttest(a, b);
  const long double n = 103212.0L;
  const long double sp = std::sqrt(((n - 1) * 0.0012L * 0.0012L + (n - 1) * 0.0011L * 0.0011L) /
                                   (2 * n - 2));
  const long double t = (0.09L - 0.07L) / (sp * std::sqrt(2.0L / n));
  EXPECT_LT(rel(r.t, static_cast<double>(t)), 1e-12);
  EXPECT_EQ(r.df, 2 * 103212.0 - 2);
  EXPECT_TRUE(r.reject_at_05);
  EXPECT_LT(r.p_value, 1e-6);
  EXPECT_EQ(r.variant, TestVariant::Pooled);
}

TEST(Stats, WelchDegreesOfFreedom) {
  SampleSummary a{1.0, 2.0, 12}, b{0.0, 0.5, 30};
  auto r = unpooled_ttest(a, b);
  const double v1 = 4.0 / 12, v2 = 0.25 / 30;
  const double df = (v1 + v2) * (v1 + v2) / (v1 * v1 / 11 + v2 * v2 / 29);
  EXPECT_NEAR(r.df, df, 1e-12 * df);
  EXPECT_NEAR(r.t, 1.0 / std::sqrt(v1 + v2), 1e-12);
  EXPECT_LT(rel(r.p_value, boost_two_sided(r.t, r.df)), 1e-9);
  EXPECT_EQ(ttest(a, b).variant, TestVariant::Unpooled);
}

TEST(Stats, SymmetricSwap) {
  SampleSummary a{0.2, 0.01, 500}, b{0.18, 0.012, 600};
  auto ab = ttest(a, b), ba = ttest(b, a);
  EXPECT_EQ(ab.t, -ba.t);
  EXPECT_EQ(ab.p_value, ba.p_value);
}

TEST(Stats, EqualMeansGivePOne) {
  auto s = summary(0.1, 1000);
  auto r = ttest(s, s);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_FALSE(r.reject_at_05);
}

TEST(Stats, ZeroVarianceIsDegenerate) {
  auto zero = summary(0.0, 1000);
  auto r = compare_metrics(MetricValue::from_counts(MetricKind::BTR, 0, 1000),
                           MetricValue::from_counts(MetricKind::ClickAndBuy, 0, 1000));
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_FALSE(r.sd_ratio.has_value());

  auto half = ttest(summary(0.01, 1000), zero);
  EXPECT_TRUE(half.degenerate);
  EXPECT_EQ(half.variant, TestVariant::Unpooled);
  EXPECT_GT(half.t, 0.0);

  SampleSummary flat_a{0.5, 0.0, 10}, flat_b{0.25, 0.0, 10};
  auto inf = ttest(flat_a, flat_b);
  EXPECT_TRUE(std::isinf(inf.t));
  EXPECT_EQ(inf.p_value, 0.0);
  EXPECT_TRUE(inf.reject_at_05);
}

TEST(Stats, RejectsTinySamples) {
  SampleSummary one{0.5, 0.1, 1}, ok{0.5, 0.1, 10};
  EXPECT_THROW(ttest(one, ok), InvalidSample);
  SampleSummary bad{0.5, -1.0, 10};
  EXPECT_THROW(ttest(bad, ok), InvalidSample);
}

TEST(Stats, RandomTestsMatchOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> mean(-5, 5), sd(0.01, 3), u(0, 1);
  std::uniform_int_distribution<std::size_t> n(2, 5000);
  for (int i = 0; i < 500; ++i) {
    SampleSummary a{mean(rng), sd(rng), n(rng)}, b{mean(rng), sd(rng), n(rng)};
    if (u(rng) < 0.3) b.std_dev = a.std_dev * (0.5 + 1.5 * u(rng));
    for (auto r : {pooled_ttest(a, b), unpooled_ttest(a, b)}) {
      const double want = boost_two_sided(r.t, r.df);
      if (want < 1e-290) continue;
      EXPECT_LT(rel(r.p_value, want), 1e-9) << r.t << " " << r.df;
    }
  }
}

TEST(Stats, PearsonMatchesBoost) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(3 + i % 40), y(x.size());
    const double rho = std::uniform_real_distribution<double>(-1, 1)(rng);
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = z(rng);
      y[k] = rho * x[k] + std::sqrt(1 - rho * rho) * z(rng) + 100.0;
    }
    const double want = boost::math::statistics::correlation_coefficient(x, y);
    EXPECT_LT(rel(pearson(x, y), want), 1e-9);
  }
}

TEST(Stats, PearsonErrors) {
  std::vector<double> a{1, 2, 3}, b{2, 2, 2}, c{1, 2};
  EXPECT_THROW(pearson(a, b), ConstantSeries);
  EXPECT_THROW(pearson(a, c), LengthMismatch);
  std::vector<double> one{1};
  EXPECT_THROW(pearson(one, one), InvalidSample);
  std::vector<double> d{2, 4, 6};
  EXPECT_DOUBLE_EQ(pearson(a, d), 1.0);
}

TEST(Stats, CorrelationMatrixShape) {
  GeneratorConfig cfg;
  cfg.customers = 300;
  auto g = generate(cfg);
  auto attr = attribute(g.log, cfg.windows);
  auto daily = bucket_daily(attr, g.log, kAllMetrics, Duration{0});
  auto m = correlation_matrix(daily);
  ASSERT_EQ(m.r.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(m.r[i][i], 1.0);
    for (std::size_t j = 0; j < 6; ++j) {
      EXPECT_EQ(m.r[i][j], m.r[j][i]);
      if (m.r[i][j]) {
        EXPECT_GE(*m.r[i][j], -1.0);
        EXPECT_LE(*m.r[i][j], 1.0);
      }
    }
  }
}

TEST(Stats, CorrelationMatrixFlagsConstantSeries) {
  DailyMetricSeries a{MetricKind::CTR, {}}, b{MetricKind::BTR, {}};
  for (int d = 0; d < 3; ++d) {
    const Date date = parse_date("2023-01-0" + std::to_string(d + 1));
    a.days.push_back({date, MetricValue::from_counts(MetricKind::CTR, 1 + d, 10)});
    b.days.push_back({date, MetricValue::from_counts(MetricKind::BTR, 0, 10)});
  }
  std::vector<DailyMetricSeries> s{a, b};
  auto m = correlation_matrix(s);
  EXPECT_FALSE(m.r[0][1].has_value());
  EXPECT_EQ(m.r[0][0], 1.0);
  s[1].days.pop_back();
  EXPECT_THROW(correlation_matrix(s), LengthMismatch);
}
