#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "reclens/errors.hpp"
#include "reclens/metrics.hpp"

namespace reclens {

// A metric viewed as the mean of n Bernoulli hits: mean = p and
// std_dev = sqrt(p(1-p)/n).
struct SampleSummary {
  double mean = 0.0;
  double std_dev = 0.0;
  std::size_t n = 0;

  static SampleSummary of(const MetricValue& v) {
    return {v.rate, std::sqrt(v.variance_of_mean), v.trials};
  }

  friend bool operator==(const SampleSummary&, const SampleSummary&) = default;
};

enum class TestVariant { Pooled, Unpooled };

inline std::string_view variant_name(TestVariant v) {
  return v == TestVariant::Pooled ? "pooled" : "unpooled";
}

struct TestChoice {
  TestVariant variant = TestVariant::Pooled;
  // a.std_dev / b.std_dev; absent when b.std_dev is zero.
  std::optional<double> sd_ratio;
  // Set when either standard deviation is zero.
  bool degenerate = false;
};

struct TTestReport {
  SampleSummary a;
  SampleSummary b;
  TestVariant variant = TestVariant::Pooled;
  std::optional<double> sd_ratio;
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  bool reject_at_05 = false;
  // Zero variance somewhere: either the sd ratio is undefined or the
  // statistic's denominator vanished (t is 0 or +-infinity).
  bool degenerate = false;

  friend bool operator==(const TTestReport&, const TTestReport&) = default;
};

inline constexpr double kAlpha = 0.05;

namespace detail {

// Stirling remainder of ln Gamma(z), accurate to ~1e-16 for z >= 10.
inline double stirling_tail(double z) {
  const double z2 = z * z;
  return (1.0 / 12.0 -
          (1.0 / 360.0 -
           (1.0 / 1260.0 - (1.0 / 1680.0 - (1.0 / 1188.0 - 691.0 / 360360.0 / z2) / z2) / z2) /
               z2) /
              z2) /
         z;
}

// ln Gamma(a + b) - ln Gamma(a) without cancellation when a is large.
inline double log_gamma_ratio(double a, double b) {
  if (a < 10.0) return std::lgamma(a + b) - std::lgamma(a);
  return (a - 0.5) * std::log1p(b / a) + b * std::log(a + b) - b + stirling_tail(a + b) -
         stirling_tail(a);
}

inline double log_beta(double a, double b) {
  double big = std::max(a, b), small = std::min(a, b);
  return std::lgamma(small) - log_gamma_ratio(big, small);
}

// Continued fraction for I_x(a, b) (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 1'000'000;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  return h;
}

// Regularized incomplete beta I_x(a, b) with y = 1 - x and the logarithms of
// both supplied by the caller, so that none of them loses precision.
inline double incomplete_beta(double a, double b, double x, double y, double log_x,
                              double log_y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front = a * log_x + b * log_y - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, y) / b;
}

}  // namespace detail

// Two-sided tail probability P(|T| >= |t|) for Student's t with `df` degrees
// of freedom (df may be fractional).
inline double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("degrees of freedom must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double t2 = t * t;
  // x = df / (df + t^2), y = t^2 / (df + t^2)
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  const double log_x = -std::log1p(t2 / df);
  const double log_y = 2.0 * std::log(std::fabs(t)) - std::log(df + t2);
  double p = detail::incomplete_beta(df / 2.0, 0.5, x, y, log_x, log_y);
  return std::clamp(p, 0.0, 1.0);
}

inline void check_sample(const SampleSummary& s) {
  if (s.n < 2) throw InvalidSample("sample needs n >= 2 (got " + std::to_string(s.n) + ")");
  if (!(s.std_dev >= 0.0) || !std::isfinite(s.std_dev)) {
    throw InvalidSample("standard deviation must be finite and non-negative");
  }
  if (!std::isfinite(s.mean)) throw InvalidSample("mean must be finite");
}

// Pooled when the sd ratio lies in [1/2, 2], boundaries included.
inline TestChoice choose_test(const SampleSummary& a, const SampleSummary& b) {
  TestChoice c;
  if (b.std_dev > 0.0) c.sd_ratio = a.std_dev / b.std_dev;
  if (a.std_dev == 0.0 || b.std_dev == 0.0) {
    c.variant = TestVariant::Unpooled;
    c.degenerate = true;
    return c;
  }
  c.variant = (*c.sd_ratio >= 0.5 && *c.sd_ratio <= 2.0) ? TestVariant::Pooled
                                                          : TestVariant::Unpooled;
  return c;
}

namespace detail {

inline void finish(TTestReport& r, double diff, double se) {
  if (se == 0.0) {
    r.degenerate = true;
    if (diff == 0.0) {
      r.t = 0.0;
      r.p_value = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
      r.p_value = 0.0;
    }
  } else {
    r.t = diff / se;
    r.p_value = student_t_two_sided(r.t, r.df);
  }
  r.reject_at_05 = r.p_value < kAlpha;
}

}  // namespace detail

// t = (m1 - m2) / (s_p sqrt(1/n1 + 1/n2)),
// s_p^2 = ((n1-1)s1^2 + (n2-1)s2^2) / (n1 + n2 - 2), df = n1 + n2 - 2.
inline TTestReport pooled_ttest(const SampleSummary& a, const SampleSummary& b) {
  check_sample(a);
  check_sample(b);
  TTestReport r;
  r.a = a;
  r.b = b;
  r.variant = TestVariant::Pooled;
  auto choice = choose_test(a, b);
  r.sd_ratio = choice.sd_ratio;
  const double n1 = static_cast<double>(a.n), n2 = static_cast<double>(b.n);
  r.df = n1 + n2 - 2.0;
  const double sp2 =
      ((n1 - 1.0) * a.std_dev * a.std_dev + (n2 - 1.0) * b.std_dev * b.std_dev) / r.df;
  const double se = std::sqrt(sp2) * std::sqrt(1.0 / n1 + 1.0 / n2);
  detail::finish(r, a.mean - b.mean, se);
  r.degenerate = r.degenerate || choice.degenerate;
  return r;
}

// Welch's statistic with Welch-Satterthwaite degrees of freedom.
inline TTestReport unpooled_ttest(const SampleSummary& a, const SampleSummary& b) {
  check_sample(a);
  check_sample(b);
  TTestReport r;
  r.a = a;
  r.b = b;
  r.variant = TestVariant::Unpooled;
  auto choice = choose_test(a, b);
  r.sd_ratio = choice.sd_ratio;
  const double n1 = static_cast<double>(a.n), n2 = static_cast<double>(b.n);
  const double v1 = a.std_dev * a.std_dev / n1;
  const double v2 = b.std_dev * b.std_dev / n2;
  const double denom = v1 * v1 / (n1 - 1.0) + v2 * v2 / (n2 - 1.0);
  r.df = denom > 0.0 ? (v1 + v2) * (v1 + v2) / denom : n1 + n2 - 2.0;
  detail::finish(r, a.mean - b.mean, std::sqrt(v1 + v2));
  r.degenerate = r.degenerate || choice.degenerate;
  return r;
}

inline TTestReport ttest(const SampleSummary& a, const SampleSummary& b) {
  return choose_test(a, b).variant == TestVariant::Pooled ? pooled_ttest(a, b)
                                                          : unpooled_ttest(a, b);
}

inline TTestReport compare_metrics(const MetricValue& a, const MetricValue& b) {
  return ttest(SampleSummary::of(a), SampleSummary::of(b));
}

// Each side is summarized from its whole-log pooled counts.
inline TTestReport compare_metrics(const DailyMetricSeries& a, const DailyMetricSeries& b) {
  return compare_metrics(total_of(a), total_of(b));
}

// Sample Pearson correlation, clamped to [-1, 1].
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size());
  if (x.size() < 2) throw InvalidSample("pearson needs at least two points");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y)) throw ConstantSeries();
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct CorrelationMatrix {
  std::vector<MetricKind> labels;
  // r[i][j]; empty optional where a series is constant.
  std::vector<std::vector<std::optional<double>>> r;

  friend bool operator==(const CorrelationMatrix&, const CorrelationMatrix&) = default;
};

// Pairwise Pearson r over daily rates. All series must share one date axis.
inline CorrelationMatrix correlation_matrix(std::span<const DailyMetricSeries> series) {
  for (const auto& s : series) {
    if (s.days.size() != series.front().days.size()) {
      throw LengthMismatch(series.front().days.size(), s.days.size());
    }
    for (std::size_t d = 0; d < s.days.size(); ++d) {
      if (s.days[d].date != series.front().days[d].date) {
        throw std::invalid_argument("daily series do not share a date axis");
      }
    }
  }
  CorrelationMatrix m;
  const std::size_t k = series.size();
  std::vector<std::vector<double>> rates;
  for (const auto& s : series) {
    m.labels.push_back(s.kind);
    rates.push_back(s.rates());
  }
  m.r.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    m.r[i][i] = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      try {
        double v = pearson(rates[i], rates[j]);
        m.r[i][j] = v;
        m.r[j][i] = v;
      } catch (const ConstantSeries&) {
      } catch (const InvalidSample&) {
      }
    }
  }
  return m;
}

}  // namespace reclens
