#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "reclens/behavior.hpp"
#include "reclens/filters.hpp"
#include "reclens/metrics.hpp"
#include "reclens/stats.hpp"
#include "reclens/time.hpp"

namespace reclens {

struct NamedTTest {
  MetricKind a;
  MetricKind b;
  TTestReport result;

  friend bool operator==(const NamedTTest&, const NamedTTest&) = default;
};

struct DateRange {
  Date first;
  Date last;

  friend bool operator==(const DateRange&, const DateRange&) = default;
};

struct EvaluationReport {
  std::string source_name;
  std::optional<DateRange> date_range;
  std::vector<MetricValue> metrics;
  std::vector<DailyMetricSeries> daily;
  std::vector<NamedTTest> ttests;
  std::optional<CorrelationMatrix> correlation;
  std::optional<BehaviorReport> behavior;
  double bounce_threshold = kDefaultBounceThreshold;
  std::optional<FilterImpactReport> filter_impact;

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

// The two comparisons every report carries.
inline constexpr std::array<std::pair<MetricKind, MetricKind>, 2> kHeadlinePairs = {
    std::pair{MetricKind::CTR, MetricKind::CTR_NoRepeat},
    std::pair{MetricKind::BTR, MetricKind::ClickAndBuy}};

using Json = nlohmann::ordered_json;

namespace json_detail {

// JSON has no infinities; they travel as the strings "inf" / "-inf".
inline Json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

inline double to_number(const Json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw std::invalid_argument("bad number '" + s + "'");
  }
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

inline Json metric_value(const MetricValue& v, bool with_kind) {
  Json j;
  if (with_kind) j["metric"] = metric_id(v.kind);
  j["successes"] = v.successes;
  j["trials"] = v.trials;
  j["rate"] = v.rate;
  j["variance_of_mean"] = v.variance_of_mean;
  return j;
}

inline MetricValue parse_metric_value(const Json& j, MetricKind kind) {
  MetricValue v;
  v.kind = j.contains("metric") ? parse_metric(j.at("metric").get<std::string>()) : kind;
  v.successes = j.at("successes").get<std::size_t>();
  v.trials = j.at("trials").get<std::size_t>();
  v.rate = j.at("rate").get<double>();
  v.variance_of_mean = j.at("variance_of_mean").get<double>();
  return v;
}

inline Json summary(const SampleSummary& s) {
  return Json{{"mean", s.mean}, {"std_dev", s.std_dev}, {"n", s.n}};
}

inline SampleSummary parse_summary(const Json& j) {
  return {j.at("mean").get<double>(), j.at("std_dev").get<double>(),
          j.at("n").get<std::size_t>()};
}

inline Json metric_list(const std::vector<MetricValue>& values) {
  Json arr = Json::array();
  for (const auto& v : values) arr.push_back(metric_value(v, true));
  return arr;
}

inline std::vector<MetricValue> parse_metric_list(const Json& j) {
  std::vector<MetricValue> out;
  for (const auto& e : j) out.push_back(parse_metric_value(e, MetricKind::CTR));
  return out;
}

}  // namespace json_detail

inline Json to_json(const TTestReport& r) {
  using json_detail::number;
  Json j;
  j["variant"] = variant_name(r.variant);
  if (r.sd_ratio) j["sd_ratio"] = *r.sd_ratio;
  j["t"] = number(r.t);
  j["df"] = number(r.df);
  j["p_value"] = r.p_value;
  j["reject_at_05"] = r.reject_at_05;
  j["degenerate"] = r.degenerate;
  j["a"] = json_detail::summary(r.a);
  j["b"] = json_detail::summary(r.b);
  return j;
}

inline TTestReport ttest_from_json(const Json& j) {
  TTestReport r;
  r.variant = j.at("variant").get<std::string>() == "pooled" ? TestVariant::Pooled
                                                             : TestVariant::Unpooled;
  if (j.contains("sd_ratio")) r.sd_ratio = j.at("sd_ratio").get<double>();
  r.t = json_detail::to_number(j.at("t"));
  r.df = json_detail::to_number(j.at("df"));
  r.p_value = j.at("p_value").get<double>();
  r.reject_at_05 = j.at("reject_at_05").get<bool>();
  r.degenerate = j.at("degenerate").get<bool>();
  r.a = json_detail::parse_summary(j.at("a"));
  r.b = json_detail::parse_summary(j.at("b"));
  return r;
}

inline Json to_json(const BehaviorReport& b, double bounce_threshold = kDefaultBounceThreshold) {
  Json j;
  j["customers"] = b.customers;
  j["hits"] = b.hits;
  j["clicks"] = b.clicks;
  j["buys"] = b.buys;
  j["buyers"] = b.buyers;
  j["hits_per_customer"] = b.hits_per_customer;
  j["buyers_per_customer"] = b.buyers_per_customer;
  j["clicks_per_customer"] = b.clicks_per_customer;
  j["clicks_per_buy"] = b.clicks_per_buy ? Json(*b.clicks_per_buy) : Json(nullptr);
  j["bounce_threshold"] = bounce_threshold;
  j["bounce_indicator"] = bounce_indicator(b, bounce_threshold);
  j["caveat"] = kHitsPerCustomerCaveat;
  return j;
}

inline BehaviorReport behavior_from_json(const Json& j) {
  BehaviorReport b;
  b.customers = j.at("customers").get<std::size_t>();
  b.hits = j.at("hits").get<std::size_t>();
  b.clicks = j.at("clicks").get<std::size_t>();
  b.buys = j.at("buys").get<std::size_t>();
  b.buyers = j.at("buyers").get<std::size_t>();
  b.hits_per_customer = j.at("hits_per_customer").get<double>();
  b.buyers_per_customer = j.at("buyers_per_customer").get<double>();
  b.clicks_per_customer = j.at("clicks_per_customer").get<double>();
  if (!j.at("clicks_per_buy").is_null()) b.clicks_per_buy = j.at("clicks_per_buy").get<double>();
  return b;
}

inline Json to_json(const FilterImpactReport& f) {
  Json j;
  j["hits"] = f.hits;
  j["hit_product_pairs"] = f.hit_product_pairs;
  j["removed_pairs"] = f.removed_pairs;
  j["removed_by_clicked_today"] = f.removed_by_clicked_today;
  j["removed_by_atc"] = f.removed_by_atc;
  j["emptied_hits"] = f.emptied_hits;
  j["removed_fraction"] = f.removed_fraction;
  j["emptied_fraction"] = f.emptied_fraction;
  j["counterfactual_hits"] = f.counterfactual_hits;
  if (!f.original.empty()) j["original"] = json_detail::metric_list(f.original);
  if (!f.counterfactual.empty()) j["counterfactual"] = json_detail::metric_list(f.counterfactual);
  return j;
}

inline FilterImpactReport filter_impact_from_json(const Json& j) {
  FilterImpactReport f;
  f.hits = j.at("hits").get<std::size_t>();
  f.hit_product_pairs = j.at("hit_product_pairs").get<std::size_t>();
  f.removed_pairs = j.at("removed_pairs").get<std::size_t>();
  f.removed_by_clicked_today = j.at("removed_by_clicked_today").get<std::size_t>();
  f.removed_by_atc = j.at("removed_by_atc").get<std::size_t>();
  f.emptied_hits = j.at("emptied_hits").get<std::size_t>();
  f.removed_fraction = j.at("removed_fraction").get<double>();
  f.emptied_fraction = j.at("emptied_fraction").get<double>();
  f.counterfactual_hits = j.at("counterfactual_hits").get<std::size_t>();
  if (j.contains("original")) f.original = json_detail::parse_metric_list(j.at("original"));
  if (j.contains("counterfactual")) {
    f.counterfactual = json_detail::parse_metric_list(j.at("counterfactual"));
  }
  return f;
}

inline Json to_json(const CorrelationMatrix& m) {
  Json j;
  Json labels = Json::array();
  for (auto k : m.labels) labels.push_back(metric_id(k));
  j["labels"] = std::move(labels);
  Json rows = Json::array();
  for (const auto& row : m.r) {
    Json out = Json::array();
    for (const auto& v : row) out.push_back(v ? Json(*v) : Json(nullptr));
    rows.push_back(std::move(out));
  }
  j["r"] = std::move(rows);
  return j;
}

inline CorrelationMatrix correlation_from_json(const Json& j) {
  CorrelationMatrix m;
  for (const auto& l : j.at("labels")) m.labels.push_back(parse_metric(l.get<std::string>()));
  for (const auto& row : j.at("r")) {
    std::vector<std::optional<double>> out;
    for (const auto& v : row) out.push_back(v.is_null() ? std::nullopt : std::optional(v.get<double>()));
    m.r.push_back(std::move(out));
  }
  return m;
}

inline Json to_json(const EvaluationReport& r) {
  Json j;
  j["source"] = r.source_name;
  if (r.date_range) {
    j["date_range"] = {{"first", format_date(r.date_range->first)},
                       {"last", format_date(r.date_range->last)}};
  }
  if (!r.metrics.empty()) j["metrics"] = json_detail::metric_list(r.metrics);
  if (!r.daily.empty()) {
    Json daily = Json::array();
    for (const auto& s : r.daily) {
      Json days = Json::array();
      for (const auto& d : s.days) {
        Json e;
        e["date"] = format_date(d.date);
        const Json value = json_detail::metric_value(d.value, false);
        for (auto& [k, v] : value.items()) e[k] = v;
        days.push_back(std::move(e));
      }
      daily.push_back({{"metric", metric_id(s.kind)}, {"days", std::move(days)}});
    }
    j["daily"] = std::move(daily);
  }
  if (!r.ttests.empty()) {
    Json tests = Json::array();
    for (const auto& t : r.ttests) {
      Json e;
      e["metric_a"] = metric_id(t.a);
      e["metric_b"] = metric_id(t.b);
      const Json result = to_json(t.result);
      for (auto& [k, v] : result.items()) e[k] = v;
      tests.push_back(std::move(e));
    }
    j["ttests"] = std::move(tests);
  }
  if (r.correlation) j["correlation"] = to_json(*r.correlation);
  if (r.behavior) j["behavior"] = to_json(*r.behavior, r.bounce_threshold);
  if (r.filter_impact) j["filter_impact"] = to_json(*r.filter_impact);
  return j;
}

inline EvaluationReport report_from_json(const Json& j) {
  EvaluationReport r;
  r.source_name = j.at("source").get<std::string>();
  if (j.contains("date_range")) {
    r.date_range = DateRange{parse_date(j["date_range"].at("first").get<std::string>()),
                             parse_date(j["date_range"].at("last").get<std::string>())};
  }
  if (j.contains("metrics")) r.metrics = json_detail::parse_metric_list(j["metrics"]);
  if (j.contains("daily")) {
    for (const auto& s : j["daily"]) {
      DailyMetricSeries series;
      series.kind = parse_metric(s.at("metric").get<std::string>());
      for (const auto& d : s.at("days")) {
        series.days.push_back({parse_date(d.at("date").get<std::string>()),
                               json_detail::parse_metric_value(d, series.kind)});
      }
      r.daily.push_back(std::move(series));
    }
  }
  if (j.contains("ttests")) {
    for (const auto& t : j["ttests"]) {
      r.ttests.push_back({parse_metric(t.at("metric_a").get<std::string>()),
                          parse_metric(t.at("metric_b").get<std::string>()), ttest_from_json(t)});
    }
  }
  if (j.contains("correlation")) r.correlation = correlation_from_json(j["correlation"]);
  if (j.contains("behavior")) {
    r.behavior = behavior_from_json(j["behavior"]);
    r.bounce_threshold = j["behavior"].at("bounce_threshold").get<double>();
  }
  if (j.contains("filter_impact")) r.filter_impact = filter_impact_from_json(j["filter_impact"]);
  return r;
}

// Canonical serialization: fixed key order, shortest round-trip doubles.
inline std::string render_json(const EvaluationReport& r) { return to_json(r).dump(2) + "\n"; }

inline EvaluationReport parse_report_json(std::string_view text) {
  return report_from_json(Json::parse(text));
}

// ---- text tables (display only, not parse-stable) ----

namespace text {

// Significant-digit rendering; printf rounds ties to even.
inline std::string sig(double v, int digits) {
  if (v == 0.0) return "0." + std::string(static_cast<std::size_t>(digits), '0');
  char buf[48];
  std::snprintf(buf, sizeof buf, "%#.*g", digits, v);
  std::string s = buf;
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

inline std::string stat(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", t);
  return buf;
}

inline std::string pvalue(double p) {
  if (p < 1e-12) return "<1e-12";
  return sig(p, 3);
}

inline std::string fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void print(std::ostream& out) const {
    std::vector<std::size_t> width;
    for (const auto& row : rows_) {
      if (width.size() < row.size()) width.resize(row.size(), 0);
      for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    for (const auto& row : rows_) {
      std::string line;
      for (std::size_t i = 0; i < row.size(); ++i) {
        line += row[i];
        if (i + 1 < row.size()) line += std::string(width[i] - row[i].size() + 2, ' ');
      }
      out << line << '\n';
    }
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace text

inline void render_metrics_table(const std::vector<MetricValue>& metrics, std::ostream& out) {
  text::Table t({"metric", "mean", "std.dev", "n", "successes"});
  for (const auto& m : metrics) {
    t.add({std::string(metric_label(m.kind)), text::sig(m.rate, 4),
           text::sig(std::sqrt(m.variance_of_mean), 4), std::to_string(m.trials),
           std::to_string(m.successes)});
  }
  t.print(out);
}

inline void render_ttest_table(const std::vector<NamedTTest>& tests, std::ostream& out) {
  text::Table t({"metric", "mean", "std.dev", "n", "t", "p-value"});
  for (const auto& nt : tests) {
    const auto& r = nt.result;
    const bool degenerate_stat = r.degenerate && (r.t == 0.0 || std::isinf(r.t));
    t.add({std::string(metric_label(nt.a)), text::sig(r.a.mean, 4), text::sig(r.a.std_dev, 4),
           std::to_string(r.a.n), degenerate_stat ? "degenerate" : text::stat(r.t),
           degenerate_stat ? "degenerate" : text::pvalue(r.p_value)});
    t.add({std::string(metric_label(nt.b)), text::sig(r.b.mean, 4), text::sig(r.b.std_dev, 4),
           std::to_string(r.b.n), "", ""});
  }
  t.print(out);
  for (const auto& nt : tests) {
    const auto& r = nt.result;
    out << "  " << metric_label(nt.a) << " vs " << metric_label(nt.b) << ": "
        << variant_name(r.variant) << ", sd ratio "
        << (r.sd_ratio ? text::sig(*r.sd_ratio, 4) : std::string("undefined")) << ", df "
        << text::stat(r.df) << ", t " << text::stat(r.t) << ", p " << text::pvalue(r.p_value)
        << (r.reject_at_05 ? ", H0 rejected at 0.05" : ", H0 not rejected at 0.05")
        << (r.degenerate ? " (degenerate)" : "") << '\n';
  }
}

inline void render_correlation_table(const CorrelationMatrix& m, std::ostream& out) {
  std::vector<std::string> header{""};
  for (auto k : m.labels) header.emplace_back(metric_label(k));
  text::Table t(std::move(header));
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    std::vector<std::string> row{std::string(metric_label(m.labels[i]))};
    for (const auto& v : m.r[i]) row.push_back(v ? text::fixed(*v, 2) : "n/a");
    t.add(std::move(row));
  }
  t.print(out);
}

inline void render_behavior_table(const BehaviorReport& b, std::ostream& out,
                                  double bounce_threshold = kDefaultBounceThreshold) {
  text::Table t({"indicator", "value"});
  t.add({"customers", std::to_string(b.customers)});
  t.add({"hits", std::to_string(b.hits)});
  t.add({"clicks", std::to_string(b.clicks)});
  t.add({"buys", std::to_string(b.buys)});
  t.add({"buyers", std::to_string(b.buyers)});
  t.add({"hits per customer", text::sig(b.hits_per_customer, 4)});
  t.add({"buyers per customer", text::sig(b.buyers_per_customer, 4)});
  t.add({"clicks per customer", text::sig(b.clicks_per_customer, 4)});
  t.add({"clicks per buy", b.clicks_per_buy ? text::sig(*b.clicks_per_buy, 4) : "undefined"});
  t.add({"bounce indicator (clicks per customer < " + text::sig(bounce_threshold, 3) + ")",
         bounce_indicator(b, bounce_threshold) ? "yes" : "no"});
  t.print(out);
  out << "  note: " << kHitsPerCustomerCaveat << '\n';
}

inline void render_filter_table(const FilterImpactReport& f, std::ostream& out) {
  text::Table t({"quantity", "value"});
  t.add({"hits", std::to_string(f.hits)});
  t.add({"hit-product pairs", std::to_string(f.hit_product_pairs)});
  t.add({"removed pairs", std::to_string(f.removed_pairs)});
  t.add({"removed by clicked-today", std::to_string(f.removed_by_clicked_today)});
  t.add({"removed by ATC window", std::to_string(f.removed_by_atc)});
  t.add({"emptied hits", std::to_string(f.emptied_hits)});
  t.add({"removed fraction", text::sig(f.removed_fraction, 4)});
  t.add({"emptied fraction", text::sig(f.emptied_fraction, 4)});
  t.add({"counterfactual hits", std::to_string(f.counterfactual_hits)});
  t.print(out);
  if (!f.original.empty()) {
    out << "original:\n";
    render_metrics_table(f.original, out);
  }
  if (!f.counterfactual.empty()) {
    out << "counterfactual:\n";
    render_metrics_table(f.counterfactual, out);
  }
}

inline void render_daily_table(const std::vector<DailyMetricSeries>& daily, std::ostream& out) {
  if (daily.empty()) return;
  std::vector<std::string> header{"date", "hits"};
  for (const auto& s : daily) header.emplace_back(metric_id(s.kind));
  text::Table t(std::move(header));
  for (std::size_t d = 0; d < daily.front().days.size(); ++d) {
    std::vector<std::string> row{format_date(daily.front().days[d].date),
                                 std::to_string(daily.front().days[d].value.trials)};
    for (const auto& s : daily) {
      const auto& v = s.days[d].value;
      row.push_back(std::to_string(v.successes) + " (" + text::sig(v.rate, 4) + ")");
    }
    t.add(std::move(row));
  }
  t.print(out);
}

inline std::string render_table(const EvaluationReport& r) {
  std::ostringstream out;
  out << "source: " << r.source_name;
  if (r.date_range) {
    out << "  dates: " << format_date(r.date_range->first) << " .. "
        << format_date(r.date_range->last);
  }
  out << '\n';
  if (!r.metrics.empty()) {
    out << "\n== metrics ==\n";
    render_metrics_table(r.metrics, out);
  }
  if (!r.ttests.empty()) {
    out << "\n== t-tests ==\n";
    render_ttest_table(r.ttests, out);
  }
  if (r.correlation) {
    out << "\n== correlation (daily rates) ==\n";
    render_correlation_table(*r.correlation, out);
  }
  if (r.behavior) {
    out << "\n== behavior ==\n";
    render_behavior_table(*r.behavior, out, r.bounce_threshold);
  }
  if (r.filter_impact) {
    out << "\n== filter impact ==\n";
    render_filter_table(*r.filter_impact, out);
  }
  if (!r.daily.empty()) {
    out << "\n== daily ==\n";
    render_daily_table(r.daily, out);
  }
  return out.str();
}

}  // namespace reclens
