#pragma once

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reclens/generator.hpp"
#include "reclens/parallel.hpp"
#include "reclens/pipeline.hpp"
#include "reclens/report.hpp"

namespace reclens::cli {

enum class Format { Json, Table, Both };

// Reads a generator config from JSON. Keys match GeneratorConfig fields;
// durations are strings such as "5m", start_date is YYYY-MM-DD.
inline GeneratorConfig generator_config_from_json(const Json& j, GeneratorConfig cfg = {}) {
  if (!j.is_object()) throw InvalidConfig("generator config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "customers") cfg.customers = v.get<std::size_t>();
      else if (key == "days") cfg.days = v.get<std::size_t>();
      else if (key == "hits_per_customer_per_day") cfg.hits_per_customer_per_day = v.get<double>();
      else if (key == "products_per_hit") cfg.products_per_hit = v.get<std::size_t>();
      else if (key == "catalog_size") cfg.catalog_size = v.get<std::size_t>();
      else if (key == "click_prob") cfg.click_prob = v.get<double>();
      else if (key == "repeat_click_prob") cfg.repeat_click_prob = v.get<double>();
      else if (key == "atc_given_click_prob") cfg.atc_given_click_prob = v.get<double>();
      else if (key == "buy_given_click_prob") cfg.buy_given_click_prob = v.get<double>();
      else if (key == "stray_buy_prob") cfg.stray_buy_prob = v.get<double>();
      else if (key == "latency_quantile_in_window") cfg.latency_quantile_in_window = v.get<double>();
      else if (key == "widgets") cfg.widgets = v.get<std::size_t>();
      else if (key == "click_window") cfg.windows.click_window = parse_duration(v.get<std::string>());
      else if (key == "atc_window") cfg.windows.atc_window = parse_duration(v.get<std::string>());
      else if (key == "buy_window") cfg.windows.buy_window = parse_duration(v.get<std::string>());
      else if (key == "start_date") cfg.start_date = parse_date(v.get<std::string>());
      else throw InvalidConfig("unknown generator config key '" + key + "'");
    } catch (const Json::exception& e) {
      throw InvalidConfig("generator config key '" + key + "': " + e.what());
    } catch (const std::invalid_argument& e) {
      throw InvalidConfig("generator config key '" + key + "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

namespace detail {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string input = "-";
  std::string output;
  std::string format;
  unsigned threads = 0;

  std::string click_window = "5m";
  std::string atc_window = "30m";
  std::string buy_window = "24h";
  std::string tz_offset = "0";
  std::string norepeat_scope = "log";
  std::string candb_leg = "click";

  std::vector<std::string> pairs;
  double bounce_threshold = kDefaultBounceThreshold;
  bool include_filters = false;

  bool no_clicked_today = false;
  int atc_days = 7;
  bool no_atc_filter = false;

  std::uint64_t seed = 1;
  std::optional<std::size_t> customers;
  std::optional<std::size_t> days;
  std::string preset = "default";
  std::string config_path;
};

inline WindowConfig windows_of(const Options& o) {
  WindowConfig w;
  try {
    w.click_window = parse_duration(o.click_window);
    w.atc_window = parse_duration(o.atc_window);
    w.buy_window = parse_duration(o.buy_window);
    w.day_offset = parse_utc_offset(o.tz_offset);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (o.norepeat_scope == "log") w.norepeat_scope = NoRepeatScope::Log;
  else if (o.norepeat_scope == "day") w.norepeat_scope = NoRepeatScope::Day;
  else throw UsageError("--norepeat-scope must be log or day");
  if (o.candb_leg == "click") w.candb_leg = ClickAndBuyLeg::Click;
  else if (o.candb_leg == "atc") w.candb_leg = ClickAndBuyLeg::AddToCart;
  else throw UsageError("--candb-leg must be click or atc");
  try {
    w.validate();
  } catch (const InvalidConfig& e) {
    throw UsageError(e.what());
  }
  return w;
}

inline FilterConfig filters_of(const Options& o, Duration day_offset) {
  FilterConfig f;
  f.clicked_today = !o.no_clicked_today;
  f.atc_window_days = o.atc_days;
  f.atc_filter_enabled = !o.no_atc_filter;
  f.day_offset = day_offset;
  return f;
}

inline std::vector<std::pair<MetricKind, MetricKind>> pairs_of(const Options& o) {
  std::vector<std::pair<MetricKind, MetricKind>> out;
  for (const auto& p : o.pairs) {
    auto comma = p.find(',');
    if (comma == std::string::npos) throw UsageError("--pair expects A,B");
    try {
      out.emplace_back(parse_metric(p.substr(0, comma)), parse_metric(p.substr(comma + 1)));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

inline Format format_of(const Options& o, Format fallback) {
  if (o.format.empty()) return fallback;
  if (o.format == "json") return Format::Json;
  if (o.format == "table") return Format::Table;
  if (o.format == "both") return Format::Both;
  throw UsageError("--format must be json, table or both");
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw IoError("cannot open " + path + " for writing");
      out_ = file_.get();
    }
  }

  std::ostream& stream() { return *out_; }

  void finish() {
    out_->flush();
    if (!*out_) throw IoError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

inline EventLog read_input(const Options& o, std::istream& in, unsigned threads) {
  if (o.input == "-") return load_log(in, "<stdin>", threads);
  return load_log(o.input, threads);
}

inline void emit(const EvaluationReport& r, Format f, std::ostream& out) {
  if (f == Format::Table || f == Format::Both) out << render_table(r);
  if (f == Format::Both) out << '\n';
  if (f == Format::Json || f == Format::Both) out << render_json(r);
}

inline Json validation_json(const ValidationReport& v) {
  Json j;
  j["hits"] = v.hits;
  j["clicks"] = v.clicks;
  j["atcs"] = v.atcs;
  j["buys"] = v.buys;
  j["distinct_customers"] = v.distinct_customers;
  if (v.first_ts) j["first_ts"] = format_timestamp(*v.first_ts);
  if (v.last_ts) j["last_ts"] = format_timestamp(*v.last_ts);
  Json warnings = Json::array();
  for (const auto& w : v.warnings) {
    warnings.push_back({{"code", w.code}, {"count", w.count}, {"message", w.message}});
  }
  j["warnings"] = std::move(warnings);
  return j;
}

inline void validation_table(const ValidationReport& v, std::ostream& out) {
  text::Table t({"field", "value"});
  t.add({"hits", std::to_string(v.hits)});
  t.add({"clicks", std::to_string(v.clicks)});
  t.add({"atcs", std::to_string(v.atcs)});
  t.add({"buys", std::to_string(v.buys)});
  t.add({"distinct customers", std::to_string(v.distinct_customers)});
  t.add({"first ts", v.first_ts ? format_timestamp(*v.first_ts) : "-"});
  t.add({"last ts", v.last_ts ? format_timestamp(*v.last_ts) : "-"});
  t.print(out);
  for (const auto& w : v.warnings) out << "warning: " << w.message << " x" << w.count << '\n';
}

inline void add_io(CLI::App* app, Options& o, bool with_format = true) {
  app->add_option("-i,--input", o.input, "Input JSONL log, '-' for stdin")->capture_default_str();
  app->add_option("-o,--output", o.output, "Write output to this file instead of stdout");
  if (with_format) {
    app->add_option("-f,--format", o.format, "Output format: json, table or both");
  }
  app->add_option("-j,--threads", o.threads,
                  "Worker threads (default: RECLENS_THREADS, then all cores)");
}

inline void add_windows(CLI::App* app, Options& o) {
  app->add_option("--click-window", o.click_window, "Click attribution window")
      ->capture_default_str();
  app->add_option("--atc-window", o.atc_window, "Add-to-cart attribution window")
      ->capture_default_str();
  app->add_option("--buy-window", o.buy_window, "Buy attribution window")->capture_default_str();
  app->add_option("--tz-offset", o.tz_offset, "UTC offset for calendar days, e.g. +02:00")
      ->capture_default_str();
  app->add_option("--norepeat-scope", o.norepeat_scope, "NoRepeat dedup scope: log or day")
      ->capture_default_str();
  app->add_option("--candb-leg", o.candb_leg, "Click & Buy first leg: click or atc")
      ->capture_default_str();
}

inline void add_filter_flags(CLI::App* app, Options& o) {
  app->add_flag("--no-clicked-today", o.no_clicked_today, "Disable the clicked-today filter");
  app->add_option("--atc-days", o.atc_days, "Trailing add-to-cart filter window in days (0 disables)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app->add_flag("--no-atc-filter", o.no_atc_filter, "Disable the add-to-cart filter");
}

inline void add_pair(CLI::App* app, Options& o) {
  app->add_option("--pair", o.pairs,
                  "Extra metric pair to t-test, e.g. atc_tr,atc_tr_norepeat (repeatable)");
}

inline void add_bounce(CLI::App* app, Options& o) {
  app->add_option("--bounce-threshold", o.bounce_threshold,
                  "Clicks per customer below which the bounce indicator is raised")
      ->capture_default_str();
}

}  // namespace detail

// Entry point shared by the binary and the tests. Returns the exit code:
// 0 success, 1 input error, 2 usage error.
inline int run(std::vector<std::string> args, std::istream& in, std::ostream& out,
               std::ostream& err) {
  using namespace detail;
  Options o;
  CLI::App app{"reclens: recommendation event-log analytics"};
  app.name("reclens");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  auto* validate = app.add_subcommand("validate", "Check a log and summarize its contents");
  add_io(validate, o);
  auto* metrics = app.add_subcommand("metrics", "Attribute actions and compute the six rates");
  add_io(metrics, o);
  add_windows(metrics, o);
  auto* ttest = app.add_subcommand("ttest", "Two-sample t-tests between metric pairs");
  add_io(ttest, o);
  add_windows(ttest, o);
  add_pair(ttest, o);
  auto* correlate = app.add_subcommand("correlate", "Pearson correlation of daily rates");
  add_io(correlate, o);
  add_windows(correlate, o);
  auto* behavior = app.add_subcommand("behavior", "Customer-behavior indicators");
  add_io(behavior, o);
  add_bounce(behavior, o);
  auto* filter_sim = app.add_subcommand("filter-sim", "Replay the log with recommendation filters");
  add_io(filter_sim, o);
  add_windows(filter_sim, o);
  add_filter_flags(filter_sim, o);
  auto* report = app.add_subcommand("report", "Full evaluation report");
  add_io(report, o);
  add_windows(report, o);
  add_pair(report, o);
  add_bounce(report, o);
  report->add_flag("--filters", o.include_filters, "Include the filter impact section");
  add_filter_flags(report, o);
  auto* generate = app.add_subcommand("generate", "Write a synthetic log as JSONL");
  generate->add_option("-o,--output", o.output, "Output file (default stdout)");
  generate->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  generate->add_option("--customers", o.customers, "Number of customers");
  generate->add_option("--days", o.days, "Number of days");
  generate->add_option("--preset", o.preset, "Parameter preset: default, table1 or table2")
      ->capture_default_str();
  generate->add_option("--config", o.config_path, "JSON file with generator parameters");
  generate->add_option("-j,--threads", o.threads, "Worker threads");
  auto* import_csv = app.add_subcommand("import-csv", "Convert a flat CSV export to JSONL");
  add_io(import_csv, o, false);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    const unsigned threads = resolve_threads(o.threads);
    Output sink(o.output, out);
    std::ostream& os = sink.stream();

    if (*generate) {
      GeneratorConfig cfg;
      try {
        cfg = preset_config(parse_preset(o.preset), o.seed);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      if (!o.config_path.empty()) {
        std::ifstream f(o.config_path);
        if (!f) throw IoError("cannot open " + o.config_path);
        Json j;
        try {
          j = Json::parse(f);
        } catch (const Json::exception& e) {
          throw InvalidConfig(o.config_path + ": " + e.what());
        }
        cfg = generator_config_from_json(j, cfg);
        if (!j.contains("seed") && generate->count("--seed")) cfg.seed = o.seed;
      }
      if (o.customers) cfg.customers = *o.customers;
      if (o.days) cfg.days = *o.days;
      cfg.validate();
      write_log(reclens::generate(cfg, threads).log, os);
      sink.finish();
      return 0;
    }

    if (*import_csv) {
      if (o.input == "-") {
        csv_to_jsonl(in, os);
      } else {
        std::ifstream f(o.input, std::ios::binary);
        if (!f) throw IoError("cannot open " + o.input);
        csv_to_jsonl(f, os);
      }
      sink.finish();
      return 0;
    }

    if (*validate) {
      const Format fmt = format_of(o, Format::Json);
      const auto v = validate_log(read_input(o, in, threads));
      if (fmt != Format::Json) validation_table(v, os);
      if (fmt == Format::Both) os << '\n';
      if (fmt != Format::Table) os << validation_json(v).dump(2) << '\n';
      sink.finish();
      return 0;
    }

    EvaluationOptions eo;
    eo.threads = threads;
    eo.daily = false;
    eo.ttests = false;
    eo.correlation = false;
    eo.behavior = false;
    eo.bounce_threshold = o.bounce_threshold;
    Format fallback = Format::Table;
    if (*behavior) {
      eo.behavior = true;
    } else {
      eo.windows = windows_of(o);
      eo.tz_offset = eo.windows.day_offset;
      eo.extra_pairs = pairs_of(o);
      if (*metrics) {
        eo.daily = true;
      } else if (*ttest) {
        eo.ttests = true;
      } else if (*correlate) {
        eo.correlation = true;
      } else if (*filter_sim) {
        eo.filters = filters_of(o, eo.tz_offset);
        fallback = Format::Json;
      } else if (*report) {
        eo.daily = eo.ttests = eo.correlation = eo.behavior = true;
        if (o.include_filters) eo.filters = filters_of(o, eo.tz_offset);
      }
    }
    const Format fmt = format_of(o, fallback);
    const EventLog log = read_input(o, in, threads);

    EvaluationReport r;
    if (*behavior) {
      r.source_name = log.source_name;
      r.date_range = date_range_of(log, eo.tz_offset);
      r.bounce_threshold = eo.bounce_threshold;
      r.behavior = behavior_report(log);
    } else {
      r = evaluate(log, eo);
    }
    emit(r, fmt, os);
    sink.finish();
    return 0;
  } catch (const UsageError& e) {
    err << "reclens: usage error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidConfig& e) {
    err << "reclens: invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "reclens: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "reclens: " << e.what() << '\n';
    return 1;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), std::cin, std::cout, std::cerr);
}

}  // namespace reclens::cli
