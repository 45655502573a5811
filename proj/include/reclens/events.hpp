#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include <rapidjson/document.h>
#include <rapidjson/error/en.h>
#include <rapidjson/stringbuffer.h>
#include <rapidjson/writer.h>

#include "reclens/errors.hpp"
#include "reclens/parallel.hpp"
#include "reclens/time.hpp"

namespace reclens {

// Opaque, non-empty identifier. The tag keeps customer and product ids from
// being mixed up.
template <class Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {
    auto first = value_.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
      throw std::invalid_argument("identifier is empty");
    }
  }

  const std::string& value() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend bool operator==(const Id&, const Id&) = default;
  friend auto operator<=>(const Id&, const Id&) = default;

 private:
  std::string value_;
};

struct CustomerTag;
struct ProductTag;
using CustomerId = Id<CustomerTag>;
using ProductId = Id<ProductTag>;

// One display of a recommendation widget.
struct Hit {
  std::string hit_id;
  CustomerId customer;
  std::string widget_id;
  Timestamp ts;
  std::vector<ProductId> products;

  bool shows(const ProductId& p) const {
    return std::find(products.begin(), products.end(), p) != products.end();
  }

  friend bool operator==(const Hit&, const Hit&) = default;
};

enum class ActionKind { Click, AddToCart, Buy };

inline constexpr std::size_t kActionKinds = 3;

inline std::size_t index_of(ActionKind k) { return static_cast<std::size_t>(k); }

// The `type` tag used in log files.
inline std::string_view type_tag(ActionKind k) {
  switch (k) {
    case ActionKind::Click: return "click";
    case ActionKind::AddToCart: return "atc";
    case ActionKind::Buy: return "buy";
  }
  return "?";
}

struct Action {
  ActionKind kind;
  CustomerId customer;
  ProductId product;
  Timestamp ts;

  friend bool operator==(const Action&, const Action&) = default;
};

using Event = std::variant<Hit, Action>;

struct EventLog {
  std::vector<Hit> hits;
  std::vector<Action> actions;
  std::string source_name;

  std::size_t size() const { return hits.size() + actions.size(); }
};

namespace detail {

inline const rapidjson::Value& require_string(const rapidjson::Value& obj,
                                              const char* field,
                                              std::size_t line_no) {
  auto it = obj.FindMember(field);
  if (it == obj.MemberEnd()) {
    throw MalformedRecord(line_no, std::string("missing field '") + field + "'");
  }
  if (!it->value.IsString()) {
    throw MalformedRecord(line_no, std::string("field '") + field + "' is not a string");
  }
  return it->value;
}

template <class IdT>
IdT make_id(const rapidjson::Value& v, const char* field, std::size_t line_no) {
  try {
    return IdT(std::string(v.GetString(), v.GetStringLength()));
  } catch (const std::invalid_argument&) {
    throw MalformedRecord(line_no, std::string("field '") + field + "' is empty");
  }
}

inline Timestamp read_ts(const rapidjson::Value& obj, std::size_t line_no) {
  const auto& v = require_string(obj, "ts", line_no);
  try {
    return parse_timestamp(std::string_view(v.GetString(), v.GetStringLength()));
  } catch (const std::invalid_argument& e) {
    throw MalformedRecord(line_no, e.what());
  }
}

inline bool is_skippable(std::string_view line) {
  auto first = line.find_first_not_of(" \t\r");
  return first == std::string_view::npos || line[first] == '#';
}

}  // namespace detail

// Decodes one JSON Lines record. Unknown fields are ignored.
inline Event parse_event_line(std::string_view line, std::size_t line_no) {
  rapidjson::Document doc;
  doc.Parse(line.data(), line.size());
  if (doc.HasParseError()) {
    throw MalformedRecord(line_no, std::string("invalid JSON: ") +
                                       rapidjson::GetParseError_En(doc.GetParseError()));
  }
  if (!doc.IsObject()) throw MalformedRecord(line_no, "record is not an object");

  const auto& type = detail::require_string(doc, "type", line_no);
  std::string_view tag(type.GetString(), type.GetStringLength());

  if (tag == "hit") {
    Hit hit;
    const auto& hit_id = detail::require_string(doc, "hit_id", line_no);
    hit.hit_id.assign(hit_id.GetString(), hit_id.GetStringLength());
    if (hit.hit_id.empty()) throw MalformedRecord(line_no, "field 'hit_id' is empty");
    hit.customer = detail::make_id<CustomerId>(
        detail::require_string(doc, "customer", line_no), "customer", line_no);
    const auto& widget = detail::require_string(doc, "widget", line_no);
    hit.widget_id.assign(widget.GetString(), widget.GetStringLength());
    hit.ts = detail::read_ts(doc, line_no);
    auto products = doc.FindMember("products");
    if (products == doc.MemberEnd()) {
      throw MalformedRecord(line_no, "missing field 'products'");
    }
    if (!products->value.IsArray()) {
      throw MalformedRecord(line_no, "field 'products' is not an array");
    }
    if (products->value.Empty()) throw MalformedRecord(line_no, "empty products");
    hit.products.reserve(products->value.Size());
    for (const auto& p : products->value.GetArray()) {
      if (!p.IsString()) throw MalformedRecord(line_no, "product is not a string");
      ProductId id = detail::make_id<ProductId>(p, "products", line_no);
      if (hit.shows(id)) {
        throw MalformedRecord(line_no, "duplicate product '" + id.value() + "'");
      }
      hit.products.push_back(std::move(id));
    }
    return hit;
  }

  Action action;
  if (tag == "click") {
    action.kind = ActionKind::Click;
  } else if (tag == "atc") {
    action.kind = ActionKind::AddToCart;
  } else if (tag == "buy") {
    action.kind = ActionKind::Buy;
  } else {
    throw MalformedRecord(line_no, "unknown type '" + std::string(tag) + "'");
  }
  action.customer = detail::make_id<CustomerId>(
      detail::require_string(doc, "customer", line_no), "customer", line_no);
  action.product = detail::make_id<ProductId>(
      detail::require_string(doc, "product", line_no), "product", line_no);
  action.ts = detail::read_ts(doc, line_no);
  return action;
}

// Canonical single-line encoding; fields in schema order, no trailing newline.
inline std::string serialize_event(const Event& event) {
  rapidjson::StringBuffer buf;
  rapidjson::Writer<rapidjson::StringBuffer> w(buf);
  auto str = [&w](std::string_view s) {
    w.String(s.data(), static_cast<rapidjson::SizeType>(s.size()));
  };
  w.StartObject();
  if (const auto* hit = std::get_if<Hit>(&event)) {
    str("type"); str("hit");
    str("hit_id"); str(hit->hit_id);
    str("customer"); str(hit->customer.value());
    str("widget"); str(hit->widget_id);
    str("ts"); str(format_timestamp(hit->ts));
    str("products");
    w.StartArray();
    for (const auto& p : hit->products) str(p.value());
    w.EndArray();
  } else {
    const auto& a = std::get<Action>(event);
    str("type"); str(type_tag(a.kind));
    str("customer"); str(a.customer.value());
    str("product"); str(a.product.value());
    str("ts"); str(format_timestamp(a.ts));
  }
  w.EndObject();
  return std::string(buf.GetString(), buf.GetSize());
}

// Sorts hits and actions by timestamp, keeping input order among ties.
inline void normalize(EventLog& log) {
  std::stable_sort(log.hits.begin(), log.hits.end(),
                   [](const Hit& a, const Hit& b) { return a.ts < b.ts; });
  std::stable_sort(log.actions.begin(), log.actions.end(),
                   [](const Action& a, const Action& b) { return a.ts < b.ts; });
}

inline void check_unique_hit_ids(const EventLog& log) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(log.hits.size());
  for (const auto& h : log.hits) {
    if (!seen.insert(h.hit_id).second) throw DuplicateHitId(h.hit_id);
  }
}

// Builds a normalized log from the whole text of a JSONL file. Lines are
// parsed in parallel chunks; the result does not depend on `threads`.
inline EventLog parse_log_text(std::string_view text, std::string source_name,
                               unsigned threads = 1) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }

  std::vector<std::optional<Event>> parsed(lines.size());
  std::vector<std::optional<MalformedRecord>> first_error(
      std::max(1u, threads));
  parallel_chunks(lines.size(), threads,
                  [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      std::string_view line = lines[i];
                      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
                      if (detail::is_skippable(line)) continue;
                      try {
                        parsed[i] = parse_event_line(line, i + 1);
                      } catch (const MalformedRecord& e) {
                        first_error[chunk] = e;
                        return;
                      }
                    }
                  });
  // Chunks are contiguous and ordered, so the first recorded error is the
  // earliest offending line.
  for (const auto& err : first_error) {
    if (err) throw *err;
  }

  EventLog log;
  log.source_name = std::move(source_name);
  for (auto& ev : parsed) {
    if (!ev) continue;
    if (auto* hit = std::get_if<Hit>(&*ev)) {
      log.hits.push_back(std::move(*hit));
    } else {
      log.actions.push_back(std::move(std::get<Action>(*ev)));
    }
  }
  normalize(log);
  check_unique_hit_ids(log);
  return log;
}

inline EventLog load_log(std::istream& in, std::string source_name,
                         unsigned threads = 1) {
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + source_name);
  std::string text = std::move(buf).str();
  return parse_log_text(text, std::move(source_name), threads);
}

// `path` of "-" reads standard input.
inline EventLog load_log(const std::string& path, unsigned threads = 1) {
  if (path == "-") return load_log(std::cin, "<stdin>", threads);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return load_log(in, path, threads);
}

// Writes the log as JSONL, merging hits and actions by timestamp (hits first
// among ties). Reloading the output reproduces the same EventLog.
inline void write_log(const EventLog& log, std::ostream& out) {
  std::size_t h = 0, a = 0;
  std::string line;
  while (h < log.hits.size() || a < log.actions.size()) {
    bool take_hit = a == log.actions.size() ||
                    (h < log.hits.size() && log.hits[h].ts <= log.actions[a].ts);
    if (take_hit) {
      line = serialize_event(log.hits[h++]);
    } else {
      line = serialize_event(log.actions[a++]);
    }
    line.push_back('\n');
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
}

struct ValidationWarning {
  std::string code;
  std::string message;
  std::size_t count = 0;
};

struct ValidationReport {
  std::size_t hits = 0;
  std::size_t clicks = 0;
  std::size_t atcs = 0;
  std::size_t buys = 0;
  std::size_t distinct_customers = 0;
  std::optional<Timestamp> first_ts;
  std::optional<Timestamp> last_ts;
  std::vector<ValidationWarning> warnings;

  const ValidationWarning* find(std::string_view code) const {
    for (const auto& w : warnings) {
      if (w.code == code) return &w;
    }
    return nullptr;
  }
};

// Counts and legal-but-suspicious patterns. An action is flagged when it
// precedes the first hit of the log, and when its product was never shown to
// that customer in any hit (it can never be attributed).
inline ValidationReport validate_log(const EventLog& log) {
  ValidationReport r;
  r.hits = log.hits.size();
  std::unordered_set<std::string_view> customers;
  std::unordered_map<std::string_view, std::unordered_set<std::string_view>> shown;
  for (const auto& h : log.hits) {
    customers.insert(h.customer.value());
    auto& set = shown[h.customer.value()];
    for (const auto& p : h.products) set.insert(p.value());
  }

  std::optional<Timestamp> first_hit;
  for (const auto& h : log.hits) {
    if (!first_hit || h.ts < *first_hit) first_hit = h.ts;
  }

  ValidationWarning early{"action_precedes_first_hit", "", 0};
  ValidationWarning orphan{"unattributable_product", "", 0};
  for (const auto& a : log.actions) {
    customers.insert(a.customer.value());
    switch (a.kind) {
      case ActionKind::Click: ++r.clicks; break;
      case ActionKind::AddToCart: ++r.atcs; break;
      case ActionKind::Buy: ++r.buys; break;
    }
    if (!first_hit || a.ts < *first_hit) {
      if (early.count++ == 0) {
        early.message = "action precedes first hit (first: " +
                        std::string(type_tag(a.kind)) + " by " + a.customer.value() +
                        " at " + format_timestamp(a.ts) + ")";
      }
    }
    auto it = shown.find(a.customer.value());
    if (it == shown.end() || !it->second.contains(a.product.value())) {
      if (orphan.count++ == 0) {
        orphan.message = "unattributable product (first: " +
                         std::string(type_tag(a.kind)) + " of " + a.product.value() +
                         " by " + a.customer.value() + ")";
      }
    }
  }
  if (early.count) r.warnings.push_back(std::move(early));
  if (orphan.count) r.warnings.push_back(std::move(orphan));
  r.distinct_customers = customers.size();

  for (const auto& h : log.hits) {
    if (!r.first_ts || h.ts < *r.first_ts) r.first_ts = h.ts;
    if (!r.last_ts || h.ts > *r.last_ts) r.last_ts = h.ts;
  }
  for (const auto& a : log.actions) {
    if (!r.first_ts || a.ts < *r.first_ts) r.first_ts = a.ts;
    if (!r.last_ts || a.ts > *r.last_ts) r.last_ts = a.ts;
  }
  return r;
}

// Convenience importer for flat CSV exports with header
// `type,hit_id,customer,widget,ts,products,product`, where `products` is a
// `|`-separated list. Emits canonical JSONL lines.
inline void csv_to_jsonl(std::istream& in, std::ostream& out) {
  std::string line;
  std::size_t line_no = 0;
  auto split = [](std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
      std::size_t end = s.find(sep, pos);
      parts.emplace_back(s.substr(pos, end == std::string_view::npos ? end : end - pos));
      if (end == std::string_view::npos) break;
      pos = end + 1;
    }
    return parts;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || detail::is_skippable(line)) continue;
    auto cols = split(line, ',');
    if (cols.size() != 7) throw MalformedRecord(line_no, "expected 7 CSV columns");
    Timestamp ts;
    try {
      ts = parse_timestamp(cols[4]);
    } catch (const std::invalid_argument& e) {
      throw MalformedRecord(line_no, e.what());
    }
    Event ev;
    try {
      if (cols[0] == "hit") {
        Hit h{cols[1], CustomerId(cols[2]), cols[3], ts, {}};
        if (cols[5].empty()) throw MalformedRecord(line_no, "empty products");
        for (auto& p : split(cols[5], '|')) h.products.emplace_back(std::move(p));
        ev = std::move(h);
      } else {
        ActionKind kind;
        if (cols[0] == "click") {
          kind = ActionKind::Click;
        } else if (cols[0] == "atc") {
          kind = ActionKind::AddToCart;
        } else if (cols[0] == "buy") {
          kind = ActionKind::Buy;
        } else {
          throw MalformedRecord(line_no, "unknown type '" + cols[0] + "'");
        }
        ev = Action{kind, CustomerId(cols[2]), ProductId(cols[6]), ts};
      }
    } catch (const std::invalid_argument& e) {
      throw MalformedRecord(line_no, e.what());
    }
    // Round through the JSONL parser so CSV input obeys the same rules.
    std::string json = serialize_event(ev);
    parse_event_line(json, line_no);
    out << json << '\n';
  }
}

}  // namespace reclens

template <class Tag>
struct std::hash<reclens::Id<Tag>> {
  std::size_t operator()(const reclens::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.value());
  }
};
