#include "promptctl/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <unordered_set>

#include <json.hpp>

#include "promptctl/error.hpp"

namespace promptctl {

using nlohmann::json;

const DirectiveTemplate& TemplateSet::for_dimension(std::string_view dimension) const {
  for (const auto& t : templates) {
    if (t.dimension == dimension) return t;
  }
  throw Error(ErrorKind::Configuration, "no directive template for dimension '" + std::string(dimension) + "'");
}

TemplateSet TemplateSet::defaults_for(const MetricSchema& schema) {
  TemplateSet set;
  for (const auto& d : schema.dimensions()) {
    DirectiveTemplate t;
    t.dimension = d.name;
    if (d.unit == "percent" || d.unit == "%") {
      t.decrease_phrase = "reduce resource usage by";
      t.increase_phrase = "allow additional resource usage of";
      t.item_format = "{value}% " + d.name;
    } else {
      t.decrease_phrase = d.direction == Direction::HigherIsBetter ? "relax " + d.name + " by" : "reduce " + d.name + " by";
      t.increase_phrase = d.direction == Direction::HigherIsBetter ? "improve " + d.name + " by" : "increase " + d.name + " by";
      t.item_format = "{value} " + d.unit;
    }
    set.templates.push_back(std::move(t));
  }
  return set;
}

std::string format_magnitude(double magnitude, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", std::max(precision, 0), magnitude);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
  }
  return s;
}

namespace {

std::string fill_item(const DirectiveTemplate& t, double magnitude) {
  static constexpr std::string_view kSlot = "{value}";
  std::string out = t.item_format;
  const auto pos = out.find(kSlot);
  const std::string value = format_magnitude(magnitude, t.precision);
  if (pos == std::string::npos) return value + " " + out;
  out.replace(pos, kSlot.size(), value);
  return out;
}

}  // namespace

std::string render_control(const ControlSignal& u, const MetricSchema& schema, const TemplateSet& templates,
                           bool follow_up) {
  require_length(u.size(), schema.size(), "render_control");
  require_finite(u.values, "render_control");

  struct Clause {
    std::string phrase;
    std::vector<std::string> items;
  };
  std::vector<Clause> clauses;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& tmpl = templates.for_dimension(schema[i].name);
    if (std::abs(u[i]) < templates.dead_band) continue;
    const std::string& phrase = u[i] < 0.0 ? tmpl.decrease_phrase : tmpl.increase_phrase;
    auto it = std::find_if(clauses.begin(), clauses.end(), [&](const Clause& c) { return c.phrase == phrase; });
    if (it == clauses.end()) {
      clauses.push_back({phrase, {}});
      it = std::prev(clauses.end());
    }
    it->items.push_back(fill_item(tmpl, std::abs(u[i])));
  }
  if (clauses.empty()) return {};

  std::string text;
  for (std::size_t c = 0; c < clauses.size(); ++c) {
    if (c > 0) text += clauses.size() > 1 && c + 1 == clauses.size() ? ", and " : ", ";
    text += clauses[c].phrase;
    for (std::size_t k = 0; k < clauses[c].items.size(); ++k) {
      text += k == 0 ? " " : ", ";
      text += clauses[c].items[k];
    }
  }
  if (follow_up && !templates.follow_up_prefix.empty()) {
    text = templates.follow_up_prefix + " " + text;
  }
  text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  text += '.';
  return text;
}

std::string PromptState::composed() const {
  std::string out = base_;
  for (const auto& d : directives_) {
    if (!out.empty()) out += ' ';
    out += d;
  }
  return out;
}

PromptState PromptState::with_directive(std::string directive, std::size_t max_history) const {
  PromptState next = *this;
  next.directives_.push_back(std::move(directive));
  ++next.issued_;
  if (max_history > 0 && next.directives_.size() > max_history) {
    next.directives_.erase(next.directives_.begin(),
                           next.directives_.end() - static_cast<std::ptrdiff_t>(max_history));
  }
  return next;
}

PromptState update_prompt(const PromptState& state, const ControlSignal& u, const MetricSchema& schema,
                          const TemplateSet& templates) {
  std::string directive = render_control(u, schema, templates, state.issued() > 0);
  if (directive.empty()) return state;
  return state.with_directive(std::move(directive), templates.max_history);
}

ObservationSchema::ObservationSchema(MetricSchema metrics, std::vector<std::string> keys)
    : metrics_(std::move(metrics)), keys_(std::move(keys)) {
  require_length(keys_.size(), metrics_.size(), "observation schema keys");
  std::unordered_set<std::string> seen;
  for (const auto& k : keys_) {
    if (k.empty() || !seen.insert(k).second)
      throw Error(ErrorKind::Schema, "observation schema keys must be unique and non-empty");
  }
}

ObservationSchema::ObservationSchema(MetricSchema metrics) : metrics_(std::move(metrics)) {
  for (const auto& d : metrics_.dimensions()) keys_.push_back(d.name);
}

namespace {

bool unit_matches(const std::string& reported, const std::string& expected) {
  if (reported == expected) return true;
  auto canonical = [](const std::string& u) { return u == "%" ? std::string("percent") : u; };
  return canonical(reported) == canonical(expected);
}

}  // namespace

MetricVector parse_observation(std::string_view report, const ObservationSchema& schema) {
  json doc;
  try {
    doc = json::parse(report.begin(), report.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("observation report is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::Parse, "observation report must be a JSON object");

  const auto& metrics = schema.metrics();
  std::vector<double> values(metrics.size());
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const auto& key = schema.keys()[i];
    const auto& dim = metrics[i];
    const auto it = doc.find(key);
    if (it == doc.end())
      throw Error(ErrorKind::Observation,
                  "observation report is missing dimension '" + dim.name + "' (key '" + key + "')");
    const json* value = &*it;
    if (it->is_object()) {
      if (const auto unit = it->find("unit"); unit != it->end()) {
        if (!unit->is_string() || !unit_matches(unit->get<std::string>(), dim.unit))
          throw Error(ErrorKind::Parse, "dimension '" + dim.name + "' reported in unit " + unit->dump() +
                                            ", expected \"" + dim.unit + "\"");
      }
      const auto v = it->find("value");
      if (v == it->end()) throw Error(ErrorKind::Parse, "dimension '" + dim.name + "' has no \"value\" field");
      value = &*v;
    }
    if (!value->is_number())
      throw Error(ErrorKind::Parse, "dimension '" + dim.name + "' has non-numeric value " + value->dump());
    values[i] = value->get<double>();
    if (!std::isfinite(values[i]))
      throw Error(ErrorKind::Parse, "dimension '" + dim.name + "' has a non-finite value");
  }
  return MetricVector(metrics, std::move(values));
}

namespace {

// Index of the brace closing the object opened at `open`, skipping string literals.
std::optional<std::size_t> matching_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      return i;
    }
  }
  return std::nullopt;
}

}  // namespace

MetricVector parse_observation_from_text(std::string_view text, const ObservationSchema& schema) {
  std::optional<std::string_view> any;
  std::optional<std::string_view> report;
  for (std::size_t i = text.find('{'); i != std::string_view::npos; i = text.find('{', i)) {
    const auto close = matching_brace(text, i);
    if (close) {
      const auto candidate = text.substr(i, *close - i + 1);
      const json doc = json::parse(candidate, nullptr, false);
      if (!doc.is_discarded() && doc.is_object()) {
        any = candidate;
        const bool keyed = std::any_of(schema.keys().begin(), schema.keys().end(),
                                       [&](const std::string& k) { return doc.contains(k); });
        if (keyed) report = candidate;
        i = *close + 1;
        continue;
      }
    }
    ++i;
  }
  if (!any) throw Error(ErrorKind::Parse, "no JSON object found in plant output");
  return parse_observation(report ? *report : *any, schema);
}

}  // namespace promptctl
