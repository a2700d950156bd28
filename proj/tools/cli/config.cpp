#include "cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace promptctl::cli {

using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Source locations. A small scanner over the (already valid) JSON text that
// records the line on which every key / array element starts, keyed by its
// dotted path ("plant.sequence.1").

using LineMap = std::map<std::string, int>;

std::string join(const std::string& parent, const std::string& child) {
  return parent.empty() ? child : parent + "." + child;
}

LineMap index_lines(const std::string& text) {
  LineMap lines;
  struct Frame {
    bool is_array;
    std::string path;
    int index;
  };
  std::vector<Frame> stack;
  std::string pending_key;
  bool have_key = false;
  int line = 1;

  auto value_path = [&]() -> std::string {
    if (stack.empty()) return {};
    auto& top = stack.back();
    if (top.is_array) return join(top.path, std::to_string(top.index));
    return join(top.path, pending_key);
  };
  auto mark_value = [&]() {
    if (stack.empty()) return;
    const auto p = value_path();
    if (!lines.count(p)) lines[p] = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    switch (c) {
      case '{':
      case '[': {
        mark_value();
        const std::string p = value_path();
        stack.push_back({c == '[', p, 0});
        have_key = false;
        break;
      }
      case '}':
      case ']':
        if (!stack.empty()) stack.pop_back();
        break;
      case ',':
        if (!stack.empty() && stack.back().is_array) ++stack.back().index;
        have_key = false;
        break;
      case ':':
        break;
      case '"': {
        std::string s;
        std::size_t j = i + 1;
        for (; j < text.size() && text[j] != '"'; ++j) {
          if (text[j] == '\\' && j + 1 < text.size()) {
            s += text[++j];
          } else {
            s += text[j];
          }
        }
        const bool is_key = !stack.empty() && !stack.back().is_array && !have_key;
        if (is_key) {
          pending_key = s;
          have_key = true;
          lines[join(stack.back().path, s)] = line;
        } else {
          mark_value();
        }
        i = j;
        break;
      }
      default:
        mark_value();
        while (i + 1 < text.size() && std::string_view(",]}\n \t\r").find(text[i + 1]) == std::string_view::npos) ++i;
        break;
    }
  }
  return lines;
}

struct Context {
  std::string source;
  LineMap lines;
  std::set<std::string> overridden;

  [[nodiscard]] std::string where(const std::string& path) const {
    for (std::string p = path;; ) {
      for (const auto& o : overridden) {
        if (p == o) return source + " (--set " + o + ")";
      }
      if (auto it = lines.find(p); it != lines.end()) return source + ":" + std::to_string(it->second);
      const auto dot = p.rfind('.');
      if (dot == std::string::npos) break;
      p.resize(dot);
    }
    return source;
  }
};

class Reader {
 public:
  Reader(const json& node, std::string path, const Context& ctx) : node_(node), path_(std::move(path)), ctx_(ctx) {
    if (!node_.is_object()) fail_here("'" + display() + "' must be a JSON object");
  }

  [[noreturn]] void fail_here(const std::string& msg) const { throw ConfigError(ctx_.where(path_) + ": " + msg); }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(ctx_.where(join(path_, key)) + ": " + msg);
  }

  bool has(const std::string& key) {
    touched_.insert(key);
    return node_.contains(key);
  }

  const json& raw(const std::string& key) {
    if (!has(key)) fail_here("missing required key '" + join(path_, key) + "'");
    return node_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) fail(key, "'" + join(path_, key) + "' must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }
  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
      fail(key, "'" + join(path_, key) + "' must be an integer");
    return v.get<long long>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(key, "'" + join(path_, key) + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) fail(key, "'" + join(path_, key) + "' must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) fail(key, "'" + join(path_, key) + "' must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) fail(key, "'" + join(path_, key) + "' must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number())
        throw ConfigError(ctx_.where(join(join(path_, key), std::to_string(i))) + ": '" + join(path_, key) + "[" +
                          std::to_string(i) + "]' must be a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  /// Array of numbers, or a single number broadcast to `n` entries.
  std::vector<double> numbers_or_scalar(const std::string& key, std::size_t n) {
    if (raw(key).is_number()) return std::vector<double>(n, number(key));
    auto v = numbers(key);
    if (v.size() != n)
      fail(key, "'" + join(path_, key) + "' must have " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
    return v;
  }

  std::vector<std::string> strings(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) fail(key, "'" + join(path_, key) + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& s : v) {
      if (!s.is_string()) fail(key, "'" + join(path_, key) + "' must contain only strings");
      out.push_back(s.get<std::string>());
    }
    return out;
  }

  Eigen::MatrixXd matrix(const std::string& key) {
    const auto& v = raw(key);
    if (v.is_number()) return Eigen::MatrixXd::Constant(1, 1, v.get<double>());
    if (!v.is_array() || v.empty()) fail(key, "'" + join(path_, key) + "' must be a matrix (array of rows)");
    const auto rows = v.size();
    const auto cols = v[0].is_array() ? v[0].size() : 0;
    if (cols == 0) fail(key, "'" + join(path_, key) + "' must be a matrix (array of rows)");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      if (!v[r].is_array() || v[r].size() != cols) fail(key, "'" + join(path_, key) + "' has ragged rows");
      for (std::size_t c = 0; c < cols; ++c) {
        if (!v[r][c].is_number()) fail(key, "'" + join(path_, key) + "' must contain only numbers");
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r][c].get<double>();
      }
    }
    return m;
  }

  Reader child(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_object()) fail(key, "'" + join(path_, key) + "' must be a JSON object");
    return Reader(v, join(path_, key), ctx_);
  }

  /// Rejects keys that were never asked for.
  void finish() const {
    for (const auto& [k, _] : node_.items()) {
      if (!touched_.count(k)) fail(k, "unknown key '" + join(path_, k) + "'");
    }
  }

  [[nodiscard]] const std::string& path() const noexcept { return path_; }
  [[nodiscard]] const Context& context() const noexcept { return ctx_; }

 private:
  [[nodiscard]] std::string display() const { return path_.empty() ? std::string("<root>") : path_; }

  const json& node_;
  std::string path_;
  const Context& ctx_;
  std::set<std::string> touched_;
};

// ---------------------------------------------------------------------------

json parse_document(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1;
    int col = 1;
    const auto limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON: " + msg);
  }
}

void apply_overrides(json& doc, const std::vector<std::string>& overrides, Context& ctx) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set " + item + ": expected KEY=VALUE");
    const std::string key = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;
    }
    json* node = &doc;
    std::stringstream parts(key);
    std::string part;
    std::vector<std::string> segments;
    while (std::getline(parts, part, '.')) segments.push_back(part);
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const auto& seg = segments[s];
      const bool last = s + 1 == segments.size();
      if (node->is_array()) {
        if (seg.empty() || !std::all_of(seg.begin(), seg.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
          throw ConfigError("--set " + item + ": '" + seg + "' is not an array index");
        const auto idx = std::stoul(seg);
        if (idx >= node->size()) throw ConfigError("--set " + item + ": index " + seg + " out of range");
        node = &(*node)[idx];
      } else {
        if (!node->is_object()) *node = json::object();
        node = &(*node)[seg];
      }
      if (last) *node = value;
    }
    ctx.overridden.insert(key);
  }
}

Direction parse_direction(Reader& r, const std::string& key) {
  const auto s = r.string(key, "lower_is_better");
  if (s == "lower_is_better") return Direction::LowerIsBetter;
  if (s == "higher_is_better") return Direction::HigherIsBetter;
  r.fail(key, "direction must be \"lower_is_better\" or \"higher_is_better\", got \"" + s + "\"");
}

SessionMode parse_session_mode(Reader& r) {
  const auto s = r.string("session_mode", "stateful");
  if (s == "stateful") return SessionMode::Stateful;
  if (s == "stateless") return SessionMode::Stateless;
  r.fail("session_mode", "session_mode must be \"stateful\" or \"stateless\", got \"" + s + "\"");
}

ControllerSpec parse_controller_body(Reader& r, const std::string& kind, std::size_t dims) {
  if (kind == "pid") {
    PidSpec s;
    s.kp = r.number("kp", 0.0);
    s.ki = r.number("ki", 0.0);
    s.kd = r.number("kd", 0.0);
    s.anti_windup_limit = r.optional_number("anti_windup_limit");
    try {
      (void)PidGains(s.kp, s.ki, s.kd);
      if (s.anti_windup_limit) (void)PidState::zero(dims, s.anti_windup_limit);
    } catch (const Error& e) {
      r.fail_here(e.what());
    }
    return s;
  }
  if (kind == "lead_lag") {
    LeadLagSpec s;
    s.gain = r.number("gain", 1.0);
    s.t1 = r.number("t1");
    s.t2 = r.number("t2");
    if (!(s.t1 > 0.0) || !(s.t2 > 0.0)) r.fail_here("lead_lag t1 and t2 must be positive");
    return s;
  }
  if (kind == "lqr") {
    LqrSpec s;
    if (r.has("a")) s.a.emplace(r.matrix("a"));
    if (r.has("b")) s.b.emplace(r.matrix("b"));
    if (r.has("q")) s.q = r.matrix("q");
    if (r.has("r")) s.r = r.matrix("r");
    s.tol = r.number("tol", s.tol);
    s.max_iter = static_cast<int>(r.integer("max_iter", s.max_iter));
    return s;
  }
  if (kind == "fuzzy") {
    FuzzySpec s;
    s.error_range = r.number("error_range", 1.0);
    s.derror_range = r.number("derror_range", 1.0);
    s.output_gain = r.number("output_gain", 1.0);
    if (!(s.error_range > 0.0) || !(s.derror_range > 0.0) || !(s.output_gain > 0.0))
      r.fail_here("fuzzy ranges and output_gain must be positive");
    return s;
  }
  r.fail_here("unknown controller '" + kind + "' (expected pid, lead_lag, lqr or fuzzy)");
}

struct MetricsSection {
  MetricSchema schema;
  std::vector<double> setpoint;
  std::vector<std::string> keys;
  TemplateSet templates;
};

MetricsSection parse_metrics(Reader& root) {
  MetricsSection out;
  const auto& raw = root.raw("metrics");
  if (raw.is_string()) {
    if (raw.get<std::string>() != "fpga") root.fail("metrics", "unknown metrics preset '" + raw.get<std::string>() + "'");
    out.schema = fpga::schema();
    out.setpoint = fpga::example_setpoint().values();
    out.keys = fpga::observation_schema().keys();
    out.templates = fpga::templates();
    return out;
  }
  if (!raw.is_array() || raw.empty()) root.fail("metrics", "'metrics' must be \"fpga\" or a non-empty array");

  std::vector<MetricDimension> dims;
  std::vector<std::optional<DirectiveTemplate>> custom;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    Reader m(raw[i], "metrics." + std::to_string(i), root.context());
    MetricDimension d;
    d.name = m.string("name");
    d.unit = m.string("unit");
    d.direction = parse_direction(m, "direction");
    out.setpoint.push_back(m.number("setpoint"));
    out.keys.push_back(m.string("key", d.name));
    if (m.has("template")) {
      Reader t = m.child("template");
      DirectiveTemplate dt;
      dt.dimension = d.name;
      dt.decrease_phrase = t.string("decrease");
      dt.increase_phrase = t.string("increase");
      dt.item_format = t.string("item");
      dt.precision = static_cast<int>(t.integer("precision", 2));
      t.finish();
      custom.emplace_back(std::move(dt));
    } else {
      custom.emplace_back();
    }
    m.finish();
    dims.push_back(std::move(d));
  }
  try {
    out.schema = MetricSchema(std::move(dims));
  } catch (const Error& e) {
    root.fail("metrics", e.what());
  }
  out.templates = TemplateSet::defaults_for(out.schema);
  for (std::size_t i = 0; i < custom.size(); ++i) {
    if (custom[i]) out.templates.templates[i] = *custom[i];
  }
  return out;
}

PlantConfig parse_plant(Reader& p, const MetricSchema& schema, const std::filesystem::path& base_dir) {
  const auto type = p.string("type");
  const auto n = schema.size();
  auto fail_with = [&](const std::string& key, const std::exception& e) { p.fail(key, e.what()); };

  if (type == "fpga_scripted") {
    ScriptedFpgaPlantConfig c;
    const bool inline_seq = p.has("sequence");
    const bool file_seq = p.has("sequence_file");
    if (inline_seq == file_seq) p.fail_here("fpga_scripted needs exactly one of 'sequence' or 'sequence_file'");
    try {
      if (inline_seq) {
        c.sequence = parse_script(p.raw("sequence").dump(), schema);
      } else {
        std::filesystem::path file = p.string("sequence_file");
        if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
        c.sequence = load_script(file, schema);
      }
    } catch (const Error& e) {
      fail_with(inline_seq ? "sequence" : "sequence_file", e);
    }
    return c;
  }
  if (type == "fpga_parametric") {
    ParametricFpgaPlantConfig c;
    c.model.mode = FpgaSimModel::Mode::Parametric;
    c.model.schema = schema;
    c.model.baseline = p.numbers_or_scalar("baseline", n);
    c.model.responsiveness = p.numbers_or_scalar("responsiveness", n);
    c.model.floor = p.has("floor") ? p.numbers_or_scalar("floor", n) : std::vector<double>(n, 0.0);
    c.model.slack_coefficient = p.number("slack_coefficient", 1.0);
    try {
      c.model.validate();
    } catch (const Error& e) {
      p.fail_here(e.what());
    }
    return c;
  }
  if (type == "linear") {
    LinearPlantConfig c;
    c.initial = p.numbers_or_scalar("initial", n);
    c.a = p.number("a", 1.0);
    c.b = p.number("b", 1.0);
    return c;
  }
  if (type == "surrogate") {
    if (n != 1) p.fail("type", "the surrogate plant observes exactly one metric dimension");
    SurrogatePlantConfig c;
    auto vocab = p.has("vocabulary") ? p.strings("vocabulary")
                                     : std::vector<std::string>{"<unk>", "generate", "optimized", "code", "reduce",
                                                                "resource", "usage", "improve", "timing", "further"};
    const auto seed = p.unsigned_integer("seed", 7);
    const auto d = p.integer("model_dim", 4);
    const auto dk = p.integer("key_dim", 4);
    const auto h = p.integer("hidden", 4);
    const double scale = p.number("scale", 0.5);
    const auto target = p.string("target", vocab.size() > 1 ? vocab[1] : vocab[0]);
    const auto decode = p.string("decode", "argmax");
    if (decode != "argmax" && decode != "sample") p.fail("decode", "decode must be \"argmax\" or \"sample\"");
    c.decode = decode == "sample" ? DecodeMode::Sample : DecodeMode::Argmax;
    const auto it = std::find(vocab.begin(), vocab.end(), target);
    if (it == vocab.end()) p.fail("target", "target token '" + target + "' is not in the vocabulary");
    const auto target_id = static_cast<std::size_t>(it - vocab.begin());
    try {
      c.params = SurrogateParams::random(seed, std::move(vocab), d, dk, h, scale);
      c.params.target_token = target_id;
    } catch (const Error& e) {
      p.fail_here(e.what());
    }
    return c;
  }
  if (type == "llm_http") {
    LlmPlantConfig c;
    c.http.endpoint = p.string("endpoint", c.http.endpoint);
    c.http.model = p.string("model", c.http.model);
    c.http.api_key_env = p.string("api_key_env", c.http.api_key_env);
    c.http.temperature = p.number("temperature", c.http.temperature);
    c.http.timeout = std::chrono::milliseconds(p.integer("timeout_ms", c.http.timeout.count()));
    c.http.max_retries = static_cast<int>(p.integer("max_retries", c.http.max_retries));
    c.http.retry_backoff = std::chrono::milliseconds(p.integer("retry_backoff_ms", c.http.retry_backoff.count()));
    c.http.max_concurrent = static_cast<int>(p.integer("max_concurrent", c.http.max_concurrent));
    c.http.system_prompt = p.string("system_prompt", "");
    try {
      c.http.validate();
    } catch (const Error& e) {
      p.fail_here(e.what());
    }
    return c;
  }
  p.fail("type", "unknown plant type '" + type +
                     "' (expected fpga_scripted, fpga_parametric, linear, surrogate or llm_http)");
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source,
                           const std::vector<std::string>& overrides, const std::filesystem::path& base_dir) {
  json doc = parse_document(text, source);
  Context ctx{source, index_lines(text), {}};
  apply_overrides(doc, overrides, ctx);
  Reader root(doc, "", ctx);

  RunConfig cfg;
  root.has("$schema");
  root.has("description");

  auto metrics = parse_metrics(root);
  cfg.schema = metrics.schema;
  cfg.templates = metrics.templates;
  try {
    cfg.observation = ObservationSchema(metrics.schema, metrics.keys);
    cfg.loop.setpoint = MetricVector(metrics.schema, metrics.setpoint);
  } catch (const Error& e) {
    root.fail("metrics", e.what());
  }
  const auto n = cfg.schema.size();

  {
    Reader p = root.child("plant");
    cfg.plant = parse_plant(p, cfg.schema, base_dir);
    p.finish();
  }

  cfg.loop.session_mode = parse_session_mode(root);

  if (root.has("controller")) {
    Reader c = root.child("controller");
    const auto kind = c.string("type");
    cfg.loop.controller = parse_controller_body(c, kind, n);
    c.finish();
    cfg.has_controller = true;
  }
  if (root.has("controllers")) {
    const auto& raw = root.raw("controllers");
    if (!raw.is_object()) root.fail("controllers", "'controllers' must be an object keyed by controller name");
    for (const auto& [name, _] : raw.items()) {
      Reader c(raw.at(name), "controllers." + name, ctx);
      cfg.controllers.emplace_back(name, parse_controller_body(c, name, n));
      c.finish();
    }
  }

  cfg.loop.feedback_gain = root.number("feedback_gain", 1.0);
  cfg.loop.rng_seed = root.unsigned_integer("seed", 0);
  const auto iters = root.integer("max_iterations", 10);
  if (iters < 1) root.fail("max_iterations", "max_iterations must be at least 1");
  cfg.loop.max_iterations = static_cast<std::size_t>(iters);
  cfg.loop.dt = root.number("dt", 1.0);

  if (root.has("convergence")) {
    Reader c = root.child("convergence");
    const auto mode = c.string("mode", "setpoint_satisfied");
    if (mode == "setpoint_satisfied") {
      cfg.loop.convergence = SetpointSatisfied{};
    } else if (mode == "abs_error_below") {
      cfg.loop.convergence = AbsErrorBelow{c.numbers_or_scalar("tolerance", n)};
    } else {
      c.fail("mode", "convergence mode must be \"setpoint_satisfied\" or \"abs_error_below\"");
    }
    c.finish();
  }
  if (root.has("noise")) {
    Reader c = root.child("noise");
    if (c.has("eta_sigma")) cfg.loop.noise.eta_sigma = c.numbers_or_scalar("eta_sigma", n);
    if (c.has("nu_sigma")) cfg.loop.noise.nu_sigma = c.numbers_or_scalar("nu_sigma", n);
    c.finish();
  }
  if (root.has("retry")) {
    Reader c = root.child("retry");
    cfg.loop.retry.max_retries = static_cast<int>(c.integer("max_retries", cfg.loop.retry.max_retries));
    cfg.loop.retry.backoff = std::chrono::milliseconds(c.integer("backoff_ms", cfg.loop.retry.backoff.count()));
    c.finish();
  }
  if (root.has("prompt")) {
    Reader c = root.child("prompt");
    cfg.initial_prompt = c.string("base", "");
    cfg.templates.dead_band = c.number("dead_band", cfg.templates.dead_band);
    cfg.templates.follow_up_prefix = c.string("follow_up_prefix", cfg.templates.follow_up_prefix);
    const auto hist = c.integer("max_history", static_cast<long long>(cfg.templates.max_history));
    if (hist < 0) c.fail("max_history", "max_history must be non-negative");
    cfg.templates.max_history = static_cast<std::size_t>(hist);
    c.finish();
  }
  if (root.has("output")) {
    Reader c = root.child("output");
    if (c.has("trace_csv")) cfg.output.trace_csv = c.string("trace_csv");
    if (c.has("summary_json")) cfg.output.summary_json = c.string("summary_json");
    if (c.has("report_json")) cfg.output.report_json = c.string("report_json");
    c.finish();
  }
  root.finish();

  try {
    cfg.loop.validate();
  } catch (const Error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open configuration file");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  return parse_run_config(read_file(path), path.string(), overrides, path.parent_path());
}

TuneConfig parse_tune_config(const std::string& text, const std::string& source,
                             const std::vector<std::string>& overrides) {
  json doc = parse_document(text, source);
  Context ctx{source, index_lines(text), {}};
  apply_overrides(doc, overrides, ctx);
  Reader root(doc, "", ctx);
  root.has("$schema");
  root.has("description");

  TuneConfig cfg;
  {
    Reader p = root.child("plant");
    const auto type = p.string("type");
    if (type == "second_order_delay") {
      SecondOrderDelayPlant::Params sp;
      sp.gain = p.number("gain", sp.gain);
      sp.tau1 = p.number("tau1", sp.tau1);
      sp.tau2 = p.number("tau2", sp.tau2);
      sp.delay = p.number("delay", sp.delay);
      sp.sample_time = p.number("sample_time", sp.sample_time);
      sp.substeps = static_cast<int>(p.integer("substeps", sp.substeps));
      try {
        SecondOrderDelayPlant check(sp);
      } catch (const Error& e) {
        p.fail_here(e.what());
      }
      cfg.plant = sp;
    } else if (type == "static") {
      cfg.plant = p.number("gain", 1.0);
      cfg.static_sample_time = p.number("sample_time", 1.0);
    } else {
      p.fail("type", "unknown tunable plant type '" + type + "' (expected second_order_delay or static)");
    }
    p.finish();
  }
  cfg.relay_amplitude = root.number("relay_amplitude", cfg.relay_amplitude);
  if (!(cfg.relay_amplitude > 0.0)) root.fail("relay_amplitude", "relay_amplitude must be positive");
  const auto steps = root.integer("max_steps", cfg.max_steps);
  if (steps < 1) root.fail("max_steps", "max_steps must be at least 1");
  cfg.max_steps = static_cast<int>(steps);
  if (root.has("gains_output")) cfg.gains_output = root.string("gains_output");
  root.finish();
  return cfg;
}

TuneConfig load_tune_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  return parse_tune_config(read_file(path), path.string(), overrides);
}

std::unique_ptr<Plant> make_plant(const RunConfig& config) {
  struct Visitor {
    const RunConfig& cfg;

    std::unique_ptr<Plant> operator()(const ScriptedFpgaPlantConfig& c) const {
      FpgaSimModel m;
      m.mode = FpgaSimModel::Mode::Scripted;
      m.schema = cfg.schema;
      m.script = c.sequence;
      return std::make_unique<FpgaSimPlant>(std::move(m));
    }
    std::unique_ptr<Plant> operator()(const ParametricFpgaPlantConfig& c) const {
      return std::make_unique<FpgaSimPlant>(c.model);
    }
    std::unique_ptr<Plant> operator()(const LinearPlantConfig& c) const {
      return std::make_unique<LinearPlant>(cfg.schema, c.initial, c.a, c.b);
    }
    std::unique_ptr<Plant> operator()(const SurrogatePlantConfig& c) const {
      return std::make_unique<SurrogatePlant>(c.params, c.decode, cfg.schema[0].name);
    }
    std::unique_ptr<Plant> operator()(const LlmPlantConfig& c) const {
      return std::make_unique<LlmHttpPlant>(c.http, cfg.observation);
    }
  };
  return std::visit(Visitor{config}, config.plant);
}

}  // namespace promptctl::cli
