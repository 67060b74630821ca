#include "declab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "declab/errors.hpp"
#include "declab/rescale.hpp"

#ifndef DECLAB_VERSION
#define DECLAB_VERSION "0.0.0"
#endif

namespace declab {

using nlohmann::json;

const char* version() { return DECLAB_VERSION; }

// ---------------------------------------------------------------------------
// Curves

CurveSpec CurveSpec::model(double nu) {
  CurveSpec s;
  s.kind = CurveKind::Model;
  s.nu = nu;
  return s;
}

CurveSpec CurveSpec::graph(std::string expr, std::vector<double> singular) {
  CurveSpec s;
  s.kind = CurveKind::Graph;
  s.expr = std::move(expr);
  s.singular = std::move(singular);
  return s;
}

CurveSpec CurveSpec::param(std::string expr1, std::string expr2, std::vector<double> singular) {
  CurveSpec s;
  s.kind = CurveKind::Param;
  s.expr1 = std::move(expr1);
  s.expr2 = std::move(expr2);
  s.singular = std::move(singular);
  return s;
}

GraphCurve CurveSpec::graph_curve() const {
  switch (kind) {
    case CurveKind::Model: return GraphCurve::model(nu);
    case CurveKind::Graph: return GraphCurve::from_expression(expr, singular);
    case CurveKind::Param: break;
  }
  throw ConfigError("parametric curves are only supported by curve-info");
}

ParamCurve CurveSpec::param_curve() const {
  if (kind != CurveKind::Param) return ParamCurve::lift(graph_curve());
  return ParamCurve(SmoothFunction::from_expression(Expression::parse(expr1), singular),
                    SmoothFunction::from_expression(Expression::parse(expr2), singular), label());
}

std::string CurveSpec::label() const {
  switch (kind) {
    case CurveKind::Model: return "model";
    case CurveKind::Graph: return expr;
    case CurveKind::Param: return "(" + expr1 + ", " + expr2 + ")";
  }
  return "?";
}

const char* random_g_name(RandomG g) {
  switch (g) {
    case RandomG::Gaussian: return "gaussian";
    case RandomG::Phase: return "phase";
    case RandomG::Sign: return "sign";
  }
  return "?";
}

namespace {

RandomG parse_random_g(const std::string& s) {
  if (s == "gaussian") return RandomG::Gaussian;
  if (s == "phase") return RandomG::Phase;
  if (s == "sign") return RandomG::Sign;
  throw ConfigError("unknown ratio_g '" + s + "' (gaussian, phase or sign)");
}

// ---------------------------------------------------------------------------
// Strict JSON reading

class Reader {
 public:
  Reader(const json& j, std::string path, std::initializer_list<const char*> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
    std::set<std::string> keys(allowed.begin(), allowed.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!keys.count(it.key())) fail(at(it.key()), "unknown key");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void get(const char* key, T& out) const {
    if (has(key)) out = convert<T>(j_.at(key), at(key));
  }
  template <typename T>
  void get(const char* key, std::optional<T>& out) const {
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();  // explicit null clears the default
    } else {
      out = convert<T>(j_.at(key), at(key));
    }
  }
  template <typename T>
  void get(const char* key, std::vector<T>& out) const {
    if (!has(key)) return;
    const json& a = j_.at(key);
    if (!a.is_array()) fail(at(key), "expected an array");
    out.clear();
    for (std::size_t i = 0; i < a.size(); ++i)
      out.push_back(convert<T>(a[i], at(key) + "[" + std::to_string(i) + "]"));
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config " + (where.empty() ? std::string("root") : where) + ": " + what);
  }

 private:
  template <typename T>
  static T convert(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(where, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(where, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(where, "expected a number");
      return v.get<T>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) fail(where, "expected a nonnegative integer");
      return v.get<T>();
    } else {
      if (!v.is_number_integer()) fail(where, "expected an integer");
      const auto x = v.get<long long>();
      if (x < static_cast<long long>(std::numeric_limits<T>::min()) ||
          x > static_cast<long long>(std::numeric_limits<T>::max()))
        fail(where, "integer out of range");
      return static_cast<T>(x);
    }
  }

  const json& j_;
  std::string path_;
};

CurveSpec read_curve(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    Reader::fail(where, "curve needs a string 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  CurveSpec s;
  if (kind == "model") {
    Reader r(j, where, {"kind", "nu"});
    if (!r.has("nu")) Reader::fail(where, "model curve needs 'nu'");
    s.kind = CurveKind::Model;
    r.get("nu", s.nu);
  } else if (kind == "graph") {
    Reader r(j, where, {"kind", "expr", "singular"});
    if (!r.has("expr")) Reader::fail(where, "graph curve needs 'expr'");
    s.kind = CurveKind::Graph;
    r.get("expr", s.expr);
    r.get("singular", s.singular);
  } else if (kind == "param") {
    Reader r(j, where, {"kind", "expr1", "expr2", "singular"});
    if (!r.has("expr1") || !r.has("expr2")) Reader::fail(where, "param curve needs 'expr1' and 'expr2'");
    s.kind = CurveKind::Param;
    r.get("expr1", s.expr1);
    r.get("expr2", s.expr2);
    r.get("singular", s.singular);
  } else {
    Reader::fail(where, "unknown curve kind '" + kind + "'");
  }
  return s;
}

json write_curve(const CurveSpec& s) {
  switch (s.kind) {
    case CurveKind::Model: return {{"kind", "model"}, {"nu", s.nu}};
    case CurveKind::Graph: return {{"kind", "graph"}, {"expr", s.expr}, {"singular", s.singular}};
    case CurveKind::Param:
      return {{"kind", "param"}, {"expr1", s.expr1}, {"expr2", s.expr2}, {"singular", s.singular}};
  }
  return {};
}

json to_json_value(const ExperimentConfig& c) {
  json curves = json::array();
  for (const auto& s : c.curves) curves.push_back(write_curve(s));
  json j;
  j["curves"] = curves;
  j["deltas"] = c.deltas;
  j["ps"] = c.ps;
  j["epsilon"] = c.epsilon;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta ? json(*c.beta) : json(nullptr);
  j["weight_exponent"] = c.weight_exponent;
  j["grid"] = {{"samples_per_frequency", c.grid.samples_per_frequency},
               {"samples_per_weight_scale", c.grid.samples_per_weight_scale},
               {"tail_tolerance", c.grid.tail_tolerance},
               {"nx_max", c.grid.nx_max},
               {"ny_max", c.grid.ny_max},
               {"nq_max", c.grid.nq_max},
               {"max_field_bytes", c.grid.max_field_bytes}};
  j["search"] = {{"strategies", c.search.strategies},
                 {"budget", c.search.budget},
                 {"random_trials", c.search.random_trials},
                 {"seed", c.search.seed ? json(*c.search.seed) : json(nullptr)},
                 {"ratio_g", random_g_name(c.search.ratio_g)}};
  j["rescale"] = {{"nus", c.rescale.nus}, {"deltas", c.rescale.deltas}, {"a_exponent", c.rescale.a_exponent}};
  j["expsum"] = {{"Ns", c.expsum.Ns},
                 {"points", c.expsum.points},
                 {"R", c.expsum.R ? json(*c.expsum.R) : json(nullptr)}};
  j["output"] = {{"dir", c.output.dir}, {"record_timing", c.output.record_timing}};
  j["workers"] = c.workers ? json(*c.workers) : json(nullptr);
  return j;
}

bool is_random_strategy(const std::string& s) { return s == "random_phase" || s == "random_sign"; }

}  // namespace

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
  const auto finite = [](double v) { return std::isfinite(v); };
  if (curves.empty()) fail("curves must not be empty");
  for (const auto& c : curves) {
    if (c.kind == CurveKind::Model && !(c.nu > 0.0 && finite(c.nu))) fail("model nu must be positive");
    for (double z : c.singular)
      if (!(z >= 0.0 && z <= 1.0)) fail("singular points must lie in [0, 1]");
    // Parse now so expression errors surface as config errors.
    if (c.kind == CurveKind::Graph) (void)Expression::parse(c.expr);
    if (c.kind == CurveKind::Param) {
      (void)Expression::parse(c.expr1);
      (void)Expression::parse(c.expr2);
    }
  }
  if (deltas.empty()) fail("deltas must not be empty");
  for (double d : deltas)
    if (!(d > 0.0 && d <= 0.25)) fail("every delta must lie in (0, 1/4]");
  if (ps.empty()) fail("ps must not be empty");
  for (double p : ps)
    if (!(p >= 2.0 && p <= 6.0)) fail("every p must lie in [2, 6]");
  if (!(epsilon > 0.0 && epsilon < 0.5)) fail("epsilon must lie in (0, 1/2)");
  if (!(alpha > 0.0 && alpha <= 1.0)) fail("alpha must lie in (0, 1]");
  if (beta && !(*beta > 0.0 && *beta <= 1.0)) fail("beta must lie in (0, 1]");
  if (!(weight_exponent >= 3.0 && finite(weight_exponent))) fail("weight_exponent must be at least 3");

  if (!(grid.samples_per_frequency >= 2.0 && finite(grid.samples_per_frequency)))
    fail("grid.samples_per_frequency must be at least 2");
  if (!(grid.samples_per_weight_scale > 0.0 && finite(grid.samples_per_weight_scale)))
    fail("grid.samples_per_weight_scale must be positive");
  if (!(grid.tail_tolerance > 0.0 && grid.tail_tolerance < 1.0)) fail("grid.tail_tolerance must lie in (0, 1)");
  if (grid.nx_max < 1 || grid.ny_max < 1 || grid.nq_max < 8) fail("grid caps must be positive (nq_max >= 8)");
  if (!(grid.max_field_bytes > 0.0)) fail("grid.max_field_bytes must be positive");

  if (search.strategies.empty()) fail("search.strategies must not be empty");
  bool random = false;
  for (const auto& s : search.strategies) {
    try {
      (void)parse_strategy(s);
    } catch (const Error&) {
      fail("unknown strategy '" + s + "'");
    }
    random = random || is_random_strategy(s);
  }
  if (search.budget < 1) fail("search.budget must be positive");
  if (search.random_trials < 1) fail("search.random_trials must be positive");
  if (random && !search.seed) fail("search.seed is required when a random strategy is enabled");

  for (double nu : rescale.nus)
    if (!(nu > 0.0 && finite(nu))) fail("rescale.nus must be positive");
  for (double d : rescale.deltas)
    if (!(d > 0.0 && d <= 0.25)) fail("every rescale delta must lie in (0, 1/4]");
  if (!(rescale.a_exponent > 0.0 && rescale.a_exponent < 0.5)) fail("rescale.a_exponent must lie in (0, 1/2)");

  for (int N : expsum.Ns)
    if (N < 1 || N > 512) fail("expsum.Ns must lie in [1, 512]");
  if (expsum.points != "lattice" && expsum.points != "random" && expsum.points != "perturbed")
    fail("expsum.points must be lattice, random or perturbed");
  if (expsum.points != "lattice" && !search.seed) fail("search.seed is required for random point systems");
  if (expsum.R && !(*expsum.R > 0.0 && finite(*expsum.R))) fail("expsum.R must be positive");

  if (output.dir.empty()) fail("output.dir must not be empty");
  if (workers && *workers < 1) fail("workers must be positive");
}

double ExperimentConfig::effective_beta() const { return beta ? *beta : default_beta(alpha, epsilon); }

DecouplingSettings ExperimentConfig::decoupling_settings() const {
  DecouplingSettings s;
  s.grid.samples_per_frequency = grid.samples_per_frequency;
  s.grid.samples_per_weight_scale = grid.samples_per_weight_scale;
  s.grid.tail_tolerance = grid.tail_tolerance;
  s.grid.nx_max = grid.nx_max;
  s.grid.ny_max = grid.ny_max;
  s.quadrature.nq_max = grid.nq_max;
  s.quadrature.max_field_bytes = grid.max_field_bytes;
  s.weight_exponent = weight_exponent;
  s.alpha = alpha;
  return s;
}

SearchOptions ExperimentConfig::search_options() const {
  SearchOptions o;
  o.strategies.clear();
  for (const auto& s : search.strategies) o.strategies.push_back(parse_strategy(s));
  o.budget = search.budget;
  o.random_trials = search.random_trials;
  o.seed = seed();
  return o;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  const Reader top(j, "",
                   {"curves", "deltas", "ps", "epsilon", "alpha", "beta", "weight_exponent", "grid",
                    "search", "rescale", "expsum", "output", "workers"});
  if (top.has("curves")) {
    const json& a = top.raw("curves");
    if (!a.is_array()) Reader::fail("curves", "expected an array");
    c.curves.clear();
    for (std::size_t i = 0; i < a.size(); ++i) c.curves.push_back(read_curve(a[i], "curves[" + std::to_string(i) + "]"));
  }
  top.get("deltas", c.deltas);
  top.get("ps", c.ps);
  top.get("epsilon", c.epsilon);
  top.get("alpha", c.alpha);
  top.get("beta", c.beta);
  top.get("weight_exponent", c.weight_exponent);
  top.get("workers", c.workers);
  if (top.has("grid")) {
    const Reader r(top.raw("grid"), "grid",
                   {"samples_per_frequency", "samples_per_weight_scale", "tail_tolerance", "nx_max", "ny_max",
                    "nq_max", "max_field_bytes"});
    r.get("samples_per_frequency", c.grid.samples_per_frequency);
    r.get("samples_per_weight_scale", c.grid.samples_per_weight_scale);
    r.get("tail_tolerance", c.grid.tail_tolerance);
    r.get("nx_max", c.grid.nx_max);
    r.get("ny_max", c.grid.ny_max);
    r.get("nq_max", c.grid.nq_max);
    r.get("max_field_bytes", c.grid.max_field_bytes);
  }
  if (top.has("search")) {
    const Reader r(top.raw("search"), "search", {"strategies", "budget", "random_trials", "seed", "ratio_g"});
    r.get("strategies", c.search.strategies);
    r.get("budget", c.search.budget);
    r.get("random_trials", c.search.random_trials);
    r.get("seed", c.search.seed);
    std::string g = random_g_name(c.search.ratio_g);
    r.get("ratio_g", g);
    c.search.ratio_g = parse_random_g(g);
  }
  if (top.has("rescale")) {
    const Reader r(top.raw("rescale"), "rescale", {"nus", "deltas", "a_exponent"});
    r.get("nus", c.rescale.nus);
    r.get("deltas", c.rescale.deltas);
    r.get("a_exponent", c.rescale.a_exponent);
  }
  if (top.has("expsum")) {
    const Reader r(top.raw("expsum"), "expsum", {"Ns", "points", "R"});
    r.get("Ns", c.expsum.Ns);
    r.get("points", c.expsum.points);
    r.get("R", c.expsum.R);
  }
  if (top.has("output")) {
    const Reader r(top.raw("output"), "output", {"dir", "record_timing"});
    r.get("dir", c.output.dir);
    r.get("record_timing", c.output.record_timing);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) { return to_json_value(config).dump(2); }

std::string config_hash(const ExperimentConfig& config) {
  json j = to_json_value(config);
  j.erase("workers");
  j["output"].erase("dir");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace declab
