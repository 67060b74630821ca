#include "declab/runner.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "declab/errors.hpp"
#include "declab/expsum.hpp"
#include "declab/parallel.hpp"
#include "declab/rescale.hpp"
#include "declab/selftest.hpp"

namespace declab {

using nlohmann::json;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"curve-info", "ratio", "scan", "rescale-check", "expsum", "selftest"};
  return names;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp);
    os << content;
    os.flush();
    if (!os) {
      std::remove(tmp.c_str());
      throw Error("write failed for " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error("cannot move " + tmp + " to " + path);
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix(seed);
  for (std::uint64_t p : path) h = splitmix(h ^ p);
  return h;
}

class Csv {
 public:
  Csv(const ExperimentConfig& config, std::vector<std::string> columns) : width_(columns.size()) {
    out_ << "# declab " << version() << " config " << config_hash(config) << '\n';
    row(columns);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw Error("csv row has the wrong width");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(cells[i]);
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

  std::size_t width_;
  std::ostringstream out_;
};

std::string num(double v) { return format_double(v); }
std::string num(long v) { return std::to_string(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }
std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

json stamp(const ExperimentConfig& config) {
  return {{"version", version()}, {"config_hash", config_hash(config)}};
}

json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Context {
 public:
  Context(const ExperimentConfig& c, const RunOptions& o) : config(c), options(o) {
    std::filesystem::create_directories(config.output.dir);
  }

  void note(const std::string& msg) const {
    if (!options.quiet) (options.log ? *options.log : std::cerr) << msg << '\n';
  }

  std::string path(const std::string& name) const {
    return (std::filesystem::path(config.output.dir) / name).string();
  }

  std::string timing(double ms) const { return config.output.record_timing ? format_double(ms) : std::string(); }

  std::vector<GraphCurve> graph_curves() const {
    std::vector<GraphCurve> out;
    for (const auto& s : config.curves) out.push_back(s.graph_curve());
    return out;
  }

  const ExperimentConfig& config;
  const RunOptions& options;
};

const std::vector<std::string> kRatioColumns{"curve", "nu", "delta", "p", "r", "strategy", "seed", "lhs",
                                             "rhs", "ratio", "cells", "nx", "ny", "nq", "wall_ms"};

std::vector<std::string> ratio_row(const Context& ctx, std::size_t curve, const CellBasis& basis, double p,
                                   const std::string& strategy, std::uint64_t seed, double lhs, double rhs,
                                   double ratio, double ms) {
  const CurveSpec& spec = ctx.config.curves[curve];
  const std::optional<double> nu = spec.kind == CurveKind::Model ? std::optional<double>(spec.nu) : std::nullopt;
  return {spec.label(),
          opt(nu),
          num(basis.rect.delta),
          num(p),
          num(basis.rect.r),
          strategy,
          num(seed),
          num(lhs),
          num(rhs),
          num(ratio),
          num(static_cast<long>(basis.cells())),
          num(static_cast<long>(basis.grid.nx)),
          num(static_cast<long>(basis.grid.ny)),
          num(basis.max_nodes),
          ctx.timing(ms)};
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

std::vector<Complex> random_coefficients(RandomG kind, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Complex> c(n);
  for (auto& v : c) {
    switch (kind) {
      case RandomG::Gaussian: {
        // Box-Muller: modulus sqrt(-2 log u) with a uniform phase.
        const double u = 1.0 - unit_uniform(rng);
        v = std::sqrt(-2.0 * std::log(u)) * unit_phase(unit_uniform(rng));
        break;
      }
      case RandomG::Phase: v = unit_phase(unit_uniform(rng)); break;
      case RandomG::Sign: v = (rng() >> 63) ? 1.0 : -1.0; break;
    }
  }
  return c;
}

bool has_strategy(const ExperimentConfig& c, const char* name) {
  for (const auto& s : c.search.strategies)
    if (s == name) return true;
  return false;
}

// ---------------------------------------------------------------------------

void run_curve_info(const Context& ctx) {
  json curves = json::array();
  for (const CurveSpec& spec : ctx.config.curves) {
    json entry{{"curve", spec.label()}};
    if (spec.kind == CurveKind::Param) {
      const ParamCurve pc = spec.param_curve();
      entry["kind"] = "param";
      entry["regularity"] = json_number(pc.regularity_witness());
      json w = json::array();
      for (int i = 0; i <= 10; ++i) {
        const double t = std::max(i / 10.0, 1e-3);
        w.push_back({{"t", t}, {"wronskian", json_number(wronskian(pc, t))}});
      }
      entry["wronskian"] = w;
      curves.push_back(entry);
      continue;
    }
    const GraphCurve curve = spec.graph_curve();
    entry["kind"] = spec.kind == CurveKind::Model ? "model" : "graph";
    if (spec.kind == CurveKind::Model) entry["nu"] = spec.nu;
    const CurveAnalysis analysis = analyze_curve(curve, ctx.config.alpha);
    json points = json::array();
    for (const auto& pt : analysis.points) {
      json holder = json::array();
      for (const auto& [beta, order] : pt.holder_orders)
        holder.push_back({{"beta", beta}, {"order", order ? json_number(*order) : json(nullptr)}});
      points.push_back({{"z", pt.z},
                        {"side", pt.side == Side::Right ? "right" : "left"},
                        {"r2", json_number(pt.r2.order)},
                        {"r2_residual", json_number(pt.r2.fit_residual)},
                        {"oscillation_suspected", pt.r2.oscillation_suspected},
                        {"r3", pt.r3 ? json_number(pt.r3->order) : json(nullptr)},
                        {"holder_orders", holder},
                        {"hypothesis_order", pt.hypothesis_order},
                        {"hypothesis_holder", pt.hypothesis_holder}});
    }
    entry["points"] = points;
    entry["r"] = curve_exponent_r(curve, ctx.config.alpha);
    entry["r_estimated"] = json_number(analysis.r);
    curves.push_back(entry);
    ctx.note("curve-info: " + spec.label() + " r = " + format_double(entry["r"].get<double>()));
  }
  json out = stamp(ctx.config);
  out["curves"] = curves;
  write_file_atomic(ctx.path("curve_info.json"), out.dump(2) + "\n");
}

void run_ratio(const Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  if (!c.search.seed) throw ConfigError("config: ratio draws random test functions and needs search.seed");
  const DecouplingSettings settings = c.decoupling_settings();
  const std::vector<GraphCurve> curves = ctx.graph_curves();
  const std::string random_name = std::string("random_") + random_g_name(c.search.ratio_g);
  Csv csv(c, kRatioColumns);
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    for (std::size_t di = 0; di < c.deltas.size(); ++di) {
      const auto t0 = Clock::now();
      const CellBasis basis = unit_cell_basis(curves[ci], c.deltas[di], settings);
      const double build_ms = elapsed_ms(t0);
      const std::size_t n = basis.cells();
      ctx.note("ratio: " + c.curves[ci].label() + " delta " + format_double(c.deltas[di]) + ", " +
               std::to_string(n) + " cells, grid " + std::to_string(basis.grid.nx) + " x " +
               std::to_string(basis.grid.ny));
      for (double p : c.ps) {
        const auto emit = [&](const std::string& strategy, std::uint64_t seed, const std::vector<Complex>& coeffs) {
          const auto t1 = Clock::now();
          const DecouplingReport rep = decoupling_ratio(basis, coeffs, p);
          csv.row(ratio_row(ctx, ci, basis, p, strategy, seed, rep.lhs, rep.rhs, rep.ratio, elapsed_ms(t1) + build_ms));
        };
        if (has_strategy(c, "constant")) emit("constant", c.seed(), std::vector<Complex>(n, 1.0));
        if (has_strategy(c, "single_cell")) {
          // One row per cell, in cell order.
          for (std::size_t k = 0; k < n; ++k) {
            std::vector<Complex> e(n, 0.0);
            e[k] = 1.0;
            emit("single_cell", c.seed(), e);
          }
        }
        for (int k = 0; k < c.search.random_trials; ++k) {
          // The same g is used for every p.
          const std::uint64_t seed = derive_seed(c.seed(), {ci, di, static_cast<std::uint64_t>(k)});
          emit(random_name, seed, random_coefficients(c.search.ratio_g, n, seed));
        }
      }
    }
  }
  write_file_atomic(ctx.path("ratio.csv"), csv.str());
}

void run_scan(const Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  if (c.deltas.size() < 2) throw ConfigError("config: scan needs at least two deltas");
  const DecouplingSettings settings = c.decoupling_settings();
  const SearchOptions search = c.search_options();
  const std::vector<GraphCurve> curves = ctx.graph_curves();
  Csv csv(c, kRatioColumns);
  json fits = json::array();
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    std::vector<std::vector<double>> K(c.ps.size());
    for (double delta : c.deltas) {
      const auto t0 = Clock::now();
      const CellBasis basis = unit_cell_basis(curves[ci], delta, settings);
      const double build_ms = elapsed_ms(t0);
      for (std::size_t pi = 0; pi < c.ps.size(); ++pi) {
        const auto t1 = Clock::now();
        const ConstantEstimate est = estimate_constant(basis, c.ps[pi], search);
        K[pi].push_back(est.K_hat);
        csv.row(ratio_row(ctx, ci, basis, c.ps[pi], est.best_strategy, est.seed, est.best_lhs, est.best_rhs,
                          est.K_hat, build_ms + elapsed_ms(t1)));
        ctx.note("scan: " + c.curves[ci].label() + " delta " + format_double(delta) + " p " +
                 format_double(c.ps[pi]) + " K = " + format_double(est.K_hat) + " (" + est.best_strategy + ")");
      }
    }
    for (std::size_t pi = 0; pi < c.ps.size(); ++pi) {
      const LineFit fit = fit_exponent(c.deltas, K[pi]);
      json f{{"curve", c.curves[ci].label()}, {"p", c.ps[pi]},        {"slope", fit.slope},
             {"intercept", fit.intercept},   {"rms_residual", fit.rms_residual}, {"deltas", c.deltas},
             {"K", K[pi]}};
      f["nu"] = c.curves[ci].kind == CurveKind::Model ? json(c.curves[ci].nu) : json(nullptr);
      fits.push_back(f);
    }
  }
  write_file_atomic(ctx.path("scan.csv"), csv.str());
  json summary = stamp(c);
  summary["fits"] = fits;
  write_file_atomic(ctx.path("scan_summary.json"), summary.dump(2) + "\n");
}

void run_rescale(const Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const std::vector<RescaleRow> rows =
      rescale_scan(c.rescale.nus, c.rescale.deltas, c.epsilon, c.alpha, c.rescale.a_exponent, c.beta);
  Csv csv(c, {"nu", "a", "delta", "epsilon", "beta", "tmax", "bound", "margin", "precondition_met", "passed",
              "iterations", "schedule_within"});
  for (const RescaleRow& r : rows)
    csv.row({num(r.nu), num(r.a), num(r.delta), num(r.epsilon), num(r.beta), num(r.tmax), num(r.bound),
             num(r.margin), r.precondition_met ? "1" : "0", r.passed ? "1" : "0", num(static_cast<long>(r.iterations)),
             r.schedule_within ? "1" : "0"});
  write_file_atomic(ctx.path("rescale.csv"), csv.str());
  ctx.note("rescale-check: " + std::to_string(rows.size()) + " rows");
}

void run_expsum(const Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const std::vector<GraphCurve> curves = ctx.graph_curves();
  L6Options opts;
  const DecouplingSettings settings = c.decoupling_settings();
  opts.grid = settings.grid;
  opts.weight_exponent = c.weight_exponent;
  Csv csv(c, {"N", "R", "ratio", "l6avg", "l2norm", "runtime", "curve", "nu", "points", "seed", "r",
              "precondition_met", "nx", "ny"});
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const double r = curve_exponent_r(curves[ci], c.alpha);
    for (int N : c.expsum.Ns) {
      const auto t0 = Clock::now();
      const PointSystem ps = PointSystem::preset(c.expsum.points, static_cast<std::size_t>(N), c.seed());
      const double R = c.expsum.R ? *c.expsum.R : std::pow(static_cast<double>(N), r);
      opts.r = r;
      const L6Result res = l6_average(curves[ci], ps, R, opts);
      const CurveSpec& spec = c.curves[ci];
      csv.row({num(static_cast<long>(N)), num(R), num(res.ratio), num(res.average), num(res.l2),
               ctx.timing(elapsed_ms(t0)), spec.label(),
               spec.kind == CurveKind::Model ? num(spec.nu) : std::string(), c.expsum.points, num(c.seed()),
               num(r), res.precondition_met ? "1" : "0", num(static_cast<long>(res.nx)),
               num(static_cast<long>(res.ny))});
      ctx.note("expsum: " + spec.label() + " N " + std::to_string(N) + " ratio " + format_double(res.ratio));
    }
  }
  write_file_atomic(ctx.path("expsum.csv"), csv.str());
}

bool run_selftest_command(const Context& ctx) {
  const std::vector<SelfCheck> checks = run_selftest();
  json list = json::array();
  bool all = true;
  for (const SelfCheck& s : checks) {
    all = all && s.passed;
    json e{{"name", s.name}, {"passed", s.passed}, {"value", json_number(s.value)},
           {"expected", json_number(s.expected)}};
    if (!s.detail.empty()) e["error"] = s.detail;
    list.push_back(e);
    if (!s.passed) ctx.note("selftest FAILED: " + s.name + (s.detail.empty() ? "" : " (" + s.detail + ")"));
  }
  json out = stamp(ctx.config);
  out["checks"] = list;
  out["passed"] = all;
  write_file_atomic(ctx.path("selftest.json"), out.dump(2) + "\n");
  ctx.note("selftest: " + std::to_string(checks.size()) + " checks, " + (all ? "all passed" : "failures"));
  return all;
}

}  // namespace

int run(const std::string& subcommand, const ExperimentConfig& config, const RunOptions& options) {
  std::ostream& log = options.log ? *options.log : std::cerr;
  const int saved_workers = worker_count();
  struct Restore {
    int n;
    ~Restore() { set_worker_count(n); }
  } restore{saved_workers};
  try {
    config.validate();
    if (config.workers) set_worker_count(*config.workers);
    const Context ctx(config, options);
    if (subcommand == "curve-info") {
      run_curve_info(ctx);
    } else if (subcommand == "ratio") {
      run_ratio(ctx);
    } else if (subcommand == "scan") {
      run_scan(ctx);
    } else if (subcommand == "rescale-check") {
      run_rescale(ctx);
    } else if (subcommand == "expsum") {
      run_expsum(ctx);
    } else if (subcommand == "selftest") {
      return run_selftest_command(ctx) ? kExitOk : kExitFailure;
    } else {
      throw ConfigError("unknown subcommand '" + subcommand + "'");
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ResolutionError& e) {
    log << "resolution error: " << e.what() << '\n';
    return kExitResolution;
  } catch (const CoverageError& e) {
    log << "coverage error: " << e.what() << '\n';
    return kExitResolution;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace declab
