#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "declab/curve.hpp"
#include "declab/decoupling.hpp"

namespace declab {

/// Code version embedded in every artifact.
const char* version();

enum class CurveKind { Model, Graph, Param };

struct CurveSpec {
  CurveKind kind = CurveKind::Model;
  double nu = 1.0;             ///< model
  std::string expr;            ///< graph: phi(t)
  std::string expr1, expr2;    ///< param: phi1(t), phi2(t)
  std::vector<double> singular;

  static CurveSpec model(double nu);
  static CurveSpec graph(std::string expr, std::vector<double> singular = {});
  static CurveSpec param(std::string expr1, std::string expr2, std::vector<double> singular = {});

  /// Throws ConfigError for parametric specs.
  GraphCurve graph_curve() const;
  ParamCurve param_curve() const;
  std::string label() const;

  bool operator==(const CurveSpec&) const = default;
};

/// Random test functions of the ratio subcommand.
enum class RandomG { Gaussian, Phase, Sign };
const char* random_g_name(RandomG g);

struct GridConfig {
  double samples_per_frequency = 4.0;
  double samples_per_weight_scale = 2.0;
  double tail_tolerance = 1e-3;
  long nx_max = 1L << 20;
  long ny_max = 1L << 20;
  long nq_max = 1L << 20;
  double max_field_bytes = 3.0e9;

  bool operator==(const GridConfig&) const = default;
};

struct SearchConfig {
  std::vector<std::string> strategies{"constant", "single_cell", "random_phase", "random_sign",
                                      "coordinate_ascent"};
  long budget = 2000;
  int random_trials = 16;
  std::optional<std::uint64_t> seed = 1;
  RandomG ratio_g = RandomG::Gaussian;

  bool operator==(const SearchConfig&) const = default;
};

struct RescaleConfig {
  std::vector<double> nus{0.5, 2.0, 3.0};
  std::vector<double> deltas{0x1p-6, 0x1p-7, 0x1p-8, 0x1p-9, 0x1p-10, 0x1p-11, 0x1p-12};
  double a_exponent = 0.4;

  bool operator==(const RescaleConfig&) const = default;
};

struct ExpsumConfig {
  std::vector<int> Ns{8, 16, 32};
  std::string points = "lattice";
  std::optional<double> R;  ///< default N^r

  bool operator==(const ExpsumConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  bool record_timing = false;

  bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
  std::vector<CurveSpec> curves{CurveSpec::model(1.0)};
  std::vector<double> deltas{0x1p-4, 0x1p-5, 0x1p-6, 0x1p-7, 0x1p-8};
  std::vector<double> ps{6.0};
  double epsilon = 0.125;
  double alpha = 1.0;
  std::optional<double> beta;  ///< default min(alpha, epsilon)
  double weight_exponent = 200.0;
  GridConfig grid;
  SearchConfig search;
  RescaleConfig rescale;
  ExpsumConfig expsum;
  OutputConfig output;
  std::optional<int> workers;

  /// Range checks; throws ConfigError.
  void validate() const;
  double effective_beta() const;
  std::uint64_t seed() const { return search.seed.value_or(0); }
  DecouplingSettings decoupling_settings() const;
  SearchOptions search_options() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Strict parse: unknown keys and wrong types are ConfigErrors. The result is
/// validated.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Canonical JSON with every field spelled out.
std::string serialize_config(const ExperimentConfig& config);
/// FNV-1a 64 of the canonical JSON without `workers` and `output.dir`, as 16
/// hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace declab
