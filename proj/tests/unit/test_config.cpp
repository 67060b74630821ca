#include <doctest.h>

#include <string>

#include "declab/config.hpp"
#include "declab/errors.hpp"

using namespace declab;

namespace {

ExperimentConfig everything_set() {
  ExperimentConfig c;
  c.curves = {CurveSpec::model(0.5), CurveSpec::graph("sin(t) + t^2", {0.0}),
              CurveSpec::param("cos(t)", "sin(t)")};
  c.deltas = {0.25, 0x1p-7, 0.001};
  c.ps = {2.0, 3.5, 6.0};
  c.epsilon = 0.1;
  c.alpha = 0.75;
  c.beta = 0.05;
  c.weight_exponent = 120.0;
  c.grid = {5.0, 3.0, 1e-4, 4096, 8192, 50000, 1e8};
  c.search.strategies = {"random_sign", "coordinate_ascent"};
  c.search.budget = 77;
  c.search.random_trials = 3;
  c.search.seed = 0xfedcba9876543210ULL;
  c.search.ratio_g = RandomG::Sign;
  c.rescale = {{0.5, 3.0}, {0x1p-6, 0x1p-9}, 0.3};
  c.expsum.Ns = {4, 9};
  c.expsum.points = "perturbed";
  c.expsum.R = 123.5;
  c.output = {"some/dir", true};
  c.workers = 3;
  return c;
}

ExperimentConfig with(const std::string& json) { return parse_config(json); }

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults are valid and parse from an empty object") {
    CHECK_NOTHROW(ExperimentConfig{}.validate());
    CHECK(with("{}") == ExperimentConfig{});
    CHECK(std::string(version()).size() > 0);
  }

  TEST_CASE("round trip is the identity") {
    ExperimentConfig unseeded;
    unseeded.search.strategies = {"constant"};
    unseeded.search.seed.reset();
    for (const ExperimentConfig& c : {ExperimentConfig{}, everything_set(), unseeded}) {
      const std::string text = serialize_config(c);
      const ExperimentConfig back = parse_config(text);
      CHECK(back == c);
      CHECK(serialize_config(back) == text);
    }
    // Values that need all 17 digits survive.
    ExperimentConfig c;
    c.deltas = {0.1, 1.0 / 3.0 * 0.5, 0.2000000000000001};
    CHECK(parse_config(serialize_config(c)).deltas == c.deltas);
  }

  TEST_CASE("unknown keys and wrong types are rejected") {
    CHECK_THROWS_AS(with(R"({"delta": [0.1]})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"grid": {"nx": 10}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"curves": [{"kind": "model", "nu": 2, "expr": "t"}]})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"curves": [{"kind": "spiral"}]})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"curves": [{"kind": "model"}]})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"deltas": 0.1})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"deltas": ["0.1"]})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"search": {"budget": 2.5}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"search": {"seed": -1}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"search": {"ratio_g": "cauchy"}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"output": {"record_timing": 1}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"search": {"random_trials": 9999999999}})"), ConfigError);
    CHECK_THROWS_AS(with("{"), ConfigError);
    CHECK_THROWS_AS(with("[]"), ConfigError);
  }

  TEST_CASE("documented ranges") {
    CHECK_NOTHROW(with(R"({"deltas": [0.25]})"));
    CHECK_THROWS_AS(with(R"({"deltas": [0.26]})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"deltas": [0]})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"deltas": []})"), ConfigError);
    CHECK_NOTHROW(with(R"({"ps": [2, 6]})"));
    CHECK_THROWS_AS(with(R"({"ps": [1.9]})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"ps": [6.1]})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"epsilon": 0.5})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"epsilon": 0})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"curves": [{"kind": "model", "nu": 0}]})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"curves": [{"kind": "graph", "expr": "t^"}]})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"search": {"strategies": ["annealing"]}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"expsum": {"Ns": [513]}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"workers": 0})"), ConfigError);
  }

  TEST_CASE("seed is required exactly when randomness is enabled") {
    CHECK_THROWS_AS(with(R"({"search": {"seed": null}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"search": {"seed": null, "strategies": ["random_phase"]}})"), ConfigError);
    CHECK_NOTHROW(with(R"({"search": {"seed": null, "strategies": ["constant", "coordinate_ascent"]}})"));
    CHECK_THROWS_AS(with(R"({"search": {"seed": null, "strategies": ["constant"]}, "expsum": {"points": "random"}})"),
                    ConfigError);
  }

  TEST_CASE("hash ignores workers and output directory only") {
    const ExperimentConfig base = everything_set();
    const std::string h = config_hash(base);
    CHECK(h.size() == 16);
    CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
    ExperimentConfig c = base;
    c.workers = 1;
    c.output.dir = "elsewhere";
    CHECK(config_hash(c) == h);
    c.output.record_timing = false;
    CHECK(config_hash(c) != h);
    c = base;
    c.deltas[0] = 0.125;
    CHECK(config_hash(c) != h);
    c = base;
    c.search.seed = 1;
    CHECK(config_hash(c) != h);
    CHECK(config_hash(parse_config(serialize_config(base))) == h);
  }

  TEST_CASE("curve specs") {
    CHECK(CurveSpec::model(2.0).graph_curve().model_exponent() == 2.0);
    CHECK(CurveSpec::graph("t^2").graph_curve().phi(0.5) == doctest::Approx(0.25));
    CHECK_THROWS_AS(CurveSpec::param("t", "t^2").graph_curve(), ConfigError);
    CHECK(CurveSpec::param("cos(t)", "sin(t)").param_curve().point(0.0).x() == doctest::Approx(1.0));
    CHECK(CurveSpec::param("a", "b").label() == "(a, b)");
  }

  TEST_CASE("derived settings") {
    const ExperimentConfig c = everything_set();
    const DecouplingSettings s = c.decoupling_settings();
    CHECK(s.grid.nx_max == 4096);
    CHECK(s.grid.ny_max == 8192);
    CHECK(s.quadrature.nq_max == 50000);
    CHECK(s.weight_exponent == 120.0);
    const SearchOptions o = c.search_options();
    CHECK(o.strategies.size() == 2);
    CHECK(o.strategies[0] == Strategy::RandomSign);
    CHECK(o.seed == 0xfedcba9876543210ULL);
    CHECK(c.effective_beta() == 0.05);
    CHECK(ExperimentConfig{}.effective_beta() == 0.125);
  }
}
