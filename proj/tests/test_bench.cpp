// Copyright 2026 The masa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "masa/bench/config.hpp"
#include "masa/bench/grid.hpp"
#include "masa/bench/trace_io.hpp"
#include "masa/errors.hpp"

using namespace masa;
using namespace masa::bench;

namespace {

const char* kMinimal = R"(
problem:
  kind: separable_quadratic
  block_sizes: [2, 2]
algorithm:
  kind: gcsa
  gain: {kind: constant, a: 0.1}
)";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("masa_bench_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string error_of(const std::string& text) {
  try {
    parse_config_string(text, "cfg.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kQuadratic = R"(
problem:
  kind: separable_quadratic
  block_sizes: [2, 2, 2]
  block_optima: [[1, -1], [2, 0], [-3, 1]]
  curvatures: [0.5, 1.0, 2.0]
  noise_sigma: 0.1
)";

const char* kRegression = R"(
problem:
  kind: regression_field
  circle: {agents: 4, radius: 1.5}
  true_theta: [1, 2, 3]
  samples_per_agent: 5
  noise_sigma: 0.2
)";

const char* kSurveillance = R"(
problem:
  kind: surveillance
  preset: default
)";

std::string with_algorithm(const char* problem, const std::string& kind) {
  std::string alg = "algorithm:\n  kind: " + kind + "\n";
  const bool surveillance = std::string(problem).find("surveillance") != std::string::npos;
  alg += surveillance ? "  gain: {kind: constant, a: 1.0}\n" : "  gain: {kind: decay, a: 0.5, stability: 9}\n";
  if (kind == "dsa" || kind == "dsa_s") alg += "  graph: {kind: ring}\n";
  const bool cyclic = kind == "gcsa" || kind == "dsa_s";
  if (cyclic && surveillance) alg += "  estimator: {kind: spsa, c: 0.5}\n";
  if (cyclic && std::string(problem).find("regression") != std::string::npos) {
    alg += "  estimator: {kind: spsa, c: 0.5}\n";
  }
  return std::string(problem) + alg;
}

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("minimal config gets defaults") {
    const auto cfg = parse_config_string(kMinimal);
    CHECK(cfg.name == "experiment");
    CHECK(cfg.seeds == std::vector<std::uint64_t>{1});
    CHECK(cfg.stop.max_iterations == 1000u);
    CHECK(cfg.initial.empty());
    REQUIRE(cfg.algorithms.size() == 1);
    CHECK(cfg.algorithms[0].label == "gcsa");
    CHECK(cfg.algorithms[0].estimator.kind() == BlockEstimator::Kind::sg);
    CHECK(cfg.problem.quadratic.curvatures == std::vector<double>{1.0, 1.0});
    CHECK(cfg.problem.quadratic.noise_sigma == 0.0);
  }

  TEST_CASE("framework mismatch is rejected") {
    const std::string msg = error_of(with_algorithm(kRegression, "gcsa"));
    CHECK(msg.find("framework mismatch") != std::string::npos);
    CHECK(msg.find("cfg.yaml:") == 0);
  }

  TEST_CASE("compatibility matrix") {
    struct Case {
      const char* problem;
      const char* kind;
      bool accepted;
    };
    const Case cases[] = {
        {kQuadratic, "gcsa", true},       {kQuadratic, "dsa_s", true},      {kQuadratic, "dsa", true},
        {kQuadratic, "cisa", true},       {kRegression, "gcsa", false},     {kRegression, "dsa_s", false},
        {kRegression, "dsa", true},       {kRegression, "cisa", true},      {kSurveillance, "gcsa", true},
        {kSurveillance, "dsa_s", false},  {kSurveillance, "dsa", false},    {kSurveillance, "cisa", false},
    };
    for (const Case& c : cases) {
      CAPTURE(c.kind);
      const std::string msg = error_of(with_algorithm(c.problem, c.kind));
      CHECK(msg.empty() == c.accepted);
    }
  }

  TEST_CASE("duplicate keys report the line") {
    const std::string msg = error_of("problem:\n  kind: separable_quadratic\n  block_sizes: [1]\n  block_sizes: [2]\n"
                                     "algorithm: {kind: gcsa, gain: {a: 0.1, kind: constant}}\n");
    CHECK(msg.find("cfg.yaml:4:") == 0);
    CHECK(msg.find("duplicate key 'block_sizes'") != std::string::npos);
  }

  TEST_CASE("diagnostics name the offending key") {
    CHECK(error_of(std::string(kMinimal) + "bogus: 1\n").find("unknown key 'config.bogus'") != std::string::npos);
    CHECK(error_of("problem: {kind: cubic}\nalgorithm: {kind: gcsa, gain: {a: 1}}\n").find("unknown problem kind") !=
          std::string::npos);
    CHECK(error_of(std::string(kQuadratic) + "algorithm: {kind: sgd, gain: {a: 1}}\n").find("unknown algorithm") !=
          std::string::npos);
    CHECK(error_of(std::string(kQuadratic) + "algorithm: {kind: gcsa, gain: {a: 1, alpha: 0.4}}\n")
              .find("alpha") != std::string::npos);
    CHECK(error_of(std::string(kMinimal) + "initial: {point: [1, 2, 3]}\n").find("dimension is 4") !=
          std::string::npos);
    CHECK(error_of(std::string(kMinimal) + "seeds: [1, 1]\n").find("duplicate seed") != std::string::npos);
    CHECK(error_of(std::string(kMinimal) + "stop: {}\n").find("at least one") != std::string::npos);
    CHECK(error_of(std::string(kRegression) + "algorithm: {kind: dsa, gain: {a: 1}, estimator: {kind: spsa}}\n")
              .find("only the sg estimator") != std::string::npos);
    CHECK(error_of("problem: [1, 2\n").find("cfg.yaml:") == 0);
    CHECK_THROWS_AS(parse_config("/nonexistent/masa.yaml"), IoError);
  }

  TEST_CASE("trace CSV layout") {
    RunTrace single;
    single.records.push_back({0, 0.1, 1.5, std::nullopt, 2.25, {3, 4}});
    std::ostringstream out;
    write_trace(out, single);
    CHECK(out.str() == "k,gain,error,consensus_error,loss,loss_evals,grad_evals\n"
                       "0,0.10000000000000001,1.5,,2.25,3,4\n");

    RunTrace surv;
    surv.records.push_back({0, 3.0, std::nullopt, std::nullopt, -6.5, {}});
    std::ostringstream out2;
    write_trace(out2, surv);
    CHECK(out2.str().find("\n0,3,,,-6.5,0,0\n") != std::string::npos);
  }

  TEST_CASE("trace files round trip exactly") {
    const auto dir = scratch("roundtrip");
    RunTrace trace;
    trace.records.push_back({0, 1.0 / 3.0, 0.1 + 0.2, 1e-300, -4.0 / 7.0, {1, 2}});
    trace.records.push_back({1, 2.0 / 3.0, std::nullopt, std::nullopt, std::nullopt, {5, 6}});
    emit_trace(trace, dir / "t.csv");
    CHECK(read_file(dir / "t.csv").size() > 0);
    const RunTrace back = read_trace(dir / "t.csv");
    REQUIRE(back.records.size() == 2);
    CHECK(back.records[0].gain == 1.0 / 3.0);
    CHECK(back.records[0].error == 0.1 + 0.2);
    CHECK(back.records[0].consensus_error == 1e-300);
    CHECK(back.records[0].loss == -4.0 / 7.0);
    CHECK_FALSE(back.records[1].error.has_value());
    CHECK(back.records[1].measurements == MeasurementCounter{5, 6});
    CHECK_THROWS_AS(emit_trace(trace, dir / "missing" / "t.csv"), IoError);
    try {
      read_trace(dir / "absent.csv");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("absent.csv") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("grid writes one trace per cell and a coherent summary") {
    const auto dir = scratch("grid");
    auto cfg = parse_config_string(std::string(kQuadratic) + R"(
name: grid
algorithms:
  - {kind: gcsa, gain: {kind: decay, a: 1, stability: 9}}
  - {kind: dsa, gain: {kind: decay, a: 1, stability: 9}, graph: {kind: ring}}
stop: {max_iterations: 10}
seeds: [3, 4]
)");
    const auto result = run_grid(cfg, {2, dir, {}});
    CHECK(result.cells.size() == 4);
    CHECK(result.summary.rows.size() == 4);
    CHECK(std::filesystem::exists(dir / "grid__gcsa__seed3.csv"));
    CHECK(std::filesystem::exists(dir / "grid__dsa__seed4.csv"));
    CHECK(std::filesystem::exists(dir / "grid__summary.json"));
    CHECK(read_trace(dir / "grid__gcsa__seed3.csv").records.size() == 11);
    const std::string gcsa_csv = read_file(dir / "grid__gcsa__seed3.csv");
    CHECK(gcsa_csv.find("\n10,") != std::string::npos);

    const SummaryReport recomputed = summarize_traces(cfg, dir);
    CHECK(summary_json(recomputed) == summary_json(result.summary));
    CHECK(summary_json(summary_from_json(read_file(dir / "grid__summary.json"))) == summary_json(result.summary));

    const std::string first = read_file(dir / "grid__dsa__seed3.csv");
    run_grid(cfg, {1, dir, {}});
    CHECK(read_file(dir / "grid__dsa__seed3.csv") == first);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("divergent cells are recorded, not fatal") {
    const auto dir = scratch("diverge");
    auto cfg = parse_config_string(std::string(kQuadratic) + R"(
name: wild
algorithms:
  - {kind: gcsa, label: calm, gain: {kind: constant, a: 0.01}}
  - {kind: gcsa, label: wild, gain: {kind: constant, a: 50}}
initial: {point: [1, 1, 1, 1, 1, 1]}
stop: {max_iterations: 2000}
seeds: [1]
)");
    const auto result = run_grid(cfg, {1, dir, {}});
    CHECK(result.summary.any_failed());
    CHECK(result.summary.rows[0].ok);
    CHECK_FALSE(result.summary.rows[1].ok);
    CHECK(result.summary.aggregates[1].failures == 1);
    CHECK_FALSE(result.summary.aggregates[1].final_error.has_value());
    CHECK(std::filesystem::exists(dir / "wild__wild__seed1.csv"));
    const auto recomputed =
        summarize_traces(cfg, dir, {{"wild", 1, result.summary.rows[1].failure}});
    CHECK(summary_json(recomputed) == summary_json(result.summary));
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("surveillance grid leaves the error column empty") {
    const auto dir = scratch("surv");
    auto cfg = parse_config_string(std::string(kSurveillance) + R"(
name: s
algorithm: {kind: gcsa, gain: {kind: constant, a: 3}, estimator: {kind: spsa, c: 0.6}}
stop: {max_iterations: 5}
)");
    run_grid(cfg, {1, dir, {}});
    const auto trace = read_trace(dir / "s__gcsa__seed1.csv");
    CHECK(trace.records.size() == 6);
    for (const auto& r : trace.records) {
      CHECK_FALSE(r.error.has_value());
      CHECK(r.loss.has_value());
    }
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("aggregate statistics") {
    const auto a = aggregate({4, 1, 3, 2});
    REQUIRE(a);
    CHECK(a->median == 2.5);
    CHECK(a->q1 == 1.75);
    CHECK(a->q3 == 3.25);
    CHECK_FALSE(aggregate({}).has_value());
  }

  TEST_CASE("comparison table lists every algorithm") {
    SummaryReport r;
    r.name = "x";
    r.aggregates.push_back({"gcsa", 2, 0, Aggregate{2, 0.5, 0.4, 0.6}, {}, {}, {}});
    const auto table = comparison_table({r, r});
    CHECK(table.find("gcsa") != std::string::npos);
    CHECK(table.find("0.5 [0.2]") != std::string::npos);
  }
}
