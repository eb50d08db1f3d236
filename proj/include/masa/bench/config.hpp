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

#ifndef MASA_BENCH_CONFIG_HPP
#define MASA_BENCH_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "masa/algorithms.hpp"
#include "masa/problems.hpp"
#include "masa/surveillance.hpp"

namespace masa::bench {

enum class ProblemKind { separable_quadratic, regression_field, surveillance };

const char* to_string(ProblemKind kind);

struct QuadraticSpec {
  std::vector<std::size_t> block_sizes;
  std::vector<Vector> block_optima;
  std::vector<double> curvatures;
  double noise_sigma = 0.0;
};

struct RegressionSpec {
  std::vector<Vector> locations;
  std::string features = "affine";
  std::size_t degree = 1;
  Vector true_theta;
  std::vector<std::size_t> samples_per_agent{1};
  double noise_sigma = 0.0;
  std::uint64_t data_seed = 0;
};

struct ProblemSpec {
  ProblemKind kind = ProblemKind::separable_quadratic;
  QuadraticSpec quadratic;
  RegressionSpec regression;
  SurveillanceSpec surveillance;

  /// Which framework views the problem offers.
  bool has_cyclic_view() const { return kind != ProblemKind::regression_field; }
  bool has_distributed_view() const { return kind != ProblemKind::surveillance; }
};

struct GraphSpec {
  std::string kind = "ring";  // ring | complete | empty | edge_list
  std::filesystem::path path;
  std::optional<double> activation_prob;
  std::uint64_t seed = 0;
};

struct AlgorithmSpec {
  std::string label;
  AlgorithmKind kind = AlgorithmKind::gcsa;
  GainSchedule gain = GainSchedule::constant(0.01);
  BlockEstimator estimator = BlockEstimator::sg();
  std::optional<GraphSpec> graph;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path source;
  ProblemSpec problem;
  std::vector<AlgorithmSpec> algorithms;
  /// Empty means: zero vector, or the scenario's own start for surveillance.
  std::vector<Vector> initial;
  StopCriteria stop;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out_dir = "out";
};

/// Reads and validates a YAML experiment description. Errors are reported as
/// ConfigError ("<file>:<line>: <message>") naming the first offending key.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_string(const std::string& text, const std::string& origin = "<string>");

Benchmark build_benchmark(const ProblemSpec& spec);
CommGraph build_graph(const GraphSpec& spec, std::size_t num_agents, const std::filesystem::path& base_dir);
AlgorithmConfig build_algorithm(const AlgorithmSpec& spec, std::size_t num_agents,
                                const std::filesystem::path& base_dir);

}  // namespace masa::bench

#endif  // MASA_BENCH_CONFIG_HPP
