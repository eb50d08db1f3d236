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

#ifndef MASA_ALGORITHMS_HPP
#define MASA_ALGORITHMS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "masa/core.hpp"
#include "masa/estimators.hpp"
#include "masa/graph.hpp"

namespace masa {

/// The single shared iterate of the cyclic-update schemes.
struct SingleState {
  ParamVec theta;
  std::uint64_t k = 0;
};

/// One local copy of the decision vector per agent.
struct MultiState {
  std::vector<ParamVec> thetas;
  std::uint64_t k = 0;

  std::size_t num_agents() const { return thetas.size(); }
};

using AnyState = std::variant<SingleState, MultiState>;

/// An update produced a non-finite coordinate. Carries the last finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, AnyState last_finite)
      : Error(what), last_finite_(std::move(last_finite)) {}
  const AnyState& last_finite() const { return last_finite_; }

 private:
  AnyState last_finite_;
};

/// Noise stream of agent i at iteration k. Every scheme draws from the same
/// substream for the same (seed, k, i), independent of execution order.
RngStream agent_stream(const RngStream& run, std::uint64_t k, std::size_t i);

/// One outer GCSA iteration: blocks 1..A in order, each inner step reading
/// the freshest iterate, one gain for all inner steps.
SingleState gcsa_iteration(const SingleState& state, const CyclicProblem& problem, const BlockEstimator& estimator,
                           double gain, const RngStream& run, MeasurementCounter& counter);

/// Agent i's DSA update from the iteration-k copies: mix neighbor iterates with
/// W(k), then take a local gradient step at the mixed point.
ParamVec dsa_agent_update(const MultiState& state, const DistributedProblem& problem, const Matrix& weights,
                          std::size_t i, double gain, const RngStream& run, MeasurementCounter& counter);

/// Synchronous DSA iteration. Every agent reads only iteration-k copies.
MultiState dsa_iteration(const MultiState& state, const DistributedProblem& problem, const CommGraph& graph,
                         double gain, const RngStream& run, MeasurementCounter& counter);

/// Agent i's DSA-S update: same mixing, but the step uses the block-i
/// estimate, so only coordinates of block i move away from the mixed point.
ParamVec dsa_s_agent_update(const MultiState& state, const CyclicProblem& problem, const Matrix& weights,
                            const BlockEstimator& estimator, std::size_t i, double gain, const RngStream& run,
                            MeasurementCounter& counter);

MultiState dsa_s_iteration(const MultiState& state, const CyclicProblem& problem, const CommGraph& graph,
                           const BlockEstimator& estimator, double gain, const RngStream& run,
                           MeasurementCounter& counter);

/// One outer CISA iteration: the iterate is handed from agent 1 to agent A,
/// each applying its full local gradient.
SingleState cisa_iteration(const SingleState& state, const DistributedProblem& problem, double gain,
                           const RngStream& run, MeasurementCounter& counter);

/// Coordinate-wise mean of the local copies.
ParamVec consensus_average(const MultiState& state);
/// max_i || theta_i - mean ||
double consensus_error(const MultiState& state);

// --- driver ------------------------------------------------------------------

enum class AlgorithmKind { gcsa, dsa, dsa_s, cisa };

const char* to_string(AlgorithmKind kind);
std::optional<AlgorithmKind> algorithm_from_string(std::string_view name);
/// Cyclic-framework schemes need one global loss; distributed-framework
/// schemes need per-agent local losses.
bool needs_cyclic_framework(AlgorithmKind kind);
bool is_multi_state(AlgorithmKind kind);

struct AlgorithmConfig {
  AlgorithmKind kind = AlgorithmKind::gcsa;
  GainSchedule gain = GainSchedule::constant(0.01);
  BlockEstimator estimator = BlockEstimator::sg();
  /// Required by dsa and dsa_s.
  std::optional<CommGraph> graph;
};

/// A benchmark exposes one or both framework views of the same loss.
struct Benchmark {
  std::optional<CyclicProblem> cyclic;
  std::optional<DistributedProblem> distributed;

  std::size_t dim() const;
  std::optional<ParamVec> true_optimum() const;
};

/// Either one starting point (copied to every agent for multi-state schemes)
/// or one starting point per agent.
struct InitialCondition {
  std::vector<ParamVec> points;

  static InitialCondition single(ParamVec theta) { return {{std::move(theta)}}; }
  static InitialCondition per_agent(std::vector<ParamVec> copies) { return {std::move(copies)}; }
};

/// Stops at the first satisfied condition. Conditions are checked between
/// iterations, so an iteration that crosses the measurement budget completes.
struct StopCriteria {
  std::optional<std::uint64_t> max_iterations;
  std::optional<std::uint64_t> measurement_budget;
  std::optional<double> target_error;

  bool empty() const { return !max_iterations && !measurement_budget && !target_error; }
};

struct TraceRecord {
  std::uint64_t k = 0;
  double gain = 0.0;
  std::optional<double> error;
  std::optional<double> consensus_error;
  std::optional<double> loss;
  MeasurementCounter measurements;
};

struct RunTrace {
  std::vector<TraceRecord> records;
  /// Final iterate (single-state) or consensus average (multi-state).
  std::optional<ParamVec> final_theta;
  std::optional<MultiState> final_copies;
};

/// Raised by run() when an iteration diverges; holds the trace so far.
class RunDivergence : public Error {
 public:
  RunDivergence(const std::string& what, RunTrace partial) : Error(what), partial_(std::move(partial)) {}
  const RunTrace& partial_trace() const { return partial_; }

 private:
  RunTrace partial_;
};

/// Checks that the algorithm, its configuration and the benchmark fit
/// together. Throws ConfigError otherwise.
void check_compatibility(const AlgorithmConfig& config, const Benchmark& benchmark);

RunTrace run(const AlgorithmConfig& config, const Benchmark& benchmark, const InitialCondition& initial,
             const StopCriteria& stop, std::uint64_t seed);

}  // namespace masa

#endif  // MASA_ALGORITHMS_HPP
