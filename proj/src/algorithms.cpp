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

#include "masa/algorithms.hpp"

#include <algorithm>
#include <string>

namespace masa {

namespace {

ParamVec checked(Vector next, const AnyState& last_finite, const char* where) {
  if (!next.allFinite()) {
    throw DivergenceError(std::string(where) + ": non-finite iterate", last_finite);
  }
  return ParamVec(std::move(next));
}

void check_agents(const MultiState& state, std::size_t agents, std::size_t dim, std::size_t graph_agents) {
  if (state.num_agents() != agents || graph_agents != agents) {
    throw ConfigError("agent count mismatch: state has " + std::to_string(state.num_agents()) + ", problem " +
                      std::to_string(agents) + ", graph " + std::to_string(graph_agents));
  }
  for (const auto& t : state.thetas) {
    if (t.size() != dim) {
      throw DimensionError("local copy has length " + std::to_string(t.size()) + ", problem dim " +
                           std::to_string(dim));
    }
  }
}

Vector mix(const MultiState& state, const Matrix& weights, std::size_t i) {
  const auto row = static_cast<Eigen::Index>(i);
  Vector eta = Vector::Zero(state.thetas.front().values().size());
  for (std::size_t j = 0; j < state.num_agents(); ++j) {
    const double w = weights(row, static_cast<Eigen::Index>(j));
    if (w != 0.0) {
      eta += w * state.thetas[j].values();
    }
  }
  return eta;
}

}  // namespace

RngStream agent_stream(const RngStream& run, std::uint64_t k, std::size_t i) {
  return run.derive(k).derive(static_cast<std::uint64_t>(i));
}

SingleState gcsa_iteration(const SingleState& state, const CyclicProblem& problem, const BlockEstimator& estimator,
                           double gain, const RngStream& run, MeasurementCounter& counter) {
  if (state.theta.size() != problem.dim()) {
    throw DimensionError("gcsa_iteration: iterate length does not match the problem");
  }
  SingleState inner = state;
  for (std::size_t i = 0; i < problem.partition().num_blocks(); ++i) {
    RngStream rng = agent_stream(run, state.k, i);
    const BlockGradEstimate g = estimator(problem, i, inner.theta.values(), state.k, rng, counter);
    inner.theta = checked(inner.theta.values() - gain * g.vector, inner, "gcsa_iteration");
  }
  inner.k = state.k + 1;
  return inner;
}

ParamVec dsa_agent_update(const MultiState& state, const DistributedProblem& problem, const Matrix& weights,
                          std::size_t i, double gain, const RngStream& run, MeasurementCounter& counter) {
  const Vector eta = mix(state, weights, i);
  RngStream rng = agent_stream(run, state.k, i);
  const Vector g = local_gradient(problem, i, eta, rng, counter);
  return checked(eta - gain * g, state, "dsa_iteration");
}

MultiState dsa_iteration(const MultiState& state, const DistributedProblem& problem, const CommGraph& graph,
                         double gain, const RngStream& run, MeasurementCounter& counter) {
  check_agents(state, problem.num_agents(), problem.dim(), graph.num_agents());
  const Matrix w = graph.weights(state.k);
  MultiState next{{}, state.k + 1};
  next.thetas.reserve(state.num_agents());
  for (std::size_t i = 0; i < state.num_agents(); ++i) {
    next.thetas.push_back(dsa_agent_update(state, problem, w, i, gain, run, counter));
  }
  return next;
}

ParamVec dsa_s_agent_update(const MultiState& state, const CyclicProblem& problem, const Matrix& weights,
                            const BlockEstimator& estimator, std::size_t i, double gain, const RngStream& run,
                            MeasurementCounter& counter) {
  const Vector eta = mix(state, weights, i);
  RngStream rng = agent_stream(run, state.k, i);
  const BlockGradEstimate g = estimator(problem, i, eta, state.k, rng, counter);
  return checked(eta - gain * g.vector, state, "dsa_s_iteration");
}

MultiState dsa_s_iteration(const MultiState& state, const CyclicProblem& problem, const CommGraph& graph,
                           const BlockEstimator& estimator, double gain, const RngStream& run,
                           MeasurementCounter& counter) {
  check_agents(state, problem.partition().num_blocks(), problem.dim(), graph.num_agents());
  const Matrix w = graph.weights(state.k);
  MultiState next{{}, state.k + 1};
  next.thetas.reserve(state.num_agents());
  for (std::size_t i = 0; i < state.num_agents(); ++i) {
    next.thetas.push_back(dsa_s_agent_update(state, problem, w, estimator, i, gain, run, counter));
  }
  return next;
}

SingleState cisa_iteration(const SingleState& state, const DistributedProblem& problem, double gain,
                           const RngStream& run, MeasurementCounter& counter) {
  if (state.theta.size() != problem.dim()) {
    throw DimensionError("cisa_iteration: iterate length does not match the problem");
  }
  SingleState inner = state;
  for (std::size_t i = 0; i < problem.num_agents(); ++i) {
    RngStream rng = agent_stream(run, state.k, i);
    const Vector g = local_gradient(problem, i, inner.theta.values(), rng, counter);
    inner.theta = checked(inner.theta.values() - gain * g, inner, "cisa_iteration");
  }
  inner.k = state.k + 1;
  return inner;
}

ParamVec consensus_average(const MultiState& state) {
  if (state.thetas.empty()) {
    throw ParameterError("consensus_average: no local copies");
  }
  Vector sum = Vector::Zero(state.thetas.front().values().size());
  for (const auto& t : state.thetas) {
    sum += t.values();
  }
  return ParamVec(sum / static_cast<double>(state.thetas.size()));
}

double consensus_error(const MultiState& state) {
  const Vector mean = consensus_average(state).values();
  double worst = 0.0;
  for (const auto& t : state.thetas) {
    worst = std::max(worst, (t.values() - mean).norm());
  }
  return worst;
}

// --- driver -------------------------------------------------------------------

const char* to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::gcsa:
      return "gcsa";
    case AlgorithmKind::dsa:
      return "dsa";
    case AlgorithmKind::dsa_s:
      return "dsa_s";
    case AlgorithmKind::cisa:
      return "cisa";
  }
  return "?";
}

std::optional<AlgorithmKind> algorithm_from_string(std::string_view name) {
  if (name == "gcsa") return AlgorithmKind::gcsa;
  if (name == "dsa") return AlgorithmKind::dsa;
  if (name == "dsa_s") return AlgorithmKind::dsa_s;
  if (name == "cisa") return AlgorithmKind::cisa;
  return std::nullopt;
}

bool needs_cyclic_framework(AlgorithmKind kind) {
  return kind == AlgorithmKind::gcsa || kind == AlgorithmKind::dsa_s;
}

bool is_multi_state(AlgorithmKind kind) { return kind == AlgorithmKind::dsa || kind == AlgorithmKind::dsa_s; }

std::size_t Benchmark::dim() const {
  if (cyclic) return cyclic->dim();
  if (distributed) return distributed->dim();
  throw ConfigError("benchmark has neither a cyclic nor a distributed view");
}

std::optional<ParamVec> Benchmark::true_optimum() const {
  if (cyclic && cyclic->true_optimum()) return cyclic->true_optimum();
  if (distributed && distributed->true_optimum()) return distributed->true_optimum();
  return std::nullopt;
}

void check_compatibility(const AlgorithmConfig& config, const Benchmark& benchmark) {
  const char* name = to_string(config.kind);
  if (needs_cyclic_framework(config.kind)) {
    if (!benchmark.cyclic) {
      throw ConfigError(std::string(name) +
                        " is a cyclic-framework algorithm and needs a problem with one global loss; this problem "
                        "only offers per-agent local losses");
    }
  } else {
    if (!benchmark.distributed) {
      throw ConfigError(std::string(name) +
                        " is a distributed-framework algorithm and needs a loss of the form sum_i L_i; this "
                        "problem only offers a global loss");
    }
    if (config.estimator.kind() != BlockEstimator::Kind::sg) {
      throw ConfigError(std::string(name) + " uses each agent's local gradient oracle; only the sg estimator applies");
    }
  }
  if (is_multi_state(config.kind)) {
    if (!config.graph) {
      throw ConfigError(std::string(name) + " needs a communication graph");
    }
    const std::size_t agents = config.kind == AlgorithmKind::dsa ? benchmark.distributed->num_agents()
                                                                  : benchmark.cyclic->partition().num_blocks();
    if (config.graph->num_agents() != agents) {
      throw ConfigError("graph has " + std::to_string(config.graph->num_agents()) + " agents, problem has " +
                        std::to_string(agents));
    }
  }
  if (config.kind != AlgorithmKind::gcsa && config.kind != AlgorithmKind::dsa_s) {
    return;
  }
  if (config.estimator.kind() == BlockEstimator::Kind::sg && !benchmark.cyclic->has_grad_oracle()) {
    throw ConfigError("sg estimator needs a gradient oracle; this problem only offers loss measurements");
  }
  if (config.estimator.kind() != BlockEstimator::Kind::sg && !benchmark.cyclic->has_loss_oracle()) {
    throw ConfigError(std::string(to_string(config.estimator.kind())) + " estimator needs a loss oracle");
  }
  validate_pairing(config.gain, config.estimator.perturb());
}

namespace {

std::size_t agent_count(const AlgorithmConfig& config, const Benchmark& benchmark) {
  return config.kind == AlgorithmKind::dsa ? benchmark.distributed->num_agents()
                                           : benchmark.cyclic->partition().num_blocks();
}

std::optional<double> true_loss(const Benchmark& benchmark, const Vector& theta) {
  if (benchmark.cyclic) {
    if (auto l = benchmark.cyclic->true_loss(theta)) return l;
  }
  if (benchmark.distributed) {
    return benchmark.distributed->true_loss(theta);
  }
  return std::nullopt;
}

}  // namespace

RunTrace run(const AlgorithmConfig& config, const Benchmark& benchmark, const InitialCondition& initial,
             const StopCriteria& stop, std::uint64_t seed) {
  check_compatibility(config, benchmark);
  if (stop.empty()) {
    throw ConfigError("run: no stopping criterion given");
  }
  const std::optional<ParamVec> optimum = benchmark.true_optimum();
  if (stop.target_error && !optimum) {
    throw ConfigError("run: target_error needs a problem with a known optimum");
  }
  if (initial.points.empty()) {
    throw ConfigError("run: no initial point");
  }
  for (const auto& p : initial.points) {
    if (p.size() != benchmark.dim()) {
      throw DimensionError("run: initial point has length " + std::to_string(p.size()) + ", problem dim " +
                           std::to_string(benchmark.dim()));
    }
  }

  const bool multi = is_multi_state(config.kind);
  const RngStream stream(seed);
  MeasurementCounter counter;
  RunTrace trace;

  std::optional<SingleState> single;
  std::optional<MultiState> copies;
  if (multi) {
    const std::size_t agents = agent_count(config, benchmark);
    if (initial.points.size() == 1) {
      copies = MultiState{std::vector<ParamVec>(agents, initial.points.front()), 0};
    } else if (initial.points.size() == agents) {
      copies = MultiState{initial.points, 0};
    } else {
      throw ConfigError("run: expected 1 or " + std::to_string(agents) + " initial points");
    }
  } else {
    if (initial.points.size() != 1) {
      throw ConfigError(std::string("run: ") + to_string(config.kind) + " takes a single initial point");
    }
    single = SingleState{initial.points.front(), 0};
  }

  auto current_theta = [&]() { return multi ? consensus_average(*copies) : single->theta; };
  auto current_k = [&]() { return multi ? copies->k : single->k; };

  auto log = [&]() {
    const ParamVec theta = current_theta();
    TraceRecord rec;
    rec.k = current_k();
    rec.gain = config.gain.at(rec.k);
    if (optimum) {
      rec.error = (theta.values() - optimum->values()).norm();
    }
    if (multi) {
      rec.consensus_error = consensus_error(*copies);
    }
    rec.loss = true_loss(benchmark, theta.values());
    rec.measurements = counter;
    trace.records.push_back(rec);
  };

  auto should_stop = [&]() {
    const TraceRecord& last = trace.records.back();
    if (stop.max_iterations && last.k >= *stop.max_iterations) return true;
    if (stop.measurement_budget && counter.total() >= *stop.measurement_budget) return true;
    if (stop.target_error && last.error && *last.error <= *stop.target_error) return true;
    return false;
  };

  log();
  try {
    while (!should_stop()) {
      const double gain = config.gain.at(current_k());
      switch (config.kind) {
        case AlgorithmKind::gcsa:
          *single = gcsa_iteration(*single, *benchmark.cyclic, config.estimator, gain, stream, counter);
          break;
        case AlgorithmKind::cisa:
          *single = cisa_iteration(*single, *benchmark.distributed, gain, stream, counter);
          break;
        case AlgorithmKind::dsa:
          *copies = dsa_iteration(*copies, *benchmark.distributed, *config.graph, gain, stream, counter);
          break;
        case AlgorithmKind::dsa_s:
          *copies = dsa_s_iteration(*copies, *benchmark.cyclic, *config.graph, config.estimator, gain, stream,
                                    counter);
          break;
      }
      log();
    }
  } catch (const DivergenceError& e) {
    trace.final_theta = current_theta();
    if (multi) trace.final_copies = copies;
    throw RunDivergence(std::string(to_string(config.kind)) + " diverged at iteration " +
                            std::to_string(current_k()) + ": " + e.what(),
                        std::move(trace));
  }
  trace.final_theta = current_theta();
  if (multi) trace.final_copies = copies;
  return trace;
}

}  // namespace masa
