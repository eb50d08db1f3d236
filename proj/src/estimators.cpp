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

#include "masa/estimators.hpp"

#include <cmath>
#include <string>

namespace masa {

PerturbSchedule PerturbSchedule::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ParameterError("perturbation: c must be positive and finite");
  }
  return {Kind::constant, c, 0.0};
}

PerturbSchedule PerturbSchedule::polynomial_decay(double c, double gamma) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ParameterError("perturbation: c must be positive and finite");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ParameterError("perturbation: gamma must be positive");
  }
  return {Kind::polynomial_decay, c, gamma};
}

PerturbSchedule PerturbSchedule::default_for(const GainSchedule& gain, double c) {
  if (gain.kind() == GainSchedule::Kind::constant) {
    return constant(c);
  }
  return polynomial_decay(c, 0.101);
}

double PerturbSchedule::at(std::uint64_t k) const {
  if (kind_ == Kind::constant) {
    return c_;
  }
  return c_ / std::pow(static_cast<double>(k) + 1.0, gamma_);
}

void validate_pairing(const GainSchedule& gain, const PerturbSchedule& perturb) {
  if (perturb.kind() != PerturbSchedule::Kind::polynomial_decay) {
    return;
  }
  if (gain.kind() != GainSchedule::Kind::polynomial_decay) {
    throw ParameterError("a decaying perturbation needs a decaying gain");
  }
  if (!(perturb.gamma() < gain.alpha())) {
    throw ParameterError("perturbation exponent gamma must be smaller than the gain exponent alpha");
  }
}

BlockGradEstimate mask_to_block(const Vector& g, const BlockPartition& partition, std::size_t i) {
  if (static_cast<std::size_t>(g.size()) != partition.dim()) {
    throw DimensionError("mask_to_block: gradient length " + std::to_string(g.size()) + " != " +
                         std::to_string(partition.dim()));
  }
  const auto off = static_cast<Eigen::Index>(partition.offset(i));
  const auto len = static_cast<Eigen::Index>(partition.size(i));
  BlockGradEstimate out{Vector::Zero(g.size()), i, {}};
  out.vector.segment(off, len) = g.segment(off, len);
  return out;
}

BlockGradEstimate sg_block_gradient(const CyclicProblem& problem, std::size_t i, const Vector& theta,
                                    RngStream& rng, MeasurementCounter& counter) {
  if (!problem.has_grad_oracle()) {
    throw CapabilityError("SG estimator needs a gradient oracle");
  }
  problem.partition().size(i);  // range check before spending a measurement
  BlockGradEstimate out = mask_to_block(problem.measure_gradient(theta, rng, counter), problem.partition(), i);
  out.measurements_used.grad_evals = 1;
  return out;
}

BlockGradEstimate fdsa_block_gradient(const CyclicProblem& problem, std::size_t i, const Vector& theta, double c,
                                      RngStream& rng, MeasurementCounter& counter) {
  if (!(c > 0.0)) {
    throw ParameterError("FDSA: perturbation c must be positive");
  }
  if (!problem.has_loss_oracle()) {
    throw CapabilityError("FDSA estimator needs a loss oracle");
  }
  const BlockPartition& part = problem.partition();
  const auto off = static_cast<Eigen::Index>(part.offset(i));
  const auto len = static_cast<Eigen::Index>(part.size(i));
  BlockGradEstimate out{Vector::Zero(theta.size()), i, {}};
  Vector probe = theta;
  for (Eigen::Index j = off; j < off + len; ++j) {
    probe[j] = theta[j] + c;
    const double plus = problem.measure_loss(probe, rng, counter);
    probe[j] = theta[j] - c;
    const double minus = problem.measure_loss(probe, rng, counter);
    probe[j] = theta[j];
    out.vector[j] = (plus - minus) / (2.0 * c);
  }
  out.measurements_used.loss_evals = 2 * static_cast<std::uint64_t>(len);
  return out;
}

BlockGradEstimate spsa_block_gradient(const CyclicProblem& problem, std::size_t i, const Vector& theta, double c,
                                      const Vector& delta, RngStream& rng, MeasurementCounter& counter) {
  if (!(c > 0.0)) {
    throw ParameterError("SPSA: perturbation c must be positive");
  }
  if (!problem.has_loss_oracle()) {
    throw CapabilityError("SPSA estimator needs a loss oracle");
  }
  const BlockPartition& part = problem.partition();
  const auto off = static_cast<Eigen::Index>(part.offset(i));
  const auto len = static_cast<Eigen::Index>(part.size(i));
  if (delta.size() != len) {
    throw DimensionError("SPSA: perturbation length must equal the block size");
  }
  for (Eigen::Index t = 0; t < len; ++t) {
    if (delta[t] != 1.0 && delta[t] != -1.0) {
      throw ParameterError("SPSA: perturbation entries must be +1 or -1");
    }
  }
  Vector plus_point = theta;
  Vector minus_point = theta;
  plus_point.segment(off, len) += c * delta;
  minus_point.segment(off, len) -= c * delta;
  const double plus = problem.measure_loss(plus_point, rng, counter);
  const double minus = problem.measure_loss(minus_point, rng, counter);
  const double slope = (plus - minus) / (2.0 * c);

  BlockGradEstimate out{Vector::Zero(theta.size()), i, {}};
  for (Eigen::Index t = 0; t < len; ++t) {
    out.vector[off + t] = slope / delta[t];
  }
  out.measurements_used.loss_evals = 2;
  return out;
}

BlockGradEstimate spsa_block_gradient(const CyclicProblem& problem, std::size_t i, const Vector& theta, double c,
                                      RngStream& rng, MeasurementCounter& counter) {
  const std::size_t len = problem.partition().size(i);
  Vector delta(static_cast<Eigen::Index>(len));
  for (auto& d : delta) {
    d = rng.rademacher();
  }
  return spsa_block_gradient(problem, i, theta, c, delta, rng, counter);
}

Vector local_gradient(const DistributedProblem& problem, std::size_t i, const Vector& theta, RngStream& rng,
                      MeasurementCounter& counter) {
  return problem.measure_local_gradient(i, theta, rng, counter);
}

BlockEstimator BlockEstimator::sg() { return {Kind::sg, PerturbSchedule::constant(1.0)}; }

BlockEstimator BlockEstimator::fdsa(PerturbSchedule perturb) { return {Kind::fdsa, perturb}; }

BlockEstimator BlockEstimator::spsa(PerturbSchedule perturb) { return {Kind::spsa, perturb}; }

BlockGradEstimate BlockEstimator::operator()(const CyclicProblem& problem, std::size_t i, const Vector& theta,
                                             std::uint64_t k, RngStream& rng, MeasurementCounter& counter) const {
  switch (kind_) {
    case Kind::sg:
      return sg_block_gradient(problem, i, theta, rng, counter);
    case Kind::fdsa:
      return fdsa_block_gradient(problem, i, theta, perturb_.at(k), rng, counter);
    case Kind::spsa:
      return spsa_block_gradient(problem, i, theta, perturb_.at(k), rng, counter);
  }
  throw ParameterError("unknown estimator kind");
}

const char* to_string(BlockEstimator::Kind kind) {
  switch (kind) {
    case BlockEstimator::Kind::sg:
      return "sg";
    case BlockEstimator::Kind::fdsa:
      return "fdsa";
    case BlockEstimator::Kind::spsa:
      return "spsa";
  }
  return "?";
}

}  // namespace masa
