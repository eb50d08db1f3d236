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

#ifndef MASA_ESTIMATORS_HPP
#define MASA_ESTIMATORS_HPP

#include <cstddef>
#include <cstdint>

#include "masa/core.hpp"

namespace masa {

/// Perturbation half-widths c_k for the finite-difference estimators.
class PerturbSchedule {
 public:
  enum class Kind { constant, polynomial_decay };

  static PerturbSchedule constant(double c);
  /// c / (k + 1)^gamma, gamma > 0.
  static PerturbSchedule polynomial_decay(double c, double gamma);
  /// The conventional pairing for a gain schedule: constant gains get a
  /// constant width, decaying gains get gamma = 0.101.
  static PerturbSchedule default_for(const GainSchedule& gain, double c);

  double at(std::uint64_t k) const;

  Kind kind() const { return kind_; }
  double c() const { return c_; }
  double gamma() const { return gamma_; }

 private:
  PerturbSchedule(Kind kind, double c, double gamma) : kind_(kind), c_(c), gamma_(gamma) {}

  Kind kind_;
  double c_;
  double gamma_;
};

/// Throws ParameterError unless a decaying perturbation decays strictly slower
/// than the gain (gamma < alpha).
void validate_pairing(const GainSchedule& gain, const PerturbSchedule& perturb);

/// A full-length gradient estimate that is exactly zero outside one block.
struct BlockGradEstimate {
  Vector vector;
  std::size_t block = 0;
  MeasurementCounter measurements_used;
};

/// Copies the coordinates of block i and zeros every other coordinate.
BlockGradEstimate mask_to_block(const Vector& g, const BlockPartition& partition, std::size_t i);

/// One stochastic-gradient oracle call, masked to block i.
BlockGradEstimate sg_block_gradient(const CyclicProblem& problem, std::size_t i, const Vector& theta,
                                    RngStream& rng, MeasurementCounter& counter);

/// Two-sided coordinate differences over block i: 2 * p_i loss measurements,
/// each with its own noise draw.
BlockGradEstimate fdsa_block_gradient(const CyclicProblem& problem, std::size_t i, const Vector& theta, double c,
                                      RngStream& rng, MeasurementCounter& counter);

/// Simultaneous perturbation along a random +/-1 direction supported on
/// block i: two loss measurements regardless of the block size.
BlockGradEstimate spsa_block_gradient(const CyclicProblem& problem, std::size_t i, const Vector& theta, double c,
                                      RngStream& rng, MeasurementCounter& counter);

/// Same estimate with a caller-supplied perturbation. `delta` has length p_i
/// and entries in {-1, +1}.
BlockGradEstimate spsa_block_gradient(const CyclicProblem& problem, std::size_t i, const Vector& theta, double c,
                                      const Vector& delta, RngStream& rng, MeasurementCounter& counter);

/// Agent i's noisy local gradient in the distributed framework. Generally
/// dense.
Vector local_gradient(const DistributedProblem& problem, std::size_t i, const Vector& theta, RngStream& rng,
                      MeasurementCounter& counter);

/// Estimator policy used by the cyclic-framework algorithms.
class BlockEstimator {
 public:
  enum class Kind { sg, fdsa, spsa };

  static BlockEstimator sg();
  static BlockEstimator fdsa(PerturbSchedule perturb);
  static BlockEstimator spsa(PerturbSchedule perturb);

  Kind kind() const { return kind_; }
  const PerturbSchedule& perturb() const { return perturb_; }

  /// Estimate for block i at iteration k (k selects c_k).
  BlockGradEstimate operator()(const CyclicProblem& problem, std::size_t i, const Vector& theta, std::uint64_t k,
                               RngStream& rng, MeasurementCounter& counter) const;

 private:
  BlockEstimator(Kind kind, PerturbSchedule perturb) : kind_(kind), perturb_(perturb) {}

  Kind kind_;
  PerturbSchedule perturb_;
};

const char* to_string(BlockEstimator::Kind kind);

}  // namespace masa

#endif  // MASA_ESTIMATORS_HPP
