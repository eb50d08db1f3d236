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

#ifndef MASA_PROBLEMS_HPP
#define MASA_PROBLEMS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "masa/algorithms.hpp"
#include "masa/core.hpp"

namespace masa {

/// L(theta) = sum_i c_i || t_i - t_i* ||^2 with additive Gaussian noise on
/// loss and gradient measurements. Exposed both as a cyclic problem and as a
/// distributed problem whose agent i owns the term of block i.
///
/// Gradient noise for block b is drawn from `rng.derive(b)`, in both views,
/// so a masked cyclic gradient and the matching local gradient see the same
/// noise when handed the same stream.
class SeparableQuadratic {
 public:
  SeparableQuadratic(BlockPartition partition, std::vector<Vector> block_optima, std::vector<double> curvatures,
                     double noise_sigma);

  const BlockPartition& partition() const { return data_->partition; }
  double noise_sigma() const { return data_->sigma; }
  ParamVec true_optimum() const;

  double loss(const Vector& theta) const;
  double block_loss(std::size_t i, const Vector& theta) const;
  Vector gradient(const Vector& theta) const;
  /// Sparse gradient of term i: nonzero only on block i.
  Vector block_gradient(std::size_t i, const Vector& theta) const;

  CyclicProblem cyclic_view() const;
  DistributedProblem distributed_view() const;
  Benchmark benchmark() const;

 private:
  struct Data {
    BlockPartition partition;
    std::vector<Vector> optima;
    std::vector<double> curvatures;
    double sigma;
  };
  Vector block_noise(std::size_t b, RngStream& rng) const;

  std::shared_ptr<const Data> data_;
};

SeparableQuadratic make_separable_quadratic(BlockPartition partition, std::vector<Vector> block_optima,
                                            std::vector<double> block_curvatures, double noise_sigma);

using FeatureMap = std::function<Vector(const Vector&)>;

/// [1, s_0, s_0^2, ..., s_0^degree] of the first location coordinate.
FeatureMap polynomial_features(std::size_t degree);
/// [1, s_0, s_1, ...].
FeatureMap affine_features();

/// Agents at fixed locations observe r = phi(s_i)^T theta_true + noise. Agent
/// i's empirical loss is (1/N_i) sum_k (r_ik - phi(s_i)^T theta)^2 and its
/// gradient oracle evaluates one uniformly drawn sample.
class RegressionField {
 public:
  RegressionField(std::vector<Vector> locations, FeatureMap feature_map, ParamVec true_theta,
                  std::vector<std::size_t> samples_per_agent, double noise_sigma, std::uint64_t seed);

  std::size_t num_agents() const { return data_->features.size(); }
  std::size_t dim() const { return data_->true_theta.size(); }
  const ParamVec& true_theta() const { return data_->true_theta; }
  const Vector& features(std::size_t i) const { return data_->features.at(i); }
  const std::vector<double>& observations(std::size_t i) const { return data_->observations.at(i); }

  double local_loss(std::size_t i, const Vector& theta) const;
  Vector local_full_gradient(std::size_t i, const Vector& theta) const;
  Vector sample_gradient(std::size_t i, std::size_t sample, const Vector& theta) const;

  /// Minimizer of sum_i local_loss via the normal equations (pseudo-inverse
  /// when the stacked design is rank deficient).
  const ParamVec& normal_equations_solution() const { return data_->solution; }
  bool rank_deficient() const { return data_->rank_deficient; }

  DistributedProblem distributed_view() const;
  Benchmark benchmark() const;

 private:
  struct Data {
    std::vector<Vector> features;
    std::vector<std::vector<double>> observations;
    ParamVec true_theta;
    ParamVec solution;
    bool rank_deficient;
  };
  std::shared_ptr<const Data> data_;
};

RegressionField make_regression_field(std::vector<Vector> locations, const FeatureMap& feature_map,
                                      ParamVec true_theta, std::vector<std::size_t> samples_per_agent,
                                      double noise_sigma, std::uint64_t seed);

/// Known minimizer of a benchmark, when one exists.
std::optional<ParamVec> true_optimum(const Benchmark& benchmark);

}  // namespace masa

#endif  // MASA_PROBLEMS_HPP
