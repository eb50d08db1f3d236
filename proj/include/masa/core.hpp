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

#ifndef MASA_CORE_HPP
#define MASA_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "masa/errors.hpp"
#include "masa/rng.hpp"

namespace masa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

bool all_finite(const Vector& v);

/// The global decision vector. Construction rejects empty or non-finite
/// values, so a ParamVec in hand is always a valid iterate.
class ParamVec {
 public:
  explicit ParamVec(Vector values);
  ParamVec(std::initializer_list<double> values);

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t j) const { return values_[static_cast<Eigen::Index>(j)]; }
  const Vector& values() const { return values_; }

  friend bool operator==(const ParamVec& a, const ParamVec& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Vector values_;
};

/// Disjoint contiguous coordinate blocks S_1..S_A covering {0..p-1}.
/// Agent and coordinate indices are zero-based.
class BlockPartition {
 public:
  /// Contiguous layout: block i covers [p_0 + ... + p_{i-1}, ... + p_i).
  static BlockPartition from_sizes(std::span<const std::size_t> block_sizes);
  /// Accepts explicit index sets, which must describe the same contiguous
  /// layout. Overlapping, gapped or out-of-order sets are rejected.
  static BlockPartition from_index_sets(const std::vector<std::vector<std::size_t>>& sets);

  std::size_t num_blocks() const { return sizes_.size(); }
  std::size_t dim() const { return offsets_.back(); }
  std::size_t offset(std::size_t i) const;
  std::size_t size(std::size_t i) const;
  const std::vector<std::size_t>& block_sizes() const { return sizes_; }
  std::vector<std::size_t> indices(std::size_t i) const;
  /// Block containing coordinate j.
  std::size_t block_of(std::size_t j) const;
  bool contains(std::size_t i, std::size_t j) const;

  friend bool operator==(const BlockPartition&, const BlockPartition&) = default;

 private:
  explicit BlockPartition(std::vector<std::size_t> sizes);
  void check_block(std::size_t i) const;

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;  // size A + 1
};

BlockPartition make_partition(std::span<const std::size_t> block_sizes);
BlockPartition make_partition(std::initializer_list<std::size_t> block_sizes);

/// Coordinates of block i, in ascending order.
Vector subvector(const ParamVec& theta, const BlockPartition& partition, std::size_t i);
Vector subvector(const Vector& theta, const BlockPartition& partition, std::size_t i);
ParamVec with_subvector(const ParamVec& theta, const BlockPartition& partition, std::size_t i,
                        const Vector& block);

/// Step sizes a_k.
class GainSchedule {
 public:
  enum class Kind { constant, polynomial_decay };

  static GainSchedule constant(double a);
  /// a / (k + 1 + stability)^alpha, with 0.5 < alpha <= 1.
  static GainSchedule polynomial_decay(double a, double stability, double alpha);

  double at(std::uint64_t k) const;

  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double stability() const { return stability_; }
  double alpha() const { return alpha_; }

 private:
  GainSchedule(Kind kind, double a, double stability, double alpha)
      : kind_(kind), a_(a), stability_(stability), alpha_(alpha) {}

  Kind kind_;
  double a_;
  double stability_;
  double alpha_;
};

inline double gain_at(const GainSchedule& schedule, std::uint64_t k) { return schedule.at(k); }

/// Oracle call counts for one run.
struct MeasurementCounter {
  std::uint64_t loss_evals = 0;
  std::uint64_t grad_evals = 0;

  std::uint64_t total() const { return loss_evals + grad_evals; }
  MeasurementCounter& operator+=(const MeasurementCounter& other) {
    loss_evals += other.loss_evals;
    grad_evals += other.grad_evals;
    return *this;
  }
  friend bool operator==(const MeasurementCounter&, const MeasurementCounter&) = default;
};

using LossOracle = std::function<double(const Vector&, RngStream&)>;
using GradOracle = std::function<Vector(const Vector&, RngStream&)>;
using TrueLoss = std::function<double(const Vector&)>;

/// One global noisy loss L over a block-partitioned decision vector.
class CyclicProblem {
 public:
  CyclicProblem(BlockPartition partition, LossOracle loss, GradOracle grad = {});

  CyclicProblem& with_true_loss(TrueLoss loss);
  /// Records the known minimizer. When a true loss is attached, the point is
  /// checked against nearby perturbations and rejected if it is not a local
  /// minimum.
  CyclicProblem& with_true_optimum(ParamVec optimum);

  std::size_t dim() const { return partition_.dim(); }
  const BlockPartition& partition() const { return partition_; }
  bool has_loss_oracle() const { return static_cast<bool>(loss_); }
  bool has_grad_oracle() const { return static_cast<bool>(grad_); }

  double measure_loss(const Vector& theta, RngStream& rng, MeasurementCounter& counter) const;
  Vector measure_gradient(const Vector& theta, RngStream& rng, MeasurementCounter& counter) const;

  std::optional<double> true_loss(const Vector& theta) const;
  const std::optional<ParamVec>& true_optimum() const { return optimum_; }

 private:
  void check_dim(const Vector& theta) const;

  BlockPartition partition_;
  LossOracle loss_;
  GradOracle grad_;
  TrueLoss true_loss_;
  std::optional<ParamVec> optimum_;
};

/// L = sum_i L_i where agent i can only measure its own term.
class DistributedProblem {
 public:
  DistributedProblem(std::size_t dim, std::vector<GradOracle> local_grads);

  DistributedProblem& with_local_losses(std::vector<LossOracle> losses);
  DistributedProblem& with_local_true_losses(std::vector<TrueLoss> losses);
  DistributedProblem& with_true_optimum(ParamVec optimum);

  std::size_t dim() const { return dim_; }
  std::size_t num_agents() const { return grads_.size(); }
  bool has_local_losses() const { return !losses_.empty(); }

  Vector measure_local_gradient(std::size_t i, const Vector& theta, RngStream& rng,
                                MeasurementCounter& counter) const;
  double measure_local_loss(std::size_t i, const Vector& theta, RngStream& rng,
                            MeasurementCounter& counter) const;

  /// Sum of the noise-free local losses, when they are known.
  std::optional<double> true_loss(const Vector& theta) const;
  const std::optional<ParamVec>& true_optimum() const { return optimum_; }

 private:
  void check_agent(std::size_t i) const;
  void check_dim(const Vector& theta) const;

  std::size_t dim_;
  std::vector<GradOracle> grads_;
  std::vector<LossOracle> losses_;
  std::vector<TrueLoss> true_losses_;
  std::optional<ParamVec> optimum_;
};

/// Numerical spot check that `x` is no worse than deterministic perturbations
/// of relative size `scale` in every coordinate direction and along a few
/// mixed directions.
bool is_local_minimum(const TrueLoss& loss, const Vector& x, double scale = 1e-3);

}  // namespace masa

#endif  // MASA_CORE_HPP
