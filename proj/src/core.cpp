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

#include "masa/core.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <string>
#include <utility>

namespace masa {

namespace {

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& warning_handler() {
  static WarningHandler handler = [](std::string_view msg) { std::cerr << "masa: warning: " << msg << '\n'; };
  return handler;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex());
  return std::exchange(warning_handler(), std::move(handler));
}

void warn(std::string_view message) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) {
    warning_handler()(message);
  }
}

bool all_finite(const Vector& v) { return v.allFinite(); }

ParamVec::ParamVec(Vector values) : values_(std::move(values)) {
  if (values_.size() == 0) {
    throw DimensionError("ParamVec: length must be at least 1");
  }
  if (!values_.allFinite()) {
    throw NonFiniteError("ParamVec: non-finite entry");
  }
}

ParamVec::ParamVec(std::initializer_list<double> values)
    : ParamVec(Eigen::Map<const Vector>(values.begin(), static_cast<Eigen::Index>(values.size()))) {}

// --- BlockPartition ---------------------------------------------------------

BlockPartition::BlockPartition(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  offsets_.reserve(sizes_.size() + 1);
  offsets_.push_back(0);
  for (std::size_t s : sizes_) {
    offsets_.push_back(offsets_.back() + s);
  }
}

BlockPartition BlockPartition::from_sizes(std::span<const std::size_t> block_sizes) {
  if (block_sizes.empty()) {
    throw PartitionError("partition needs at least one block");
  }
  for (std::size_t i = 0; i < block_sizes.size(); ++i) {
    if (block_sizes[i] == 0) {
      throw PartitionError("block " + std::to_string(i) + " is empty");
    }
  }
  return BlockPartition({block_sizes.begin(), block_sizes.end()});
}

BlockPartition BlockPartition::from_index_sets(const std::vector<std::vector<std::size_t>>& sets) {
  if (sets.empty()) {
    throw PartitionError("partition needs at least one block");
  }
  std::size_t total = 0;
  for (const auto& s : sets) {
    total += s.size();
  }
  std::vector<int> owner(total, -1);
  std::vector<std::size_t> sizes;
  std::size_t next = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& s = sets[i];
    if (s.empty()) {
      throw PartitionError("block " + std::to_string(i) + " is empty");
    }
    for (std::size_t j : s) {
      if (j >= total) {
        throw PartitionError("coordinate " + std::to_string(j) + " outside {0.." + std::to_string(total - 1) +
                             "}: blocks overlap or leave gaps");
      }
      if (owner[j] >= 0) {
        throw PartitionError("coordinate " + std::to_string(j) + " appears in blocks " +
                             std::to_string(owner[j]) + " and " + std::to_string(i) +
                             "; only disjoint partitions are supported");
      }
      owner[j] = static_cast<int>(i);
    }
    for (std::size_t t = 0; t < s.size(); ++t) {
      if (s[t] != next + t) {
        throw PartitionError("block " + std::to_string(i) + " is not the contiguous range following block " +
                             std::to_string(i == 0 ? 0 : i - 1));
      }
    }
    next += s.size();
    sizes.push_back(s.size());
  }
  return BlockPartition(std::move(sizes));
}

void BlockPartition::check_block(std::size_t i) const {
  if (i >= sizes_.size()) {
    throw IndexError("block index " + std::to_string(i) + " out of range [0, " + std::to_string(sizes_.size()) +
                     ")");
  }
}

std::size_t BlockPartition::offset(std::size_t i) const {
  check_block(i);
  return offsets_[i];
}

std::size_t BlockPartition::size(std::size_t i) const {
  check_block(i);
  return sizes_[i];
}

std::vector<std::size_t> BlockPartition::indices(std::size_t i) const {
  check_block(i);
  std::vector<std::size_t> out(sizes_[i]);
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = offsets_[i] + t;
  }
  return out;
}

std::size_t BlockPartition::block_of(std::size_t j) const {
  if (j >= dim()) {
    throw IndexError("coordinate " + std::to_string(j) + " out of range");
  }
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), j);
  return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

bool BlockPartition::contains(std::size_t i, std::size_t j) const {
  check_block(i);
  return j >= offsets_[i] && j < offsets_[i + 1];
}

BlockPartition make_partition(std::span<const std::size_t> block_sizes) {
  return BlockPartition::from_sizes(block_sizes);
}

BlockPartition make_partition(std::initializer_list<std::size_t> block_sizes) {
  return BlockPartition::from_sizes(std::span(block_sizes.begin(), block_sizes.size()));
}

Vector subvector(const Vector& theta, const BlockPartition& partition, std::size_t i) {
  if (static_cast<std::size_t>(theta.size()) != partition.dim()) {
    throw DimensionError("subvector: vector length " + std::to_string(theta.size()) + " != partition dim " +
                         std::to_string(partition.dim()));
  }
  return theta.segment(static_cast<Eigen::Index>(partition.offset(i)), static_cast<Eigen::Index>(partition.size(i)));
}

Vector subvector(const ParamVec& theta, const BlockPartition& partition, std::size_t i) {
  return subvector(theta.values(), partition, i);
}

ParamVec with_subvector(const ParamVec& theta, const BlockPartition& partition, std::size_t i,
                        const Vector& block) {
  if (static_cast<std::size_t>(block.size()) != partition.size(i) || theta.size() != partition.dim()) {
    throw DimensionError("with_subvector: size mismatch");
  }
  Vector out = theta.values();
  out.segment(static_cast<Eigen::Index>(partition.offset(i)), block.size()) = block;
  return ParamVec(std::move(out));
}

// --- GainSchedule -----------------------------------------------------------

GainSchedule GainSchedule::constant(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw ParameterError("gain: a must be positive and finite");
  }
  return {Kind::constant, a, 0.0, 0.0};
}

GainSchedule GainSchedule::polynomial_decay(double a, double stability, double alpha) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw ParameterError("gain: a must be positive and finite");
  }
  if (!(stability >= 0.0) || !std::isfinite(stability)) {
    throw ParameterError("gain: stability offset must be nonnegative");
  }
  if (!(alpha > 0.5 && alpha <= 1.0)) {
    throw ParameterError("gain: decay exponent alpha must lie in (0.5, 1]");
  }
  return {Kind::polynomial_decay, a, stability, alpha};
}

double GainSchedule::at(std::uint64_t k) const {
  if (kind_ == Kind::constant) {
    return a_;
  }
  return a_ / std::pow(static_cast<double>(k) + 1.0 + stability_, alpha_);
}

// --- CyclicProblem ----------------------------------------------------------

CyclicProblem::CyclicProblem(BlockPartition partition, LossOracle loss, GradOracle grad)
    : partition_(std::move(partition)), loss_(std::move(loss)), grad_(std::move(grad)) {
  if (!loss_ && !grad_) {
    throw CapabilityError("CyclicProblem needs a loss or a gradient oracle");
  }
}

CyclicProblem& CyclicProblem::with_true_loss(TrueLoss loss) {
  true_loss_ = std::move(loss);
  return *this;
}

CyclicProblem& CyclicProblem::with_true_optimum(ParamVec optimum) {
  check_dim(optimum.values());
  if (true_loss_ && !is_local_minimum(true_loss_, optimum.values())) {
    throw ParameterError("CyclicProblem: declared optimum is not a minimizer of the true loss");
  }
  optimum_ = std::move(optimum);
  return *this;
}

void CyclicProblem::check_dim(const Vector& theta) const {
  if (static_cast<std::size_t>(theta.size()) != dim()) {
    throw DimensionError("CyclicProblem: expected length " + std::to_string(dim()) + ", got " +
                         std::to_string(theta.size()));
  }
}

double CyclicProblem::measure_loss(const Vector& theta, RngStream& rng, MeasurementCounter& counter) const {
  if (!loss_) {
    throw CapabilityError("problem has no loss oracle");
  }
  check_dim(theta);
  ++counter.loss_evals;
  return loss_(theta, rng);
}

Vector CyclicProblem::measure_gradient(const Vector& theta, RngStream& rng, MeasurementCounter& counter) const {
  if (!grad_) {
    throw CapabilityError("problem has no gradient oracle");
  }
  check_dim(theta);
  ++counter.grad_evals;
  Vector g = grad_(theta, rng);
  if (static_cast<std::size_t>(g.size()) != dim()) {
    throw DimensionError("gradient oracle returned wrong length");
  }
  return g;
}

std::optional<double> CyclicProblem::true_loss(const Vector& theta) const {
  if (!true_loss_) {
    return std::nullopt;
  }
  check_dim(theta);
  return true_loss_(theta);
}

// --- DistributedProblem -----------------------------------------------------

DistributedProblem::DistributedProblem(std::size_t dim, std::vector<GradOracle> local_grads)
    : dim_(dim), grads_(std::move(local_grads)) {
  if (dim_ == 0) {
    throw DimensionError("DistributedProblem: dim must be at least 1");
  }
  if (grads_.empty()) {
    throw ParameterError("DistributedProblem: needs at least one agent");
  }
  for (const auto& g : grads_) {
    if (!g) {
      throw CapabilityError("DistributedProblem: every agent needs a gradient oracle");
    }
  }
}

DistributedProblem& DistributedProblem::with_local_losses(std::vector<LossOracle> losses) {
  if (losses.size() != grads_.size()) {
    throw ParameterError("DistributedProblem: one loss oracle per agent required");
  }
  losses_ = std::move(losses);
  return *this;
}

DistributedProblem& DistributedProblem::with_local_true_losses(std::vector<TrueLoss> losses) {
  if (losses.size() != grads_.size()) {
    throw ParameterError("DistributedProblem: one true loss per agent required");
  }
  true_losses_ = std::move(losses);
  return *this;
}

DistributedProblem& DistributedProblem::with_true_optimum(ParamVec optimum) {
  check_dim(optimum.values());
  if (!true_losses_.empty()) {
    TrueLoss total = [this](const Vector& x) { return *true_loss(x); };
    if (!is_local_minimum(total, optimum.values())) {
      throw ParameterError("DistributedProblem: declared optimum is not a minimizer of sum_i L_i");
    }
  }
  optimum_ = std::move(optimum);
  return *this;
}

void DistributedProblem::check_agent(std::size_t i) const {
  if (i >= grads_.size()) {
    throw IndexError("agent index " + std::to_string(i) + " out of range [0, " + std::to_string(grads_.size()) +
                     ")");
  }
}

void DistributedProblem::check_dim(const Vector& theta) const {
  if (static_cast<std::size_t>(theta.size()) != dim_) {
    throw DimensionError("DistributedProblem: expected length " + std::to_string(dim_) + ", got " +
                         std::to_string(theta.size()));
  }
}

Vector DistributedProblem::measure_local_gradient(std::size_t i, const Vector& theta, RngStream& rng,
                                                  MeasurementCounter& counter) const {
  check_agent(i);
  check_dim(theta);
  ++counter.grad_evals;
  Vector g = grads_[i](theta, rng);
  if (static_cast<std::size_t>(g.size()) != dim_) {
    throw DimensionError("local gradient oracle returned wrong length");
  }
  return g;
}

double DistributedProblem::measure_local_loss(std::size_t i, const Vector& theta, RngStream& rng,
                                              MeasurementCounter& counter) const {
  check_agent(i);
  if (losses_.empty()) {
    throw CapabilityError("problem has no local loss oracles");
  }
  check_dim(theta);
  ++counter.loss_evals;
  return losses_[i](theta, rng);
}

std::optional<double> DistributedProblem::true_loss(const Vector& theta) const {
  if (true_losses_.empty()) {
    return std::nullopt;
  }
  check_dim(theta);
  double total = 0.0;
  for (const auto& l : true_losses_) {
    total += l(theta);
  }
  return total;
}

bool is_local_minimum(const TrueLoss& loss, const Vector& x, double scale) {
  const double base = loss(x);
  const double tol = 1e-12 * (1.0 + std::abs(base));
  auto no_better = [&](const Vector& y) { return loss(y) >= base - tol; };
  const Eigen::Index p = x.size();
  for (Eigen::Index j = 0; j < p; ++j) {
    const double h = scale * (1.0 + std::abs(x[j]));
    Vector y = x;
    y[j] += h;
    if (!no_better(y)) {
      return false;
    }
    y[j] = x[j] - h;
    if (!no_better(y)) {
      return false;
    }
  }
  // A few fixed mixed directions catch saddles the axis probes miss.
  for (int d = 1; d <= 3; ++d) {
    Vector y = x;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double sign = ((j * d) % 3 == 0) ? 1.0 : -1.0;
      y[j] += sign * scale * (1.0 + std::abs(x[j]));
    }
    if (!no_better(y)) {
      return false;
    }
  }
  return true;
}

}  // namespace masa
