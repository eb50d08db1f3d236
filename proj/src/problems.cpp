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

#include "masa/problems.hpp"

#include <cmath>
#include <string>

namespace masa {

// --- separable quadratic ----------------------------------------------------

SeparableQuadratic::SeparableQuadratic(BlockPartition partition, std::vector<Vector> block_optima,
                                       std::vector<double> curvatures, double noise_sigma) {
  const std::size_t blocks = partition.num_blocks();
  if (block_optima.empty()) {
    for (std::size_t i = 0; i < blocks; ++i) {
      block_optima.push_back(Vector::Zero(static_cast<Eigen::Index>(partition.size(i))));
    }
  }
  if (block_optima.size() != blocks || curvatures.size() != blocks) {
    throw DimensionError("separable quadratic: need one optimum and one curvature per block");
  }
  for (std::size_t i = 0; i < blocks; ++i) {
    if (static_cast<std::size_t>(block_optima[i].size()) != partition.size(i)) {
      throw DimensionError("separable quadratic: optimum of block " + std::to_string(i) + " has wrong length");
    }
    if (!block_optima[i].allFinite()) {
      throw NonFiniteError("separable quadratic: non-finite optimum");
    }
    if (!(curvatures[i] > 0.0) || !std::isfinite(curvatures[i])) {
      throw ParameterError("separable quadratic: curvature of block " + std::to_string(i) + " must be positive");
    }
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ParameterError("separable quadratic: noise sigma must be nonnegative");
  }
  data_ = std::make_shared<const Data>(
      Data{std::move(partition), std::move(block_optima), std::move(curvatures), noise_sigma});
}

ParamVec SeparableQuadratic::true_optimum() const {
  Vector out(static_cast<Eigen::Index>(partition().dim()));
  for (std::size_t i = 0; i < partition().num_blocks(); ++i) {
    out.segment(static_cast<Eigen::Index>(partition().offset(i)), data_->optima[i].size()) = data_->optima[i];
  }
  return ParamVec(std::move(out));
}

double SeparableQuadratic::block_loss(std::size_t i, const Vector& theta) const {
  return data_->curvatures.at(i) * (subvector(theta, partition(), i) - data_->optima[i]).squaredNorm();
}

double SeparableQuadratic::loss(const Vector& theta) const {
  double total = 0.0;
  for (std::size_t i = 0; i < partition().num_blocks(); ++i) {
    total += block_loss(i, theta);
  }
  return total;
}

Vector SeparableQuadratic::block_gradient(std::size_t i, const Vector& theta) const {
  Vector g = Vector::Zero(theta.size());
  g.segment(static_cast<Eigen::Index>(partition().offset(i)), data_->optima.at(i).size()) =
      2.0 * data_->curvatures[i] * (subvector(theta, partition(), i) - data_->optima[i]);
  return g;
}

Vector SeparableQuadratic::gradient(const Vector& theta) const {
  Vector g(theta.size());
  for (std::size_t i = 0; i < partition().num_blocks(); ++i) {
    g.segment(static_cast<Eigen::Index>(partition().offset(i)), data_->optima[i].size()) =
        2.0 * data_->curvatures[i] * (subvector(theta, partition(), i) - data_->optima[i]);
  }
  return g;
}

Vector SeparableQuadratic::block_noise(std::size_t b, RngStream& rng) const {
  const auto len = static_cast<Eigen::Index>(partition().size(b));
  Vector noise(len);
  RngStream sub = rng.derive(b);
  for (Eigen::Index t = 0; t < len; ++t) {
    noise[t] = data_->sigma * sub.normal();
  }
  return noise;
}

CyclicProblem SeparableQuadratic::cyclic_view() const {
  const SeparableQuadratic self = *this;
  LossOracle loss = [self](const Vector& theta, RngStream& rng) {
    const double value = self.loss(theta);
    return self.noise_sigma() > 0.0 ? value + self.noise_sigma() * rng.normal() : value;
  };
  GradOracle grad = [self](const Vector& theta, RngStream& rng) {
    Vector g = self.gradient(theta);
    if (self.noise_sigma() > 0.0) {
      for (std::size_t b = 0; b < self.partition().num_blocks(); ++b) {
        g.segment(static_cast<Eigen::Index>(self.partition().offset(b)),
                  static_cast<Eigen::Index>(self.partition().size(b))) += self.block_noise(b, rng);
      }
    }
    return g;
  };
  CyclicProblem problem(partition(), std::move(loss), std::move(grad));
  problem.with_true_loss([self](const Vector& theta) { return self.loss(theta); });
  problem.with_true_optimum(true_optimum());
  return problem;
}

DistributedProblem SeparableQuadratic::distributed_view() const {
  const SeparableQuadratic self = *this;
  const std::size_t blocks = partition().num_blocks();
  std::vector<GradOracle> grads;
  std::vector<LossOracle> losses;
  std::vector<TrueLoss> true_losses;
  for (std::size_t i = 0; i < blocks; ++i) {
    grads.emplace_back([self, i](const Vector& theta, RngStream& rng) {
      Vector g = self.block_gradient(i, theta);
      if (self.noise_sigma() > 0.0) {
        g.segment(static_cast<Eigen::Index>(self.partition().offset(i)),
                  static_cast<Eigen::Index>(self.partition().size(i))) += self.block_noise(i, rng);
      }
      return g;
    });
    losses.emplace_back([self, i](const Vector& theta, RngStream& rng) {
      const double value = self.block_loss(i, theta);
      return self.noise_sigma() > 0.0 ? value + self.noise_sigma() * rng.normal() : value;
    });
    true_losses.emplace_back([self, i](const Vector& theta) { return self.block_loss(i, theta); });
  }
  DistributedProblem problem(partition().dim(), std::move(grads));
  problem.with_local_losses(std::move(losses));
  problem.with_local_true_losses(std::move(true_losses));
  problem.with_true_optimum(true_optimum());
  return problem;
}

Benchmark SeparableQuadratic::benchmark() const { return Benchmark{cyclic_view(), distributed_view()}; }

SeparableQuadratic make_separable_quadratic(BlockPartition partition, std::vector<Vector> block_optima,
                                            std::vector<double> block_curvatures, double noise_sigma) {
  return {std::move(partition), std::move(block_optima), std::move(block_curvatures), noise_sigma};
}

// --- regression field -------------------------------------------------------

FeatureMap polynomial_features(std::size_t degree) {
  return [degree](const Vector& s) {
    if (s.size() == 0) {
      throw DimensionError("polynomial features need a location coordinate");
    }
    Vector phi(static_cast<Eigen::Index>(degree + 1));
    double power = 1.0;
    for (Eigen::Index d = 0; d < phi.size(); ++d) {
      phi[d] = power;
      power *= s[0];
    }
    return phi;
  };
}

FeatureMap affine_features() {
  return [](const Vector& s) {
    Vector phi(s.size() + 1);
    phi[0] = 1.0;
    phi.tail(s.size()) = s;
    return phi;
  };
}

RegressionField::RegressionField(std::vector<Vector> locations, FeatureMap feature_map, ParamVec true_theta,
                                 std::vector<std::size_t> samples_per_agent, double noise_sigma,
                                 std::uint64_t seed) {
  const std::size_t agents = locations.size();
  if (agents == 0) {
    throw ParameterError("regression field: need at least one agent");
  }
  if (samples_per_agent.size() == 1 && agents > 1) {
    samples_per_agent.assign(agents, samples_per_agent.front());
  }
  if (samples_per_agent.size() != agents) {
    throw DimensionError("regression field: samples_per_agent must have one entry per agent");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ParameterError("regression field: noise sigma must be nonnegative");
  }
  const auto p = static_cast<Eigen::Index>(true_theta.size());
  std::vector<Vector> features;
  std::vector<std::vector<double>> observations;
  const RngStream root(seed);
  Matrix normal = Matrix::Zero(p, p);
  Vector rhs = Vector::Zero(p);
  for (std::size_t i = 0; i < agents; ++i) {
    if (samples_per_agent[i] == 0) {
      throw ParameterError("regression field: agent " + std::to_string(i) + " needs at least one sample");
    }
    Vector phi = feature_map(locations[i]);
    if (phi.size() != p) {
      throw DimensionError("regression field: feature vector of agent " + std::to_string(i) + " has length " +
                           std::to_string(phi.size()) + ", expected " + std::to_string(p));
    }
    RngStream rng = root.derive(i);
    const double mean = phi.dot(true_theta.values());
    std::vector<double> obs(samples_per_agent[i]);
    double avg = 0.0;
    for (double& r : obs) {
      r = noise_sigma > 0.0 ? mean + noise_sigma * rng.normal() : mean;
      avg += r;
    }
    avg /= static_cast<double>(obs.size());
    // grad of (1/N) sum (r - phi^T x)^2 vanishes at phi phi^T x = mean(r) phi
    normal += phi * phi.transpose();
    rhs += avg * phi;
    features.push_back(std::move(phi));
    observations.push_back(std::move(obs));
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(normal);
  const bool deficient = cod.rank() < p;
  if (deficient) {
    warn("regression field: stacked design is rank deficient (rank " + std::to_string(cod.rank()) + " < " +
         std::to_string(p) + "); using the pseudo-inverse solution");
  }
  Vector solution = cod.solve(rhs);
  data_ = std::make_shared<const Data>(Data{std::move(features), std::move(observations), std::move(true_theta),
                                            ParamVec(std::move(solution)), deficient});
}

double RegressionField::local_loss(std::size_t i, const Vector& theta) const {
  const Vector& phi = data_->features.at(i);
  const double pred = phi.dot(theta);
  double total = 0.0;
  for (double r : data_->observations[i]) {
    total += (r - pred) * (r - pred);
  }
  return total / static_cast<double>(data_->observations[i].size());
}

Vector RegressionField::local_full_gradient(std::size_t i, const Vector& theta) const {
  const Vector& phi = data_->features.at(i);
  const double pred = phi.dot(theta);
  double residual = 0.0;
  for (double r : data_->observations[i]) {
    residual += r - pred;
  }
  return (-2.0 * residual / static_cast<double>(data_->observations[i].size())) * phi;
}

Vector RegressionField::sample_gradient(std::size_t i, std::size_t sample, const Vector& theta) const {
  const Vector& phi = data_->features.at(i);
  return (-2.0 * (data_->observations[i].at(sample) - phi.dot(theta))) * phi;
}

DistributedProblem RegressionField::distributed_view() const {
  const RegressionField self = *this;
  std::vector<GradOracle> grads;
  std::vector<LossOracle> losses;
  std::vector<TrueLoss> true_losses;
  for (std::size_t i = 0; i < num_agents(); ++i) {
    const std::size_t n = data_->observations[i].size();
    grads.emplace_back([self, i, n](const Vector& theta, RngStream& rng) {
      return self.sample_gradient(i, rng.index(n), theta);
    });
    losses.emplace_back([self, i, n](const Vector& theta, RngStream& rng) {
      const double r = self.observations(i)[rng.index(n)];
      const double e = r - self.features(i).dot(theta);
      return e * e;
    });
    true_losses.emplace_back([self, i](const Vector& theta) { return self.local_loss(i, theta); });
  }
  DistributedProblem problem(dim(), std::move(grads));
  problem.with_local_losses(std::move(losses));
  problem.with_local_true_losses(std::move(true_losses));
  problem.with_true_optimum(normal_equations_solution());
  return problem;
}

Benchmark RegressionField::benchmark() const { return Benchmark{std::nullopt, distributed_view()}; }

RegressionField make_regression_field(std::vector<Vector> locations, const FeatureMap& feature_map,
                                      ParamVec true_theta, std::vector<std::size_t> samples_per_agent,
                                      double noise_sigma, std::uint64_t seed) {
  return {std::move(locations), feature_map, std::move(true_theta), std::move(samples_per_agent), noise_sigma,
          seed};
}

std::optional<ParamVec> true_optimum(const Benchmark& benchmark) { return benchmark.true_optimum(); }

}  // namespace masa
