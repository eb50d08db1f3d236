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

#include "masa/surveillance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace masa {

TargetTrajectory::TargetTrajectory(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.empty()) {
    throw ParameterError("target trajectory needs at least one waypoint");
  }
  for (std::size_t w = 1; w < waypoints_.size(); ++w) {
    if (!(waypoints_[w].time > waypoints_[w - 1].time)) {
      throw ParameterError("target waypoint times must be strictly increasing");
    }
  }
}

Point2 TargetTrajectory::at(double time) const {
  if (time <= waypoints_.front().time) {
    return waypoints_.front().position;
  }
  if (time >= waypoints_.back().time) {
    return waypoints_.back().position;
  }
  auto next = std::upper_bound(waypoints_.begin(), waypoints_.end(), time,
                               [](double t, const Waypoint& w) { return t < w.time; });
  const Waypoint& b = *next;
  const Waypoint& a = *(next - 1);
  const double s = (time - a.time) / (b.time - a.time);
  return (1.0 - s) * a.position + s * b.position;
}

namespace {

BlockPartition agent_partition(const SurveillanceSpec& spec) {
  if (spec.agent_positions.empty()) {
    throw ParameterError("surveillance: need at least one agent");
  }
  if (spec.block_dim != 1 && spec.block_dim != 2) {
    throw ParameterError("surveillance: block_dim must be 1 (heading) or 2 (heading, speed)");
  }
  std::vector<std::size_t> sizes(spec.agent_positions.size(), spec.block_dim);
  return make_partition(sizes);
}

}  // namespace

SurveillanceScenario::SurveillanceScenario(SurveillanceSpec spec)
    : spec_(std::move(spec)), partition_(agent_partition(spec_)) {
  if (spec_.initial_headings.empty()) {
    spec_.initial_headings.assign(num_agents(), 0.0);
  }
  if (spec_.initial_headings.size() != num_agents()) {
    throw DimensionError("surveillance: one initial heading per agent required");
  }
  if (!(spec_.epsilon > 0.0)) {
    throw ParameterError("surveillance: epsilon must be positive, otherwise an undetected target has singular "
                         "information");
  }
  const Eigen::Matrix2d& r = spec_.measurement_cov;
  if (!r.allFinite() || std::abs(r(0, 1) - r(1, 0)) > 1e-12 * (1.0 + r.cwiseAbs().maxCoeff()) ||
      Eigen::LLT<Eigen::Matrix2d>(r).info() != Eigen::Success) {
    throw ParameterError("surveillance: measurement covariance must be symmetric positive definite");
  }
  if (!(spec_.detection_radius > 0.0) || !(spec_.agent_speed > 0.0) || !(spec_.time_step > 0.0) ||
      !(spec_.max_speed > 0.0) || !(spec_.min_range > 0.0) || !(spec_.position_noise >= 0.0)) {
    throw ParameterError("surveillance: radius, speeds, time step and minimum range must be positive");
  }
}

ParamVec SurveillanceScenario::initial_decision() const {
  Vector theta(static_cast<Eigen::Index>(partition_.dim()));
  for (std::size_t i = 0; i < num_agents(); ++i) {
    const auto off = static_cast<Eigen::Index>(partition_.offset(i));
    theta[off] = spec_.initial_headings[i];
    if (spec_.block_dim == 2) {
      theta[off + 1] = spec_.agent_speed;
    }
  }
  return ParamVec(std::move(theta));
}

std::vector<Point2> SurveillanceScenario::move(const std::vector<Point2>& positions, const Vector& theta) const {
  if (positions.size() != num_agents() || static_cast<std::size_t>(theta.size()) != partition_.dim()) {
    throw DimensionError("surveillance: positions or decision vector have the wrong size");
  }
  std::vector<Point2> out(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto off = static_cast<Eigen::Index>(partition_.offset(i));
    const double heading = theta[off];
    const double speed = spec_.block_dim == 2 ? std::clamp(theta[off + 1], 0.0, spec_.max_speed) : spec_.agent_speed;
    out[i] = positions[i] + speed * spec_.time_step * Point2(std::cos(heading), std::sin(heading));
  }
  return out;
}

Eigen::Matrix2d SurveillanceScenario::fisher_information(const std::vector<Point2>& post_positions,
                                                         const Point2& target) const {
  const Eigen::Matrix2d r_inv = spec_.measurement_cov.inverse();
  Eigen::Matrix2d info = spec_.epsilon * Eigen::Matrix2d::Identity();
  for (const Point2& q : post_positions) {
    const Point2 d = target - q;
    const double dist = d.norm();
    if (dist > spec_.detection_radius) {
      continue;
    }
    const Point2 u = dist > 0.0 ? Point2(d / dist) : Point2(1.0, 0.0);
    const double range = std::max(dist, spec_.min_range);
    // Jacobian of (range, bearing) with respect to the target position.
    Eigen::Matrix2d h;
    h << u.x(), u.y(), -u.y() / range, u.x() / range;
    info += h.transpose() * r_inv * h;
  }
  return info;
}

double SurveillanceScenario::loss_with(std::uint64_t k, const std::vector<Point2>& positions, const Vector& theta,
                                       RngStream* rng) const {
  const std::vector<Point2> post = move(positions, theta);
  const double time = static_cast<double>(k + 1) * spec_.time_step;
  double total = 0.0;
  for (std::size_t j = 0; j < num_targets(); ++j) {
    Point2 y = target_position(j, time);
    if (rng != nullptr && spec_.position_noise > 0.0) {
      const double nx = rng->normal();
      const double ny = rng->normal();
      y += spec_.position_noise * Point2(nx, ny);
    }
    total -= std::log(fisher_information(post, y).determinant());
  }
  return total;
}

double SurveillanceScenario::loss(std::uint64_t k, const std::vector<Point2>& positions, const Vector& theta) const {
  return loss_with(k, positions, theta, nullptr);
}

double SurveillanceScenario::noisy_loss(std::uint64_t k, const std::vector<Point2>& positions, const Vector& theta,
                                        RngStream& rng) const {
  return loss_with(k, positions, theta, &rng);
}

CyclicProblem SurveillanceScenario::problem_at(std::uint64_t k, const std::vector<Point2>& positions) const {
  if (positions.size() != num_agents()) {
    throw DimensionError("surveillance: one position per agent required");
  }
  const SurveillanceScenario* self = this;
  LossOracle oracle = [self, k, positions](const Vector& theta, RngStream& rng) {
    return self->noisy_loss(k, positions, theta, rng);
  };
  CyclicProblem problem(partition_, std::move(oracle));
  problem.with_true_loss([self, k, positions](const Vector& theta) { return self->loss(k, positions, theta); });
  return problem;
}

SurveillanceScenario make_surveillance(SurveillanceSpec spec) { return SurveillanceScenario(std::move(spec)); }

ParamVec local_estimate_vector(const BlockPartition& partition, std::size_t i, const Vector& own,
                               const std::vector<std::optional<Vector>>& peers) {
  if (peers.size() != partition.num_blocks()) {
    throw CommunicationError("agent " + std::to_string(i) + " expected " + std::to_string(partition.num_blocks()) +
                             " peer slots, got " + std::to_string(peers.size()));
  }
  if (static_cast<std::size_t>(own.size()) != partition.size(i)) {
    throw DimensionError("own block has the wrong length");
  }
  Vector view(static_cast<Eigen::Index>(partition.dim()));
  for (std::size_t l = 0; l < partition.num_blocks(); ++l) {
    const auto off = static_cast<Eigen::Index>(partition.offset(l));
    const auto len = static_cast<Eigen::Index>(partition.size(l));
    if (l == i) {
      view.segment(off, len) = own;
      continue;
    }
    if (!peers[l]) {
      throw CommunicationError("agent " + std::to_string(i) + " has no estimate of agent " + std::to_string(l));
    }
    if (peers[l]->size() != len) {
      throw DimensionError("peer estimate of agent " + std::to_string(l) + " has the wrong length");
    }
    view.segment(off, len) = *peers[l];
  }
  return ParamVec(std::move(view));
}

AgentLocalLoss::AgentLocalLoss(const SurveillanceScenario& scenario, std::uint64_t k, std::vector<Point2> positions,
                               std::size_t agent, ParamVec frozen_view)
    : scenario_(&scenario), k_(k), positions_(std::move(positions)), agent_(agent), frozen_(std::move(frozen_view)) {
  if (frozen_.size() != scenario.partition().dim()) {
    throw DimensionError("agent view has the wrong length");
  }
  scenario.partition().size(agent);
}

Vector AgentLocalLoss::assemble(const Vector& view) const {
  const BlockPartition& part = scenario_->partition();
  Vector theta = frozen_.values();
  theta.segment(static_cast<Eigen::Index>(part.offset(agent_)), static_cast<Eigen::Index>(part.size(agent_))) =
      subvector(view, part, agent_);
  return theta;
}

double AgentLocalLoss::operator()(const Vector& view) const { return scenario_->loss(k_, positions_, assemble(view)); }

double AgentLocalLoss::operator()(const Vector& view, RngStream& rng) const {
  return scenario_->noisy_loss(k_, positions_, assemble(view), rng);
}

TrackingResult track_gcsa(const SurveillanceScenario& scenario, const BlockEstimator& estimator, double gain,
                          std::size_t steps, std::uint64_t seed) {
  if (!(gain > 0.0)) {
    throw ParameterError("track_gcsa: gain must be positive");
  }
  const RngStream run(seed);
  MeasurementCounter counter;
  TrackingResult out;
  std::vector<Point2> positions = scenario.spec().agent_positions;
  SingleState state{scenario.initial_decision(), 0};
  out.decisions.push_back(state.theta);
  out.positions.push_back(positions);
  out.trace.records.push_back({0, gain, std::nullopt, std::nullopt,
                               scenario.loss(0, positions, state.theta.values()), counter});
  double sum = 0.0;
  for (std::size_t step = 0; step < steps; ++step) {
    const CyclicProblem problem = scenario.problem_at(state.k, positions);
    const std::uint64_t k = state.k;
    state = gcsa_iteration(state, problem, estimator, gain, run, counter);
    const double committed = scenario.loss(k, positions, state.theta.values());
    sum += committed;
    positions = scenario.move(positions, state.theta.values());
    out.decisions.push_back(state.theta);
    out.positions.push_back(positions);
    out.trace.records.push_back({state.k, gain, std::nullopt, std::nullopt, committed, counter});
  }
  out.trace.final_theta = state.theta;
  out.mean_loss = steps > 0 ? sum / static_cast<double>(steps) : 0.0;
  return out;
}

TrackingResult track_frozen(const SurveillanceScenario& scenario, std::size_t steps) {
  TrackingResult out;
  std::vector<Point2> positions = scenario.spec().agent_positions;
  const ParamVec theta = scenario.initial_decision();
  out.decisions.push_back(theta);
  out.positions.push_back(positions);
  out.trace.records.push_back({0, 0.0, std::nullopt, std::nullopt, scenario.loss(0, positions, theta.values()), {}});
  double sum = 0.0;
  for (std::size_t step = 0; step < steps; ++step) {
    const double committed = scenario.loss(step, positions, theta.values());
    sum += committed;
    positions = scenario.move(positions, theta.values());
    out.decisions.push_back(theta);
    out.positions.push_back(positions);
    out.trace.records.push_back({step + 1, 0.0, std::nullopt, std::nullopt, committed, {}});
  }
  out.trace.final_theta = theta;
  out.mean_loss = steps > 0 ? sum / static_cast<double>(steps) : 0.0;
  return out;
}

SurveillanceSpec default_surveillance_spec() {
  SurveillanceSpec spec;
  spec.agent_positions = {Point2(0.0, 0.0), Point2(10.0, 0.0), Point2(5.0, 8.0)};
  spec.initial_headings = {std::numbers::pi, -std::numbers::pi / 2.0, std::numbers::pi / 2.0};
  spec.agent_speed = 1.0;
  spec.time_step = 1.0;
  spec.targets = {
      TargetTrajectory({{0.0, Point2(2.0, 2.0)}, {250.0, Point2(120.0, 60.0)}, {500.0, Point2(60.0, 180.0)}}),
      TargetTrajectory({{0.0, Point2(8.0, 3.0)}, {200.0, Point2(-60.0, 80.0)}, {500.0, Point2(40.0, -90.0)}}),
  };
  spec.detection_radius = 30.0;
  spec.measurement_cov << 1.0, 0.0, 0.0, 0.01;
  spec.epsilon = 1e-3;
  spec.position_noise = 0.5;
  spec.min_range = 3.0;
  return spec;
}

}  // namespace masa
