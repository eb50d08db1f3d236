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

#ifndef MASA_SURVEILLANCE_HPP
#define MASA_SURVEILLANCE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "masa/algorithms.hpp"
#include "masa/core.hpp"
#include "masa/estimators.hpp"

namespace masa {

using Point2 = Eigen::Vector2d;

struct Waypoint {
  double time = 0.0;
  Point2 position = Point2::Zero();
};

/// Piecewise-linear target path through time-stamped waypoints; held
/// constant before the first and after the last waypoint.
class TargetTrajectory {
 public:
  explicit TargetTrajectory(std::vector<Waypoint> waypoints);
  Point2 at(double time) const;
  const std::vector<Waypoint>& waypoints() const { return waypoints_; }

 private:
  std::vector<Waypoint> waypoints_;
};

/// Planar multi-agent, multi-target surveillance.
///
/// Agents move at constant speed along their heading angle (block size 1) or
/// choose [heading, speed] (block size 2, speed clamped to [0, max_speed]).
/// Each agent within `detection_radius` of a target contributes the
/// range-bearing measurement information H^T R^-1 H of the post-action
/// geometry; the loss at time step k is -sum_j log det(eps I + sum_a H^T R^-1 H).
struct SurveillanceSpec {
  std::vector<Point2> agent_positions;
  std::vector<double> initial_headings;
  double agent_speed = 1.0;
  double max_speed = 2.0;
  double time_step = 1.0;
  std::size_t block_dim = 1;
  std::vector<TargetTrajectory> targets;
  double detection_radius = 10.0;
  Eigen::Matrix2d measurement_cov = Eigen::Matrix2d::Identity();
  double epsilon = 1e-3;
  /// Standard deviation of the perceived target position in noisy loss
  /// evaluations.
  double position_noise = 0.0;
  /// Ranges are floored here so the bearing information stays bounded.
  double min_range = 0.5;
};

class SurveillanceScenario {
 public:
  explicit SurveillanceScenario(SurveillanceSpec spec);

  std::size_t num_agents() const { return spec_.agent_positions.size(); }
  std::size_t num_targets() const { return spec_.targets.size(); }
  const SurveillanceSpec& spec() const { return spec_; }
  const BlockPartition& partition() const { return partition_; }

  /// Initial decision vector: headings (and speeds when block_dim is 2).
  ParamVec initial_decision() const;

  Point2 target_position(std::size_t j, double time) const { return spec_.targets.at(j).at(time); }
  /// Positions after one time step under decision theta.
  std::vector<Point2> move(const std::vector<Point2>& positions, const Vector& theta) const;
  /// Information about a target at `target` from agents at `post_positions`.
  Eigen::Matrix2d fisher_information(const std::vector<Point2>& post_positions, const Point2& target) const;

  /// Noise-free loss of decision theta taken at time step k from `positions`.
  double loss(std::uint64_t k, const std::vector<Point2>& positions, const Vector& theta) const;
  /// One noisy measurement: target positions are perceived with Gaussian error.
  double noisy_loss(std::uint64_t k, const std::vector<Point2>& positions, const Vector& theta,
                    RngStream& rng) const;

  /// The cyclic problem faced at time step k. No optimum: the loss moves
  /// with the targets. The returned problem refers to this scenario, which
  /// must outlive it.
  CyclicProblem problem_at(std::uint64_t k, const std::vector<Point2>& positions) const;

 private:
  double loss_with(std::uint64_t k, const std::vector<Point2>& positions, const Vector& theta,
                   RngStream* rng) const;

  SurveillanceSpec spec_;
  BlockPartition partition_;
};

SurveillanceScenario make_surveillance(SurveillanceSpec spec);

/// Agent i's view of the decision vector: its own live block and the latest
/// peer blocks it collected. Throws CommunicationError when a peer block is
/// missing.
ParamVec local_estimate_vector(const BlockPartition& partition, std::size_t i, const Vector& own,
                               const std::vector<std::optional<Vector>>& peers);

/// Loss seen by agent i with peer blocks frozen at collected values. Only
/// block i of the argument is read.
class AgentLocalLoss {
 public:
  AgentLocalLoss(const SurveillanceScenario& scenario, std::uint64_t k, std::vector<Point2> positions,
                 std::size_t agent, ParamVec frozen_view);

  double operator()(const Vector& view) const;
  double operator()(const Vector& view, RngStream& rng) const;

 private:
  Vector assemble(const Vector& view) const;

  const SurveillanceScenario* scenario_;
  std::uint64_t k_;
  std::vector<Point2> positions_;
  std::size_t agent_;
  ParamVec frozen_;
};

struct TrackingResult {
  /// One record per time step plus the initial one; `loss` is the
  /// noise-free loss of the committed decision.
  RunTrace trace;
  std::vector<ParamVec> decisions;
  std::vector<std::vector<Point2>> positions;
  double mean_loss = 0.0;
};

/// Each time step runs one GCSA sweep (agents 1..A) on the current loss with
/// a constant gain, warm-started from the previous decision, then moves the
/// agents.
TrackingResult track_gcsa(const SurveillanceScenario& scenario, const BlockEstimator& estimator, double gain,
                          std::size_t steps, std::uint64_t seed);

/// Baseline: agents keep their initial decision for every step.
TrackingResult track_frozen(const SurveillanceScenario& scenario, std::size_t steps);

/// The A=3, T=2 planar scenario used by the tracking acceptance check and the
/// example configs.
SurveillanceSpec default_surveillance_spec();

}  // namespace masa

#endif  // MASA_SURVEILLANCE_HPP
