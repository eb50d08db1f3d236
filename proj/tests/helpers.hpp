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

#ifndef MASA_TESTS_HELPERS_HPP
#define MASA_TESTS_HELPERS_HPP

#include <vector>

#include "masa/core.hpp"

namespace masa::test {

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index j = 0;
  for (double x : values) v[j++] = x;
  return v;
}

/// Noise-free L = 1/2 ||theta||^2 with both oracles.
inline CyclicProblem half_norm(BlockPartition partition) {
  return CyclicProblem(
             std::move(partition), [](const Vector& t, RngStream&) { return 0.5 * t.squaredNorm(); },
             [](const Vector& t, RngStream&) { return Vector(t); })
      .with_true_loss([](const Vector& t) { return 0.5 * t.squaredNorm(); });
}

/// Noise-free L = x^T Q x / 2 + b^T x with Q symmetric.
inline CyclicProblem quadratic_form(BlockPartition partition, Matrix q, Vector b) {
  auto loss = [q, b](const Vector& t) { return 0.5 * t.dot(q * t) + b.dot(t); };
  return CyclicProblem(
      std::move(partition), [loss](const Vector& t, RngStream&) { return loss(t); },
      [q, b](const Vector& t, RngStream&) { return Vector(q * t + b); });
}

}  // namespace masa::test

#endif  // MASA_TESTS_HELPERS_HPP
