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

#ifndef MASA_RNG_HPP
#define MASA_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <random>

namespace masa {

/// SplitMix64 finalizer applied to (seed, tag). Used to derive independent
/// substreams without touching the parent's engine state.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

/// A seeded random stream. Streams are cheap to create; the algorithms derive
/// one per (seed, iteration, agent) so results never depend on the order in
/// which agents happen to be processed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Child stream that depends only on this stream's seed and `tag`.
  RngStream derive(std::uint64_t tag) const { return RngStream(mix_seed(seed_, tag)); }

  double normal();
  double uniform();
  /// Symmetric Bernoulli draw: -1 or +1 with equal probability.
  double rademacher();
  bool bernoulli(double p);
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace masa

#endif  // MASA_RNG_HPP
