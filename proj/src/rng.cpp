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

#include "masa/rng.hpp"

#include "masa/errors.hpp"

namespace masa {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed ^ (tag + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed, 0)) {}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::rademacher() { return (engine_() >> 63) != 0U ? 1.0 : -1.0; }

bool RngStream::bernoulli(double p) { return uniform() < p; }

std::size_t RngStream::index(std::size_t n) {
  if (n == 0) {
    throw ParameterError("RngStream::index: empty range");
  }
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

}  // namespace masa
