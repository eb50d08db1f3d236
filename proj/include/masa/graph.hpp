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

#ifndef MASA_GRAPH_HPP
#define MASA_GRAPH_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <utility>
#include <vector>

#include "masa/core.hpp"

namespace masa {

/// Symmetric boolean adjacency without self-loops.
class Adjacency {
 public:
  explicit Adjacency(std::size_t n) : n_(n), bits_(n * n, 0) {}
  static Adjacency from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  std::size_t size() const { return n_; }
  bool operator()(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }
  /// Sets a single directed entry; use connect() for undirected edges.
  void set(std::size_t i, std::size_t j, bool value);
  void connect(std::size_t i, std::size_t j);
  std::size_t degree(std::size_t i) const;
  bool is_symmetric() const;
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;  // i < j
  bool is_connected() const;

  friend bool operator==(const Adjacency&, const Adjacency&) = default;

 private:
  std::size_t n_;
  std::vector<char> bits_;
};

/// W_ij = 1 / (1 + max(d_i, d_j)) on edges, W_ii = 1 - sum_{j != i} W_ij.
Matrix metropolis_weights(const Adjacency& adjacency);

/// Undirected communication network, static or with i.i.d. per-iteration edge
/// activations. Immutable; W(k) is a pure function of (base, probability,
/// seed, k).
class CommGraph {
 public:
  static CommGraph from_adjacency(Adjacency base);

  std::size_t num_agents() const { return base_->size(); }
  bool is_static() const { return activation_prob_ >= 1.0; }
  double activation_prob() const { return activation_prob_; }
  const Adjacency& base() const { return *base_; }

  Adjacency topology(std::uint64_t k) const;
  Matrix weights(std::uint64_t k) const;
  /// Agents j != i with an active edge at k, plus i itself, ascending.
  std::vector<std::size_t> neighbors(std::size_t i, std::uint64_t k) const;

 private:
  friend CommGraph dynamic_edge_sampler(const CommGraph& base, double activation_prob, std::uint64_t seed);

  CommGraph(std::shared_ptr<const Adjacency> base, std::shared_ptr<const Matrix> static_weights,
            double activation_prob, std::uint64_t seed)
      : base_(std::move(base)), static_weights_(std::move(static_weights)), activation_prob_(activation_prob),
        seed_(seed) {}

  std::shared_ptr<const Adjacency> base_;
  std::shared_ptr<const Matrix> static_weights_;
  double activation_prob_ = 1.0;
  std::uint64_t seed_ = 0;
};

CommGraph ring_graph(std::size_t num_agents);
CommGraph complete_graph(std::size_t num_agents);
CommGraph empty_graph(std::size_t num_agents);
/// Static graph from a whitespace-separated edge list, one 1-based "i j"
/// pair per line. Blank lines and '#' comments are skipped. When
/// `num_agents` is 0 it is inferred from the largest index.
CommGraph load_edge_list(const std::filesystem::path& path, std::size_t num_agents = 0);

/// Each base edge is active at iteration k independently with probability
/// `activation_prob`; weights are recomputed on the active subgraph.
CommGraph dynamic_edge_sampler(const CommGraph& base, double activation_prob, std::uint64_t seed);

inline std::vector<std::size_t> neighbors(const CommGraph& graph, std::size_t i, std::uint64_t k) {
  return graph.neighbors(i, k);
}

}  // namespace masa

#endif  // MASA_GRAPH_HPP
