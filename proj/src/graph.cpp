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

#include "masa/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

namespace masa {

Adjacency Adjacency::from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  Adjacency adj(n);
  for (auto [i, j] : edges) {
    adj.connect(i, j);
  }
  return adj;
}

void Adjacency::set(std::size_t i, std::size_t j, bool value) {
  if (i >= n_ || j >= n_) {
    throw IndexError("adjacency index out of range");
  }
  bits_[i * n_ + j] = value ? 1 : 0;
}

void Adjacency::connect(std::size_t i, std::size_t j) {
  if (i == j) {
    throw GraphError("self-loop on agent " + std::to_string(i) + "; self-inclusion is implicit");
  }
  set(i, j, true);
  set(j, i, true);
}

std::size_t Adjacency::degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < n_; ++j) {
    d += (*this)(i, j) ? 1 : 0;
  }
  return d;
}

bool Adjacency::is_symmetric() const {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if ((*this)(i, j) != (*this)(j, i)) {
        return false;
      }
    }
  }
  return true;
}

std::vector<std::pair<std::size_t, std::size_t>> Adjacency::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if ((*this)(i, j)) {
        out.emplace_back(i, j);
      }
    }
  }
  return out;
}

bool Adjacency::is_connected() const {
  if (n_ == 0) {
    return true;
  }
  std::vector<char> seen(n_, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n_; ++v) {
      if ((*this)(u, v) && seen[v] == 0) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n_;
}

Matrix metropolis_weights(const Adjacency& adjacency) {
  const std::size_t n = adjacency.size();
  if (!adjacency.is_symmetric()) {
    throw GraphError("metropolis_weights: adjacency is not symmetric");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency(i, i)) {
      throw GraphError("metropolis_weights: adjacency has a nonzero diagonal");
    }
  }
  std::vector<std::size_t> deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    deg[i] = adjacency.degree(i);
  }
  const auto N = static_cast<Eigen::Index>(n);
  Matrix w = Matrix::Zero(N, N);
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (adjacency(i, j)) {
        const double wij = 1.0 / (1.0 + static_cast<double>(std::max(deg[i], deg[j])));
        w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = wij;
        off += wij;
      }
    }
    w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0 - off;
  }
  return w;
}

CommGraph CommGraph::from_adjacency(Adjacency base) {
  auto weights = std::make_shared<const Matrix>(metropolis_weights(base));
  return {std::make_shared<const Adjacency>(std::move(base)), std::move(weights), 1.0, 0};
}

Adjacency CommGraph::topology(std::uint64_t k) const {
  if (is_static()) {
    return *base_;
  }
  RngStream rng = RngStream(seed_).derive(k);
  Adjacency active(base_->size());
  for (auto [i, j] : base_->edges()) {
    if (rng.bernoulli(activation_prob_)) {
      active.connect(i, j);
    }
  }
  return active;
}

Matrix CommGraph::weights(std::uint64_t k) const {
  if (is_static()) {
    return *static_weights_;
  }
  return metropolis_weights(topology(k));
}

std::vector<std::size_t> CommGraph::neighbors(std::size_t i, std::uint64_t k) const {
  if (i >= num_agents()) {
    throw IndexError("agent index " + std::to_string(i) + " out of range");
  }
  const Adjacency adj = topology(k);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < adj.size(); ++j) {
    if (j == i || adj(i, j)) {
      out.push_back(j);
    }
  }
  return out;
}

CommGraph ring_graph(std::size_t num_agents) {
  if (num_agents == 0) {
    throw ParameterError("ring_graph: need at least one agent");
  }
  Adjacency adj(num_agents);
  if (num_agents == 1) {
    warn("ring_graph with one agent degenerates to a self-loop-only graph");
  } else {
    for (std::size_t i = 0; i < num_agents; ++i) {
      adj.connect(i, (i + 1) % num_agents);
    }
  }
  return CommGraph::from_adjacency(std::move(adj));
}

CommGraph complete_graph(std::size_t num_agents) {
  if (num_agents == 0) {
    throw ParameterError("complete_graph: need at least one agent");
  }
  Adjacency adj(num_agents);
  for (std::size_t i = 0; i < num_agents; ++i) {
    for (std::size_t j = i + 1; j < num_agents; ++j) {
      adj.connect(i, j);
    }
  }
  return CommGraph::from_adjacency(std::move(adj));
}

CommGraph empty_graph(std::size_t num_agents) {
  if (num_agents == 0) {
    throw ParameterError("empty_graph: need at least one agent");
  }
  return CommGraph::from_adjacency(Adjacency(num_agents));
}

CommGraph load_edge_list(const std::filesystem::path& path, std::size_t num_agents) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open edge list '" + path.string() + "'");
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    long long a = 0;
    long long b = 0;
    if (!(fields >> a)) {
      continue;
    }
    std::string extra;
    if (!(fields >> b) || (fields >> extra)) {
      throw GraphError(path.string() + ":" + std::to_string(line_no) + ": expected exactly two agent indices");
    }
    if (a < 1 || b < 1) {
      throw GraphError(path.string() + ":" + std::to_string(line_no) + ": agent indices are 1-based");
    }
    if (a == b) {
      throw GraphError(path.string() + ":" + std::to_string(line_no) + ": self-loop");
    }
    edges.emplace_back(static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1));
    max_index = std::max({max_index, static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
  }
  if (num_agents == 0) {
    num_agents = max_index;
  } else if (max_index > num_agents) {
    throw GraphError(path.string() + ": agent index " + std::to_string(max_index) + " exceeds " +
                     std::to_string(num_agents) + " agents");
  }
  if (num_agents == 0) {
    throw GraphError(path.string() + ": no edges and no agent count given");
  }
  return CommGraph::from_adjacency(Adjacency::from_edges(num_agents, edges));
}

CommGraph dynamic_edge_sampler(const CommGraph& base, double activation_prob, std::uint64_t seed) {
  if (!(activation_prob > 0.0 && activation_prob <= 1.0)) {
    throw ParameterError("dynamic_edge_sampler: activation probability must lie in (0, 1]");
  }
  return {base.base_, base.static_weights_, activation_prob, seed};
}

}  // namespace masa
