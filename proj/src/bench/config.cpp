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

#include "masa/bench/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace masa::bench {

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::separable_quadratic:
      return "separable_quadratic";
    case ProblemKind::regression_field:
      return "regression_field";
    case ProblemKind::surveillance:
      return "surveillance";
  }
  return "?";
}

namespace {

/// Carries the origin so every diagnostic can name file and line.
class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    std::ostringstream msg;
    msg << origin_;
    if (at.IsDefined() && at.Mark().line >= 0) {
      msg << ':' << at.Mark().line + 1;
    }
    msg << ": " << what;
    throw ConfigError(msg.str());
  }

  /// Rejects duplicate keys anywhere in the document.
  void scan_duplicates(const YAML::Node& node) const {
    if (node.IsMap()) {
      std::map<std::string, int> seen;
      for (auto it = node.begin(); it != node.end(); ++it) {
        const auto key = it->first.as<std::string>();
        const int line = it->first.Mark().line + 1;
        if (auto [pos, inserted] = seen.emplace(key, line); !inserted) {
          fail(it->first, "duplicate key '" + key + "' (first defined on line " + std::to_string(pos->second) + ")");
        }
        scan_duplicates(it->second);
      }
    } else if (node.IsSequence()) {
      for (const auto& child : node) {
        scan_duplicates(child);
      }
    }
  }

  void require_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) {
      fail(node, what + " must be a mapping");
    }
  }

  void allow_keys(const YAML::Node& node, const std::string& ctx, std::initializer_list<const char*> allowed) const {
    require_map(node, ctx);
    for (auto it = node.begin(); it != node.end(); ++it) {
      const auto key = it->first.as<std::string>();
      bool ok = false;
      for (const char* a : allowed) {
        ok = ok || key == a;
      }
      if (!ok) {
        fail(it->first, "unknown key '" + ctx + "." + key + "'");
      }
    }
  }

  template <typename T>
  T scalar(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) {
      fail(node, "key '" + key + "' must be a scalar");
    }
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "key '" + key + "' has an invalid value '" + node.Scalar() + "'");
    }
  }

  double real(const YAML::Node& node, const std::string& key) const { return scalar<double>(node, key); }

  std::uint64_t count(const YAML::Node& node, const std::string& key) const {
    if (node.IsScalar() && !node.Scalar().empty() && node.Scalar().front() == '-') {
      fail(node, "key '" + key + "' must be nonnegative");
    }
    return scalar<std::uint64_t>(node, key);
  }

  std::string text(const YAML::Node& node, const std::string& key) const { return scalar<std::string>(node, key); }

  Vector vector(const YAML::Node& node, const std::string& key) const {
    if (!node.IsSequence()) {
      fail(node, "key '" + key + "' must be a list of numbers");
    }
    Vector v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t t = 0; t < node.size(); ++t) {
      v[static_cast<Eigen::Index>(t)] = real(node[t], key);
    }
    return v;
  }

  std::vector<Vector> vectors(const YAML::Node& node, const std::string& key) const {
    if (!node.IsSequence()) {
      fail(node, "key '" + key + "' must be a list of lists");
    }
    std::vector<Vector> out;
    for (const auto& child : node) {
      out.push_back(vector(child, key));
    }
    return out;
  }

  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
};

QuadraticSpec parse_quadratic(const Reader& r, const YAML::Node& node) {
  r.allow_keys(node, "problem", {"kind", "block_sizes", "block_optima", "curvatures", "noise_sigma"});
  QuadraticSpec q;
  if (!node["block_sizes"]) {
    r.fail(node, "separable_quadratic needs 'problem.block_sizes'");
  }
  const Vector sizes = r.vector(node["block_sizes"], "problem.block_sizes");
  for (double s : sizes) {
    if (!(s >= 1.0) || s != std::floor(s)) {
      r.fail(node["block_sizes"], "problem.block_sizes must be positive integers");
    }
    q.block_sizes.push_back(static_cast<std::size_t>(s));
  }
  if (node["block_optima"]) {
    q.block_optima = r.vectors(node["block_optima"], "problem.block_optima");
  }
  if (node["curvatures"]) {
    const Vector c = r.vector(node["curvatures"], "problem.curvatures");
    q.curvatures.assign(c.begin(), c.end());
  } else {
    q.curvatures.assign(q.block_sizes.size(), 1.0);
  }
  if (node["noise_sigma"]) {
    q.noise_sigma = r.real(node["noise_sigma"], "problem.noise_sigma");
  }
  return q;
}

RegressionSpec parse_regression(const Reader& r, const YAML::Node& node) {
  r.allow_keys(node, "problem",
               {"kind", "locations", "circle", "features", "degree", "true_theta", "samples_per_agent",
                "noise_sigma", "data_seed"});
  RegressionSpec s;
  if (node["locations"] && node["circle"]) {
    r.fail(node["circle"], "give either 'problem.locations' or 'problem.circle', not both");
  }
  if (node["locations"]) {
    s.locations = r.vectors(node["locations"], "problem.locations");
  } else if (node["circle"]) {
    const YAML::Node c = node["circle"];
    r.allow_keys(c, "problem.circle", {"agents", "radius"});
    if (!c["agents"] || !c["radius"]) {
      r.fail(c, "problem.circle needs 'agents' and 'radius'");
    }
    const auto agents = r.count(c["agents"], "problem.circle.agents");
    const double radius = r.real(c["radius"], "problem.circle.radius");
    for (std::uint64_t i = 0; i < agents; ++i) {
      const double t = 2.0 * 3.14159265358979323846 * static_cast<double>(i) / static_cast<double>(agents);
      Vector loc(2);
      loc << radius * std::cos(t), radius * std::sin(t);
      s.locations.push_back(loc);
    }
  } else {
    r.fail(node, "regression_field needs 'problem.locations' or 'problem.circle'");
  }
  if (node["features"]) {
    s.features = r.text(node["features"], "problem.features");
    if (s.features != "affine" && s.features != "polynomial") {
      r.fail(node["features"], "problem.features must be 'affine' or 'polynomial'");
    }
  }
  if (node["degree"]) {
    s.degree = r.count(node["degree"], "problem.degree");
  }
  if (!node["true_theta"]) {
    r.fail(node, "regression_field needs 'problem.true_theta'");
  }
  s.true_theta = r.vector(node["true_theta"], "problem.true_theta");
  if (node["samples_per_agent"]) {
    const YAML::Node n = node["samples_per_agent"];
    s.samples_per_agent.clear();
    if (n.IsSequence()) {
      for (const auto& v : n) {
        s.samples_per_agent.push_back(r.count(v, "problem.samples_per_agent"));
      }
    } else {
      s.samples_per_agent.push_back(r.count(n, "problem.samples_per_agent"));
    }
  }
  if (node["noise_sigma"]) {
    s.noise_sigma = r.real(node["noise_sigma"], "problem.noise_sigma");
  }
  if (node["data_seed"]) {
    s.data_seed = r.count(node["data_seed"], "problem.data_seed");
  }
  return s;
}

SurveillanceSpec parse_surveillance(const Reader& r, const YAML::Node& node) {
  r.allow_keys(node, "problem",
               {"kind", "preset", "agents", "targets", "detection_radius", "measurement_cov", "epsilon",
                "position_noise", "min_range", "agent_speed", "max_speed", "time_step", "block_dim"});
  SurveillanceSpec s;
  if (node["preset"]) {
    const std::string preset = r.text(node["preset"], "problem.preset");
    if (preset != "default") {
      r.fail(node["preset"], "unknown surveillance preset '" + preset + "'");
    }
    s = default_surveillance_spec();
  } else if (!node["agents"] || !node["targets"]) {
    r.fail(node, "surveillance needs 'problem.preset' or both 'problem.agents' and 'problem.targets'");
  }
  if (node["agents"]) {
    const YAML::Node agents = node["agents"];
    if (!agents.IsSequence()) {
      r.fail(agents, "problem.agents must be a list");
    }
    s.agent_positions.clear();
    s.initial_headings.clear();
    for (const auto& a : agents) {
      r.allow_keys(a, "problem.agents[]", {"position", "heading"});
      if (!a["position"]) {
        r.fail(a, "every agent needs a 'position'");
      }
      const Vector p = r.vector(a["position"], "problem.agents[].position");
      if (p.size() != 2) {
        r.fail(a["position"], "agent positions are planar [x, y]");
      }
      s.agent_positions.emplace_back(p[0], p[1]);
      s.initial_headings.push_back(a["heading"] ? r.real(a["heading"], "problem.agents[].heading") : 0.0);
    }
  }
  if (node["targets"]) {
    const YAML::Node targets = node["targets"];
    if (!targets.IsSequence()) {
      r.fail(targets, "problem.targets must be a list");
    }
    s.targets.clear();
    for (const auto& t : targets) {
      r.allow_keys(t, "problem.targets[]", {"waypoints"});
      if (!t["waypoints"]) {
        r.fail(t, "every target needs 'waypoints' as [time, x, y] triples");
      }
      std::vector<Waypoint> wps;
      for (const Vector& w : r.vectors(t["waypoints"], "problem.targets[].waypoints")) {
        if (w.size() != 3) {
          r.fail(t["waypoints"], "waypoints are [time, x, y] triples");
        }
        wps.push_back({w[0], Point2(w[1], w[2])});
      }
      try {
        s.targets.emplace_back(std::move(wps));
      } catch (const Error& e) {
        r.fail(t["waypoints"], e.what());
      }
    }
  }
  auto set_real = [&](const char* key, double& field) {
    if (node[key]) field = r.real(node[key], std::string("problem.") + key);
  };
  set_real("detection_radius", s.detection_radius);
  set_real("epsilon", s.epsilon);
  set_real("position_noise", s.position_noise);
  set_real("min_range", s.min_range);
  set_real("agent_speed", s.agent_speed);
  set_real("max_speed", s.max_speed);
  set_real("time_step", s.time_step);
  if (node["block_dim"]) {
    s.block_dim = r.count(node["block_dim"], "problem.block_dim");
  }
  if (node["measurement_cov"]) {
    const auto rows = r.vectors(node["measurement_cov"], "problem.measurement_cov");
    if (rows.size() != 2 || rows[0].size() != 2 || rows[1].size() != 2) {
      r.fail(node["measurement_cov"], "problem.measurement_cov must be a 2x2 matrix");
    }
    s.measurement_cov << rows[0][0], rows[0][1], rows[1][0], rows[1][1];
  }
  return s;
}

ProblemSpec parse_problem(const Reader& r, const YAML::Node& node) {
  r.require_map(node, "problem");
  if (!node["kind"]) {
    r.fail(node, "missing 'problem.kind'");
  }
  const std::string kind = r.text(node["kind"], "problem.kind");
  ProblemSpec spec;
  if (kind == "separable_quadratic") {
    spec.kind = ProblemKind::separable_quadratic;
    spec.quadratic = parse_quadratic(r, node);
  } else if (kind == "regression_field") {
    spec.kind = ProblemKind::regression_field;
    spec.regression = parse_regression(r, node);
  } else if (kind == "surveillance") {
    spec.kind = ProblemKind::surveillance;
    spec.surveillance = parse_surveillance(r, node);
  } else {
    r.fail(node["kind"], "unknown problem kind '" + kind +
                             "' (expected separable_quadratic, regression_field or surveillance)");
  }
  try {
    if (spec.kind == ProblemKind::surveillance) {
      make_surveillance(spec.surveillance);
    } else {
      build_benchmark(spec);
    }
  } catch (const Error& e) {
    r.fail(node, std::string("invalid problem: ") + e.what());
  }
  return spec;
}

GainSchedule parse_gain(const Reader& r, const YAML::Node& node) {
  r.allow_keys(node, "gain", {"kind", "a", "stability", "alpha"});
  const std::string kind = node["kind"] ? r.text(node["kind"], "gain.kind") : "decay";
  if (!node["a"]) {
    r.fail(node, "gain needs 'a'");
  }
  const double a = r.real(node["a"], "gain.a");
  try {
    if (kind == "constant") {
      if (node["stability"] || node["alpha"]) {
        r.fail(node, "a constant gain takes only 'a'");
      }
      return GainSchedule::constant(a);
    }
    if (kind == "decay") {
      const double stability = node["stability"] ? r.real(node["stability"], "gain.stability") : 0.0;
      const double alpha = node["alpha"] ? r.real(node["alpha"], "gain.alpha") : 1.0;
      return GainSchedule::polynomial_decay(a, stability, alpha);
    }
  } catch (const ParameterError& e) {
    r.fail(node, e.what());
  }
  r.fail(node["kind"], "gain.kind must be 'constant' or 'decay'");
}

BlockEstimator parse_estimator(const Reader& r, const YAML::Node& node, const GainSchedule& gain) {
  r.allow_keys(node, "estimator", {"kind", "c", "perturbation", "gamma"});
  const std::string kind = node["kind"] ? r.text(node["kind"], "estimator.kind") : "sg";
  if (kind == "sg") {
    if (node["c"] || node["perturbation"] || node["gamma"]) {
      r.fail(node, "the sg estimator takes no perturbation settings");
    }
    return BlockEstimator::sg();
  }
  if (kind != "fdsa" && kind != "spsa") {
    r.fail(node["kind"], "estimator.kind must be sg, fdsa or spsa");
  }
  const double c = node["c"] ? r.real(node["c"], "estimator.c") : 0.1;
  try {
    PerturbSchedule perturb = PerturbSchedule::default_for(gain, c);
    if (node["perturbation"]) {
      const std::string p = r.text(node["perturbation"], "estimator.perturbation");
      if (p == "constant") {
        perturb = PerturbSchedule::constant(c);
      } else if (p == "decay") {
        perturb = PerturbSchedule::polynomial_decay(c, node["gamma"] ? r.real(node["gamma"], "estimator.gamma")
                                                                      : 0.101);
      } else {
        r.fail(node["perturbation"], "estimator.perturbation must be 'constant' or 'decay'");
      }
    } else if (node["gamma"]) {
      perturb = PerturbSchedule::polynomial_decay(c, r.real(node["gamma"], "estimator.gamma"));
    }
    validate_pairing(gain, perturb);
    return kind == "fdsa" ? BlockEstimator::fdsa(perturb) : BlockEstimator::spsa(perturb);
  } catch (const ParameterError& e) {
    r.fail(node, e.what());
  }
}

GraphSpec parse_graph(const Reader& r, const YAML::Node& node) {
  r.allow_keys(node, "graph", {"kind", "path", "activation_prob", "seed"});
  GraphSpec g;
  if (node["kind"]) {
    g.kind = r.text(node["kind"], "graph.kind");
  }
  if (g.kind != "ring" && g.kind != "complete" && g.kind != "empty" && g.kind != "edge_list") {
    r.fail(node["kind"], "graph.kind must be ring, complete, empty or edge_list");
  }
  if (g.kind == "edge_list") {
    if (!node["path"]) {
      r.fail(node, "an edge_list graph needs 'path'");
    }
    g.path = r.text(node["path"], "graph.path");
  } else if (node["path"]) {
    r.fail(node["path"], "'graph.path' only applies to edge_list graphs");
  }
  if (node["activation_prob"]) {
    const double p = r.real(node["activation_prob"], "graph.activation_prob");
    if (!(p > 0.0 && p <= 1.0)) {
      r.fail(node["activation_prob"], "graph.activation_prob must lie in (0, 1]");
    }
    g.activation_prob = p;
  }
  if (node["seed"]) {
    g.seed = r.count(node["seed"], "graph.seed");
  }
  return g;
}

/// The framework rule every pairing must satisfy.
void check_framework(const Reader& r, const YAML::Node& at, AlgorithmKind kind, const ProblemSpec& problem) {
  const std::string alg = to_string(kind);
  const std::string prob = to_string(problem.kind);
  if (needs_cyclic_framework(kind) && !problem.has_cyclic_view()) {
    r.fail(at, "framework mismatch: " + alg +
                   " belongs to the cyclic framework and needs one global loss L(theta) measurable by every "
                   "agent, but " + prob + " only provides agent-local losses L_i (gcsa and dsa_s: cyclic "
                   "framework; dsa and cisa: distributed framework)");
  }
  if (!needs_cyclic_framework(kind) && !problem.has_distributed_view()) {
    r.fail(at, "framework mismatch: " + alg +
                   " belongs to the distributed framework and needs a loss of the form sum_i L_i(theta), but " +
                   prob + " only provides a global loss (gcsa and dsa_s: cyclic framework; dsa and cisa: "
                   "distributed framework)");
  }
  if (problem.kind == ProblemKind::surveillance && kind != AlgorithmKind::gcsa) {
    r.fail(at, "surveillance tracking runs the cyclic update (gcsa) only");
  }
}

AlgorithmSpec parse_algorithm(const Reader& r, const YAML::Node& node, const ProblemSpec& problem) {
  r.allow_keys(node, "algorithm", {"kind", "label", "gain", "estimator", "graph"});
  if (!node["kind"]) {
    r.fail(node, "algorithm needs 'kind'");
  }
  const std::string name = r.text(node["kind"], "algorithm.kind");
  const auto kind = algorithm_from_string(name);
  if (!kind) {
    r.fail(node["kind"], "unknown algorithm '" + name + "' (expected gcsa, dsa, dsa_s or cisa)");
  }
  check_framework(r, node["kind"], *kind, problem);
  AlgorithmSpec spec;
  spec.kind = *kind;
  spec.label = node["label"] ? r.text(node["label"], "algorithm.label") : name;
  if (spec.label.empty() || spec.label.find_first_of("/\\ ") != std::string::npos) {
    r.fail(node["label"], "algorithm.label must be a non-empty name without spaces or slashes");
  }
  if (!node["gain"]) {
    r.fail(node, "algorithm needs 'gain'");
  }
  spec.gain = parse_gain(r, node["gain"]);
  if (node["estimator"]) {
    spec.estimator = parse_estimator(r, node["estimator"], spec.gain);
  }
  if (spec.estimator.kind() != BlockEstimator::Kind::sg && !needs_cyclic_framework(spec.kind)) {
    r.fail(node["estimator"], name + " uses each agent's local gradient oracle; only the sg estimator applies");
  }
  if (spec.estimator.kind() == BlockEstimator::Kind::sg && problem.kind == ProblemKind::surveillance) {
    r.fail(node, "surveillance offers loss measurements only; use the fdsa or spsa estimator");
  }
  if (problem.kind == ProblemKind::surveillance && spec.gain.kind() != GainSchedule::Kind::constant) {
    r.fail(node["gain"], "surveillance tracking uses a constant gain");
  }
  if (is_multi_state(spec.kind)) {
    spec.graph = node["graph"] ? parse_graph(r, node["graph"]) : GraphSpec{};
  } else if (node["graph"]) {
    r.fail(node["graph"], name + " uses the cyclic update and takes no communication graph");
  }
  return spec;
}

std::size_t agent_count(const ProblemSpec& problem, AlgorithmKind kind) {
  switch (problem.kind) {
    case ProblemKind::separable_quadratic:
      return problem.quadratic.block_sizes.size();
    case ProblemKind::regression_field:
      return problem.regression.locations.size();
    case ProblemKind::surveillance:
      return problem.surveillance.agent_positions.size();
  }
  (void)kind;
  return 0;
}

std::size_t problem_dim(const ProblemSpec& problem) {
  switch (problem.kind) {
    case ProblemKind::separable_quadratic: {
      std::size_t p = 0;
      for (auto s : problem.quadratic.block_sizes) p += s;
      return p;
    }
    case ProblemKind::regression_field:
      return static_cast<std::size_t>(problem.regression.true_theta.size());
    case ProblemKind::surveillance:
      return problem.surveillance.agent_positions.size() * problem.surveillance.block_dim;
  }
  return 0;
}

ExperimentConfig parse_document(const Reader& r, const YAML::Node& root, const std::filesystem::path& source) {
  r.scan_duplicates(root);
  r.allow_keys(root, "config", {"name", "problem", "initial", "algorithm", "algorithms", "stop", "seeds", "output"});
  ExperimentConfig cfg;
  cfg.source = source;
  if (root["name"]) {
    cfg.name = r.text(root["name"], "name");
    if (cfg.name.empty() || cfg.name.find_first_of("/\\ ") != std::string::npos) {
      r.fail(root["name"], "name must be non-empty without spaces or slashes");
    }
  }
  if (!root["problem"]) {
    r.fail(root, "missing 'problem'");
  }
  cfg.problem = parse_problem(r, root["problem"]);

  if (root["algorithm"] && root["algorithms"]) {
    r.fail(root["algorithms"], "give either 'algorithm' or 'algorithms', not both");
  }
  if (root["algorithm"]) {
    cfg.algorithms.push_back(parse_algorithm(r, root["algorithm"], cfg.problem));
  } else if (root["algorithms"]) {
    if (!root["algorithms"].IsSequence() || root["algorithms"].size() == 0) {
      r.fail(root["algorithms"], "'algorithms' must be a non-empty list");
    }
    std::set<std::string> labels;
    for (const auto& a : root["algorithms"]) {
      cfg.algorithms.push_back(parse_algorithm(r, a, cfg.problem));
      if (!labels.insert(cfg.algorithms.back().label).second) {
        r.fail(a, "duplicate algorithm label '" + cfg.algorithms.back().label + "'; set 'label' to tell them apart");
      }
    }
  } else {
    r.fail(root, "missing 'algorithm' or 'algorithms'");
  }

  const std::size_t dim = problem_dim(cfg.problem);
  if (root["initial"]) {
    const YAML::Node init = root["initial"];
    r.allow_keys(init, "initial", {"point", "copies"});
    if (cfg.problem.kind == ProblemKind::surveillance) {
      r.fail(init, "surveillance starts from the scenario's agent headings; 'initial' does not apply");
    }
    if (init["point"] && init["copies"]) {
      r.fail(init, "give either 'initial.point' or 'initial.copies'");
    }
    if (init["point"]) {
      cfg.initial.push_back(r.vector(init["point"], "initial.point"));
    } else if (init["copies"]) {
      cfg.initial = r.vectors(init["copies"], "initial.copies");
    } else {
      r.fail(init, "'initial' needs 'point' or 'copies'");
    }
    for (const Vector& v : cfg.initial) {
      if (static_cast<std::size_t>(v.size()) != dim) {
        r.fail(init, "initial point has length " + std::to_string(v.size()) + ", problem dimension is " +
                         std::to_string(dim));
      }
      if (!v.allFinite()) {
        r.fail(init, "initial point must be finite");
      }
    }
    if (cfg.initial.size() > 1) {
      for (const auto& a : cfg.algorithms) {
        if (!is_multi_state(a.kind)) {
          r.fail(init, std::string("initial.copies applies to dsa and dsa_s only; ") + to_string(a.kind) +
                           " takes a single point");
        }
        if (cfg.initial.size() != agent_count(cfg.problem, a.kind)) {
          r.fail(init, "initial.copies needs one copy per agent");
        }
      }
    }
  }

  if (root["stop"]) {
    const YAML::Node stop = root["stop"];
    r.allow_keys(stop, "stop", {"max_iterations", "measurement_budget", "target_error"});
    if (stop["max_iterations"]) cfg.stop.max_iterations = r.count(stop["max_iterations"], "stop.max_iterations");
    if (stop["measurement_budget"]) {
      cfg.stop.measurement_budget = r.count(stop["measurement_budget"], "stop.measurement_budget");
    }
    if (stop["target_error"]) {
      const double t = r.real(stop["target_error"], "stop.target_error");
      if (!(t >= 0.0)) {
        r.fail(stop["target_error"], "stop.target_error must be nonnegative");
      }
      cfg.stop.target_error = t;
    }
    if (cfg.stop.empty()) {
      r.fail(stop, "'stop' needs at least one criterion");
    }
  } else {
    cfg.stop.max_iterations = 1000;
  }
  if (cfg.problem.kind == ProblemKind::surveillance) {
    if (!cfg.stop.max_iterations || cfg.stop.measurement_budget || cfg.stop.target_error) {
      r.fail(root["stop"], "surveillance runs a fixed number of time steps; use stop.max_iterations only");
    }
  }

  if (root["seeds"]) {
    const YAML::Node seeds = root["seeds"];
    if (!seeds.IsSequence() || seeds.size() == 0) {
      r.fail(seeds, "'seeds' must be a non-empty list of integers");
    }
    std::set<std::uint64_t> seen;
    for (const auto& s : seeds) {
      const std::uint64_t v = r.count(s, "seeds");
      if (!seen.insert(v).second) {
        r.fail(s, "duplicate seed " + std::to_string(v));
      }
      cfg.seeds.push_back(v);
    }
  } else {
    cfg.seeds = {1};
  }

  if (root["output"]) {
    const YAML::Node out = root["output"];
    r.allow_keys(out, "output", {"dir"});
    if (out["dir"]) {
      cfg.out_dir = r.text(out["dir"], "output.dir");
    }
  }

  const std::filesystem::path base = source.has_parent_path() ? source.parent_path() : std::filesystem::path(".");
  if (cfg.problem.kind != ProblemKind::surveillance) {
    const Benchmark bench = build_benchmark(cfg.problem);
    const YAML::Node alg_nodes = root["algorithm"] ? root["algorithm"] : root["algorithms"];
    for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
      const YAML::Node at = alg_nodes.IsSequence() ? alg_nodes[a] : alg_nodes;
      try {
        check_compatibility(build_algorithm(cfg.algorithms[a], agent_count(cfg.problem, cfg.algorithms[a].kind),
                                            base),
                            bench);
      } catch (const Error& e) {
        r.fail(at, e.what());
      }
    }
  }
  return cfg;
}

}  // namespace

Benchmark build_benchmark(const ProblemSpec& spec) {
  switch (spec.kind) {
    case ProblemKind::separable_quadratic: {
      const QuadraticSpec& q = spec.quadratic;
      return make_separable_quadratic(make_partition(q.block_sizes), q.block_optima, q.curvatures, q.noise_sigma)
          .benchmark();
    }
    case ProblemKind::regression_field: {
      const RegressionSpec& s = spec.regression;
      const FeatureMap features = s.features == "polynomial" ? polynomial_features(s.degree) : affine_features();
      return make_regression_field(s.locations, features, ParamVec(s.true_theta), s.samples_per_agent,
                                   s.noise_sigma, s.data_seed)
          .benchmark();
    }
    case ProblemKind::surveillance:
      throw ConfigError("surveillance is time-varying; build it with make_surveillance");
  }
  throw ConfigError("unknown problem kind");
}

CommGraph build_graph(const GraphSpec& spec, std::size_t num_agents, const std::filesystem::path& base_dir) {
  CommGraph graph = [&] {
    if (spec.kind == "ring") return ring_graph(num_agents);
    if (spec.kind == "complete") return complete_graph(num_agents);
    if (spec.kind == "empty") return empty_graph(num_agents);
    const std::filesystem::path path = spec.path.is_absolute() ? spec.path : base_dir / spec.path;
    return load_edge_list(path, num_agents);
  }();
  if (spec.activation_prob) {
    graph = dynamic_edge_sampler(graph, *spec.activation_prob, spec.seed);
  }
  return graph;
}

AlgorithmConfig build_algorithm(const AlgorithmSpec& spec, std::size_t num_agents,
                                const std::filesystem::path& base_dir) {
  AlgorithmConfig cfg{spec.kind, spec.gain, spec.estimator, std::nullopt};
  if (spec.graph) {
    cfg.graph = build_graph(*spec.graph, num_agents, base_dir);
  }
  return cfg;
}

ExperimentConfig parse_config_string(const std::string& text, const std::string& origin) {
  const Reader r(origin);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) {
    throw ConfigError(origin + ": config must be a mapping");
  }
  return parse_document(r, root, origin);
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const Reader r(path.string());
  YAML::Node root;
  try {
    root = YAML::Load(buf.str());
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path.string() + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) {
    throw ConfigError(path.string() + ": config must be a mapping");
  }
  return parse_document(r, root, path);
}

}  // namespace masa::bench
