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

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <limits>

#include "masa/algorithms.hpp"
#include "masa/bench/config.hpp"
#include "masa/bench/grid.hpp"
#include "masa/bench/trace_io.hpp"
#include "masa/problems.hpp"
#include "masa/surveillance.hpp"

namespace py = pybind11;
using namespace masa;

namespace {

/// Trace columns as numpy arrays; absent metrics are NaN.
py::dict trace_to_dict(const RunTrace& trace) {
  const auto n = static_cast<Eigen::Index>(trace.records.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd gain(n), error(n), consensus(n), loss(n);
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 1> k(n), loss_evals(n), grad_evals(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const TraceRecord& rec = trace.records[static_cast<std::size_t>(r)];
    k[r] = rec.k;
    gain[r] = rec.gain;
    error[r] = rec.error.value_or(nan);
    consensus[r] = rec.consensus_error.value_or(nan);
    loss[r] = rec.loss.value_or(nan);
    loss_evals[r] = rec.measurements.loss_evals;
    grad_evals[r] = rec.measurements.grad_evals;
  }
  py::dict out;
  out["k"] = k;
  out["gain"] = gain;
  out["error"] = error;
  out["consensus_error"] = consensus;
  out["loss"] = loss;
  out["loss_evals"] = loss_evals;
  out["grad_evals"] = grad_evals;
  if (trace.final_theta) out["final_theta"] = trace.final_theta->values();
  if (trace.final_copies) {
    std::vector<Vector> copies;
    for (const auto& t : trace.final_copies->thetas) copies.push_back(t.values());
    out["final_copies"] = copies;
  }
  return out;
}

InitialCondition initial_from(const std::vector<Vector>& points) {
  std::vector<ParamVec> out;
  for (const Vector& p : points) out.emplace_back(p);
  return InitialCondition{std::move(out)};
}

}  // namespace

PYBIND11_MODULE(_masa, m) {
  m.doc() = "Multi-agent stochastic approximation: GCSA, DSA, DSA-S and CISA";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<PartitionError>(m, "PartitionError", error);
  py::register_exception<DimensionError>(m, "DimensionError", error);
  py::register_exception<IndexError>(m, "BlockIndexError", error);
  py::register_exception<ParameterError>(m, "ParameterError", error);
  py::register_exception<CapabilityError>(m, "CapabilityError", error);
  py::register_exception<GraphError>(m, "GraphError", error);
  py::register_exception<ConfigError>(m, "ConfigError", error);
  py::register_exception<CommunicationError>(m, "CommunicationError", error);
  py::register_exception<NonFiniteError>(m, "NonFiniteError", error);
  py::register_exception<IoError>(m, "IoError", error);
  py::register_exception<RunDivergence>(m, "RunDivergence", error);
  py::register_exception<DivergenceError>(m, "DivergenceError", error);

  py::class_<BlockPartition>(m, "BlockPartition")
      .def_property_readonly("num_blocks", &BlockPartition::num_blocks)
      .def_property_readonly("dim", &BlockPartition::dim)
      .def_property_readonly("block_sizes", &BlockPartition::block_sizes)
      .def("offset", &BlockPartition::offset)
      .def("indices", &BlockPartition::indices)
      .def("block_of", &BlockPartition::block_of)
      .def("subvector", [](const BlockPartition& p, const Vector& theta, std::size_t i) { return subvector(theta, p, i); });
  m.def("make_partition", [](const std::vector<std::size_t>& sizes) { return make_partition(sizes); },
        py::arg("block_sizes"));

  py::class_<GainSchedule>(m, "GainSchedule")
      .def_static("constant", &GainSchedule::constant, py::arg("a"))
      .def_static("polynomial_decay", &GainSchedule::polynomial_decay, py::arg("a"), py::arg("stability") = 0.0,
                  py::arg("alpha") = 1.0)
      .def("at", &GainSchedule::at, py::arg("k"));

  py::class_<PerturbSchedule>(m, "PerturbSchedule")
      .def_static("constant", &PerturbSchedule::constant, py::arg("c"))
      .def_static("polynomial_decay", &PerturbSchedule::polynomial_decay, py::arg("c"), py::arg("gamma") = 0.101)
      .def("at", &PerturbSchedule::at, py::arg("k"));

  py::class_<BlockEstimator>(m, "BlockEstimator")
      .def_static("sg", &BlockEstimator::sg)
      .def_static("fdsa", &BlockEstimator::fdsa, py::arg("perturb"))
      .def_static("spsa", &BlockEstimator::spsa, py::arg("perturb"))
      .def_property_readonly("kind", [](const BlockEstimator& e) { return to_string(e.kind()); });

  py::class_<CommGraph>(m, "CommGraph")
      .def_property_readonly("num_agents", &CommGraph::num_agents)
      .def_property_readonly("is_static", &CommGraph::is_static)
      .def("weights", &CommGraph::weights, py::arg("k") = 0)
      .def("neighbors", &CommGraph::neighbors, py::arg("i"), py::arg("k") = 0)
      .def("edges", [](const CommGraph& g, std::uint64_t k) { return g.topology(k).edges(); }, py::arg("k") = 0);
  m.def("ring_graph", &ring_graph, py::arg("num_agents"));
  m.def("complete_graph", &complete_graph, py::arg("num_agents"));
  m.def("empty_graph", &empty_graph, py::arg("num_agents"));
  m.def("load_edge_list", &load_edge_list, py::arg("path"), py::arg("num_agents") = 0);
  m.def("dynamic_edge_sampler", &dynamic_edge_sampler, py::arg("base"), py::arg("activation_prob"),
        py::arg("seed"));
  m.def(
      "metropolis_weights",
      [](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
        return metropolis_weights(Adjacency::from_edges(n, edges));
      },
      py::arg("num_agents"), py::arg("edges"));

  py::class_<Benchmark>(m, "Benchmark")
      .def_property_readonly("dim", &Benchmark::dim)
      .def_property_readonly("has_cyclic_view", [](const Benchmark& b) { return b.cyclic.has_value(); })
      .def_property_readonly("has_distributed_view", [](const Benchmark& b) { return b.distributed.has_value(); })
      .def_property_readonly("true_optimum", [](const Benchmark& b) -> std::optional<Vector> {
        if (auto o = b.true_optimum()) return o->values();
        return std::nullopt;
      });

  py::class_<SeparableQuadratic>(m, "SeparableQuadratic")
      .def_property_readonly("partition", &SeparableQuadratic::partition)
      .def_property_readonly("true_optimum", [](const SeparableQuadratic& q) { return q.true_optimum().values(); })
      .def("loss", &SeparableQuadratic::loss)
      .def("gradient", &SeparableQuadratic::gradient)
      .def("block_gradient", &SeparableQuadratic::block_gradient)
      .def("benchmark", &SeparableQuadratic::benchmark);
  m.def(
      "make_separable_quadratic",
      [](const std::vector<std::size_t>& block_sizes, std::vector<Vector> block_optima,
         std::optional<std::vector<double>> curvatures, double noise_sigma) {
        const auto part = make_partition(block_sizes);
        return make_separable_quadratic(part, std::move(block_optima),
                                        curvatures.value_or(std::vector<double>(part.num_blocks(), 1.0)),
                                        noise_sigma);
      },
      py::arg("block_sizes"), py::arg("block_optima") = std::vector<Vector>{}, py::arg("curvatures") = std::nullopt,
      py::arg("noise_sigma") = 0.0);

  py::class_<RegressionField>(m, "RegressionField")
      .def_property_readonly("num_agents", &RegressionField::num_agents)
      .def_property_readonly("dim", &RegressionField::dim)
      .def_property_readonly("normal_equations_solution",
                             [](const RegressionField& f) { return f.normal_equations_solution().values(); })
      .def_property_readonly("rank_deficient", &RegressionField::rank_deficient)
      .def("features", &RegressionField::features)
      .def("observations", &RegressionField::observations)
      .def("local_loss", &RegressionField::local_loss)
      .def("local_full_gradient", &RegressionField::local_full_gradient)
      .def("benchmark", &RegressionField::benchmark);
  m.def(
      "make_regression_field",
      [](std::vector<Vector> locations, const Vector& true_theta, const std::string& features, std::size_t degree,
         std::vector<std::size_t> samples_per_agent, double noise_sigma, std::uint64_t seed) {
        if (features != "affine" && features != "polynomial") {
          throw ParameterError("features must be 'affine' or 'polynomial'");
        }
        const FeatureMap map = features == "affine" ? affine_features() : polynomial_features(degree);
        return make_regression_field(std::move(locations), map, ParamVec(true_theta), std::move(samples_per_agent),
                                     noise_sigma, seed);
      },
      py::arg("locations"), py::arg("true_theta"), py::arg("features") = "affine", py::arg("degree") = 1,
      py::arg("samples_per_agent") = std::vector<std::size_t>{1}, py::arg("noise_sigma") = 0.0,
      py::arg("seed") = 0);

  m.def(
      "run",
      [](const std::string& algorithm, const Benchmark& benchmark, const GainSchedule& gain,
         const std::vector<Vector>& initial, std::optional<BlockEstimator> estimator, std::optional<CommGraph> graph,
         std::optional<std::uint64_t> max_iterations, std::optional<std::uint64_t> measurement_budget,
         std::optional<double> target_error, std::uint64_t seed) {
        const auto kind = algorithm_from_string(algorithm);
        if (!kind) throw ConfigError("unknown algorithm '" + algorithm + "'");
        const AlgorithmConfig config{*kind, gain, estimator.value_or(BlockEstimator::sg()), std::move(graph)};
        RunTrace trace;
        {
          py::gil_scoped_release release;
          trace = run(config, benchmark, initial_from(initial), {max_iterations, measurement_budget, target_error},
                      seed);
        }
        return trace_to_dict(trace);
      },
      py::arg("algorithm"), py::arg("benchmark"), py::arg("gain"), py::arg("initial"), py::arg("estimator") = py::none(),
      py::arg("graph") = py::none(), py::arg("max_iterations") = py::none(),
      py::arg("measurement_budget") = py::none(), py::arg("target_error") = py::none(), py::arg("seed") = 1,
      "Runs one algorithm from `initial` (one point, or one per agent) and returns the trace columns.");

  m.def(
      "consensus_average",
      [](const std::vector<Vector>& copies) {
        MultiState s;
        for (const Vector& c : copies) s.thetas.emplace_back(c);
        return consensus_average(s).values();
      },
      py::arg("copies"));

  m.def(
      "track_surveillance",
      [](double gain, double c, std::size_t steps, std::uint64_t seed) {
        const auto scenario = make_surveillance(default_surveillance_spec());
        const auto result = track_gcsa(scenario, BlockEstimator::spsa(PerturbSchedule::constant(c)), gain, steps,
                                       seed);
        const auto frozen = track_frozen(scenario, steps);
        py::dict out = trace_to_dict(result.trace);
        out["mean_loss"] = result.mean_loss;
        out["frozen_mean_loss"] = frozen.mean_loss;
        return out;
      },
      py::arg("gain") = 3.0, py::arg("c") = 0.6, py::arg("steps") = 500, py::arg("seed") = 1,
      "Tracks the default planar scenario with GCSA-SPSA and reports the frozen-heading baseline.");

  m.def(
      "validate_config", [](const std::filesystem::path& path) { bench::parse_config(path); }, py::arg("path"));
  m.def(
      "run_config",
      [](const std::filesystem::path& path, std::optional<std::filesystem::path> out_dir, std::size_t jobs) {
        const auto cfg = bench::parse_config(path);
        bench::GridResult result;
        {
          py::gil_scoped_release release;
          result = bench::run_grid(cfg, {jobs, std::move(out_dir), {}});
        }
        return bench::summary_json(result.summary);
      },
      py::arg("path"), py::arg("out_dir") = py::none(), py::arg("jobs") = 1,
      "Runs every cell of a YAML config and returns the summary as JSON text.");
  m.def(
      "read_trace", [](const std::filesystem::path& path) { return trace_to_dict(bench::read_trace(path)); },
      py::arg("path"));
}
