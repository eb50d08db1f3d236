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

#include "masa/bench/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "masa/bench/trace_io.hpp"

namespace masa::bench {

namespace {

using nlohmann::json;

std::size_t num_agents(const ProblemSpec& problem) {
  switch (problem.kind) {
    case ProblemKind::separable_quadratic:
      return problem.quadratic.block_sizes.size();
    case ProblemKind::regression_field:
      return problem.regression.locations.size();
    case ProblemKind::surveillance:
      return problem.surveillance.agent_positions.size();
  }
  return 0;
}

std::filesystem::path base_dir(const ExperimentConfig& config) {
  return config.source.has_parent_path() ? config.source.parent_path() : std::filesystem::path(".");
}

InitialCondition initial_condition(const ExperimentConfig& config, std::size_t dim) {
  if (config.initial.empty()) {
    return InitialCondition::single(ParamVec(Vector::Zero(static_cast<Eigen::Index>(dim))));
  }
  std::vector<ParamVec> points;
  for (const Vector& v : config.initial) {
    points.emplace_back(v);
  }
  return InitialCondition{std::move(points)};
}

SummaryRow row_from(const CellResult& cell) {
  SummaryRow row{cell.label, cell.seed, cell.ok, cell.failure, 0, std::nullopt, std::nullopt, std::nullopt, 0};
  if (!cell.trace.records.empty()) {
    const TraceRecord& last = cell.trace.records.back();
    row.iterations = last.k;
    row.final_error = last.error;
    row.final_consensus_error = last.consensus_error;
    row.final_loss = last.loss;
    row.total_measurements = last.measurements.total();
  }
  return row;
}

std::vector<AlgorithmAggregate> aggregates_for(const ExperimentConfig& config, const std::vector<SummaryRow>& rows) {
  std::vector<AlgorithmAggregate> out;
  for (const AlgorithmSpec& alg : config.algorithms) {
    AlgorithmAggregate agg;
    agg.label = alg.label;
    std::vector<double> err, cons, loss, meas;
    for (const SummaryRow& row : rows) {
      if (row.label != alg.label) continue;
      ++agg.runs;
      if (!row.ok) {
        ++agg.failures;
        continue;
      }
      if (row.final_error) err.push_back(*row.final_error);
      if (row.final_consensus_error) cons.push_back(*row.final_consensus_error);
      if (row.final_loss) loss.push_back(*row.final_loss);
      meas.push_back(static_cast<double>(row.total_measurements));
    }
    agg.final_error = aggregate(std::move(err));
    agg.final_consensus_error = aggregate(std::move(cons));
    agg.final_loss = aggregate(std::move(loss));
    agg.total_measurements = aggregate(std::move(meas));
    out.push_back(std::move(agg));
  }
  return out;
}

json optional_json(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

json aggregate_json(const std::optional<Aggregate>& a) {
  if (!a) return nullptr;
  return json{{"count", a->count}, {"median", a->median}, {"q1", a->q1}, {"q3", a->q3}, {"iqr", a->iqr()}};
}

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::optional<Aggregate> aggregate_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Aggregate{j.at("count").get<std::size_t>(), j.at("median").get<double>(), j.at("q1").get<double>(),
                   j.at("q3").get<double>()};
}

std::string cell_text(const std::optional<Aggregate>& a) {
  if (!a) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g [%.3g]", a->median, a->iqr());
  return buf;
}

}  // namespace

bool SummaryReport::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const SummaryRow& r) { return !r.ok; });
}

std::optional<Aggregate> aggregate(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  return Aggregate{values.size(), quantile(0.5), quantile(0.25), quantile(0.75)};
}

CellResult run_cell(const ExperimentConfig& config, std::size_t algorithm, std::uint64_t seed) {
  const AlgorithmSpec& spec = config.algorithms.at(algorithm);
  CellResult cell;
  cell.label = spec.label;
  cell.seed = seed;
  try {
    if (config.problem.kind == ProblemKind::surveillance) {
      const SurveillanceScenario scenario = make_surveillance(config.problem.surveillance);
      const std::size_t steps = config.stop.max_iterations ? *config.stop.max_iterations : 0;
      cell.trace = track_gcsa(scenario, spec.estimator, spec.gain.a(), steps, seed).trace;
    } else {
      const Benchmark bench = build_benchmark(config.problem);
      const AlgorithmConfig alg = build_algorithm(spec, num_agents(config.problem), base_dir(config));
      cell.trace = run(alg, bench, initial_condition(config, bench.dim()), config.stop, seed);
    }
  } catch (const RunDivergence& e) {
    cell.ok = false;
    cell.failure = e.what();
    cell.trace = e.partial_trace();
  } catch (const DivergenceError& e) {
    cell.ok = false;
    cell.failure = e.what();
  }
  return cell;
}

std::filesystem::path trace_file_name(const ExperimentConfig& config, const std::string& label, std::uint64_t seed) {
  return config.name + "__" + label + "__seed" + std::to_string(seed) + ".csv";
}

GridResult run_grid(const ExperimentConfig& config, const GridOptions& options) {
  const std::filesystem::path dir = options.out_dir ? *options.out_dir : config.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  }

  struct Job {
    std::size_t algorithm;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
    for (std::uint64_t seed : config.seeds) {
      jobs.push_back({a, seed});
    }
  }

  GridResult result;
  result.cells.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        CellResult cell = run_cell(config, jobs[j].algorithm, jobs[j].seed);
        cell.trace_path = dir / trace_file_name(config, cell.label, cell.seed);
        emit_trace(cell.trace, cell.trace_path);
        if (options.on_cell) options.on_cell(cell);
        result.cells[j] = std::move(cell);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(jobs.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }

  result.summary = summarize(config, result.cells);
  result.summary_path = dir / (config.name + "__summary.json");
  write_summary(result.summary, result.summary_path);
  return result;
}

SummaryReport summarize(const ExperimentConfig& config, const std::vector<CellResult>& cells) {
  SummaryReport report;
  report.name = config.name;
  report.problem = to_string(config.problem.kind);
  for (const AlgorithmSpec& alg : config.algorithms) {
    for (std::uint64_t seed : config.seeds) {
      const auto it = std::find_if(cells.begin(), cells.end(),
                                   [&](const CellResult& c) { return c.label == alg.label && c.seed == seed; });
      if (it != cells.end()) {
        report.rows.push_back(row_from(*it));
      }
    }
  }
  report.aggregates = aggregates_for(config, report.rows);
  return report;
}

SummaryReport summarize_traces(const ExperimentConfig& config, const std::filesystem::path& dir,
                               const std::vector<CellFailure>& failures) {
  std::vector<CellResult> cells;
  for (const AlgorithmSpec& alg : config.algorithms) {
    for (std::uint64_t seed : config.seeds) {
      CellResult cell;
      cell.label = alg.label;
      cell.seed = seed;
      cell.trace_path = dir / trace_file_name(config, alg.label, seed);
      cell.trace = read_trace(cell.trace_path);
      for (const CellFailure& f : failures) {
        if (f.label == alg.label && f.seed == seed) {
          cell.ok = false;
          cell.failure = f.message;
        }
      }
      cells.push_back(std::move(cell));
    }
  }
  return summarize(config, cells);
}

std::string summary_json(const SummaryReport& report) {
  json rows = json::array();
  for (const SummaryRow& r : report.rows) {
    json row{{"label", r.label},
             {"seed", r.seed},
             {"status", r.ok ? "ok" : "failed"},
             {"iterations", r.iterations},
             {"final_error", optional_json(r.final_error)},
             {"final_consensus_error", optional_json(r.final_consensus_error)},
             {"final_loss", optional_json(r.final_loss)},
             {"total_measurements", r.total_measurements}};
    if (!r.ok) row["failure"] = r.failure;
    rows.push_back(std::move(row));
  }
  json aggs = json::array();
  for (const AlgorithmAggregate& a : report.aggregates) {
    aggs.push_back({{"label", a.label},
                    {"runs", a.runs},
                    {"failures", a.failures},
                    {"final_error", aggregate_json(a.final_error)},
                    {"final_consensus_error", aggregate_json(a.final_consensus_error)},
                    {"final_loss", aggregate_json(a.final_loss)},
                    {"total_measurements", aggregate_json(a.total_measurements)}});
  }
  const json doc{{"name", report.name}, {"problem", report.problem}, {"runs", rows}, {"aggregates", aggs}};
  return doc.dump(2) + "\n";
}

SummaryReport summary_from_json(const std::string& text) {
  SummaryReport report;
  try {
    const json doc = json::parse(text);
    report.name = doc.at("name").get<std::string>();
    report.problem = doc.at("problem").get<std::string>();
    for (const json& r : doc.at("runs")) {
      SummaryRow row;
      row.label = r.at("label").get<std::string>();
      row.seed = r.at("seed").get<std::uint64_t>();
      row.ok = r.at("status").get<std::string>() == "ok";
      if (!row.ok) row.failure = r.value("failure", std::string());
      row.iterations = r.at("iterations").get<std::uint64_t>();
      row.final_error = optional_from(r.at("final_error"));
      row.final_consensus_error = optional_from(r.at("final_consensus_error"));
      row.final_loss = optional_from(r.at("final_loss"));
      row.total_measurements = r.at("total_measurements").get<std::uint64_t>();
      report.rows.push_back(std::move(row));
    }
    for (const json& a : doc.at("aggregates")) {
      AlgorithmAggregate agg;
      agg.label = a.at("label").get<std::string>();
      agg.runs = a.at("runs").get<std::size_t>();
      agg.failures = a.at("failures").get<std::size_t>();
      agg.final_error = aggregate_from(a.at("final_error"));
      agg.final_consensus_error = aggregate_from(a.at("final_consensus_error"));
      agg.final_loss = aggregate_from(a.at("final_loss"));
      agg.total_measurements = aggregate_from(a.at("total_measurements"));
      report.aggregates.push_back(std::move(agg));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed summary: ") + e.what());
  }
  return report;
}

void write_summary(const SummaryReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write summary '" + path.string() + "'");
  }
  out << summary_json(report);
  out.flush();
  if (!out) {
    throw IoError("failed writing summary '" + path.string() + "'");
  }
}

std::string comparison_table(const std::vector<SummaryReport>& reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %-16s %5s %6s  %-22s %-22s %-22s %-22s\n", "config", "algorithm", "runs",
                "failed", "final_error", "consensus_error", "final_loss", "measurements");
  out << line;
  for (const SummaryReport& report : reports) {
    for (const AlgorithmAggregate& a : report.aggregates) {
      std::snprintf(line, sizeof line, "%-20s %-16s %5zu %6zu  %-22s %-22s %-22s %-22s\n", report.name.c_str(),
                    a.label.c_str(), a.runs, a.failures, cell_text(a.final_error).c_str(),
                    cell_text(a.final_consensus_error).c_str(), cell_text(a.final_loss).c_str(),
                    cell_text(a.total_measurements).c_str());
      out << line;
    }
  }
  out << "cells show median [IQR] over successful seeds\n";
  return out.str();
}

}  // namespace masa::bench
