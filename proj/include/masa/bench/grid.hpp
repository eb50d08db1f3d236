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

#ifndef MASA_BENCH_GRID_HPP
#define MASA_BENCH_GRID_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "masa/bench/config.hpp"

namespace masa::bench {

/// One (algorithm variant, seed) run.
struct CellResult {
  std::string label;
  std::uint64_t seed = 0;
  /// False when the run diverged; the trace then holds the records so far.
  bool ok = true;
  std::string failure;
  RunTrace trace;
  std::filesystem::path trace_path;
};

/// Median and interquartile range (linear interpolation between order
/// statistics) over the successful runs that report the metric.
struct Aggregate {
  std::size_t count = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

struct SummaryRow {
  std::string label;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string failure;
  std::uint64_t iterations = 0;
  std::optional<double> final_error;
  std::optional<double> final_consensus_error;
  std::optional<double> final_loss;
  std::uint64_t total_measurements = 0;
};

struct AlgorithmAggregate {
  std::string label;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::optional<Aggregate> final_error;
  std::optional<Aggregate> final_consensus_error;
  std::optional<Aggregate> final_loss;
  std::optional<Aggregate> total_measurements;
};

struct SummaryReport {
  std::string name;
  std::string problem;
  std::vector<SummaryRow> rows;
  std::vector<AlgorithmAggregate> aggregates;

  bool any_failed() const;
};

std::optional<Aggregate> aggregate(std::vector<double> values);

/// Runs one cell of the grid without touching the file system.
CellResult run_cell(const ExperimentConfig& config, std::size_t algorithm, std::uint64_t seed);

struct GridOptions {
  std::size_t jobs = 1;
  /// Overrides the config's output directory when set.
  std::optional<std::filesystem::path> out_dir;
  /// Called once per finished cell, from the worker that ran it.
  std::function<void(const CellResult&)> on_cell;
};

struct GridResult {
  std::vector<CellResult> cells;
  SummaryReport summary;
  std::filesystem::path summary_path;
};

/// Runs every (algorithm, seed) cell, writing `<name>__<label>__seed<seed>.csv`
/// per cell and `<name>__summary.json`. Divergent cells are recorded as
/// failed. Results do not depend on `jobs`.
GridResult run_grid(const ExperimentConfig& config, const GridOptions& options = {});

std::filesystem::path trace_file_name(const ExperimentConfig& config, const std::string& label, std::uint64_t seed);

/// Builds the summary from per-cell traces. Rows follow algorithm order,
/// then seed order.
SummaryReport summarize(const ExperimentConfig& config, const std::vector<CellResult>& cells);
struct CellFailure {
  std::string label;
  std::uint64_t seed = 0;
  std::string message;
};

/// Recomputes the summary from trace files in `dir`. Traces do not record
/// divergence, so failed cells are passed in.
SummaryReport summarize_traces(const ExperimentConfig& config, const std::filesystem::path& dir,
                               const std::vector<CellFailure>& failures = {});

std::string summary_json(const SummaryReport& report);
SummaryReport summary_from_json(const std::string& text);
void write_summary(const SummaryReport& report, const std::filesystem::path& path);

/// Fixed-width table of the per-algorithm aggregates of one or more reports.
std::string comparison_table(const std::vector<SummaryReport>& reports);

}  // namespace masa::bench

#endif  // MASA_BENCH_GRID_HPP
