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

#include "masa/bench/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace masa::bench {

namespace {

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string optional_real(const std::optional<double>& v) { return v ? real(*v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

double parse_real(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    throw IoError(where + ": bad number '" + s + "'");
  }
  return v;
}

std::uint64_t parse_count(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || s.front() == '-') {
    throw IoError(where + ": bad count '" + s + "'");
  }
  return v;
}

}  // namespace

void write_trace(std::ostream& out, const RunTrace& trace) {
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : trace.records) {
    out << r.k << ',' << real(r.gain) << ',' << optional_real(r.error) << ',' << optional_real(r.consensus_error)
        << ',' << optional_real(r.loss) << ',' << r.measurements.loss_evals << ',' << r.measurements.grad_evals
        << '\n';
  }
}

void emit_trace(const RunTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write trace '" + path.string() + "'");
  }
  write_trace(out, trace);
  out.flush();
  if (!out) {
    throw IoError("failed writing trace '" + path.string() + "'");
  }
}

RunTrace read_trace(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw IoError(origin + ": missing trace header");
  }
  RunTrace trace;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    const std::string where = origin + ":" + std::to_string(lineno);
    const auto f = split(line);
    if (f.size() != 7) {
      throw IoError(where + ": expected 7 fields, found " + std::to_string(f.size()));
    }
    TraceRecord r;
    r.k = parse_count(f[0], where);
    r.gain = parse_real(f[1], where);
    if (!f[2].empty()) r.error = parse_real(f[2], where);
    if (!f[3].empty()) r.consensus_error = parse_real(f[3], where);
    if (!f[4].empty()) r.loss = parse_real(f[4], where);
    r.measurements.loss_evals = parse_count(f[5], where);
    r.measurements.grad_evals = parse_count(f[6], where);
    trace.records.push_back(r);
  }
  return trace;
}

RunTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open trace '" + path.string() + "'");
  }
  return read_trace(in, path.string());
}

}  // namespace masa::bench
