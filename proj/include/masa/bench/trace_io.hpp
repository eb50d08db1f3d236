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

#ifndef MASA_BENCH_TRACE_IO_HPP
#define MASA_BENCH_TRACE_IO_HPP

#include <filesystem>
#include <iosfwd>

#include "masa/algorithms.hpp"

namespace masa::bench {

/// Header of every trace file.
inline constexpr const char* kTraceHeader = "k,gain,error,consensus_error,loss,loss_evals,grad_evals";

/// One CSV row per record; absent metrics are written as empty fields and
/// reals with 17 significant digits, so reading back is exact.
void write_trace(std::ostream& out, const RunTrace& trace);
/// Throws IoError naming the path when the file cannot be written.
void emit_trace(const RunTrace& trace, const std::filesystem::path& path);

RunTrace read_trace(std::istream& in, const std::string& origin = "<stream>");
RunTrace read_trace(const std::filesystem::path& path);

}  // namespace masa::bench

#endif  // MASA_BENCH_TRACE_IO_HPP
