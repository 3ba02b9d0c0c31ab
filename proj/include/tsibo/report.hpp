/*
 Copyright 2026 The tsibo authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef TSIBO_REPORT_HPP
#define TSIBO_REPORT_HPP

#include <map>
#include <string>
#include <vector>

#include "tsibo/campaign.hpp"
#include "tsibo/episode.hpp"

namespace tsibo {

// One JSON object per episode, lexicographically ordered keys, full
// round-trip float precision. Timings are deliberately not serialized so
// identical seeds and configs give byte-identical files.
void write_run_jsonl(const RunLog& log, const std::string& path);
[[nodiscard]] std::string run_jsonl_string(const RunLog& log);
[[nodiscard]] RunLog read_run_jsonl(const std::string& path);

// Step/checkpoint line-delimited records of a single episode trace.
void write_trace_jsonl(const EpisodeResult& result, const std::string& path);

// CSV columns: method,step,min,median,max; one row per method and grid step.
void write_curves_csv(const std::vector<std::pair<std::string, Envelope>>& envelopes,
                      const std::string& path);
[[nodiscard]] std::string curves_csv_string(const std::vector<std::pair<std::string, Envelope>>& envelopes);

// Min-max bands plus median lines, one series per method.
void write_envelope_svg(const std::vector<std::pair<std::string, Envelope>>& envelopes,
                        const std::string& path);

// Aggregates logs by method and writes curves.csv and envelopes.svg.
void emit_report(const std::vector<RunLog>& logs, const std::string& out_dir, long grid_stride);

[[nodiscard]] std::string run_log_filename(Method method, std::uint64_t seed);

}  // namespace tsibo

#endif  // TSIBO_REPORT_HPP
