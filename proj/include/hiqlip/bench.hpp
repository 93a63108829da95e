// Copyright 2026 The hiqlip Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hiqlip/baselines.hpp"
#include "hiqlip/estimate.hpp"
#include "hiqlip/hierarchy.hpp"
#include "hiqlip/netio.hpp"

namespace hiqlip {

/// Knobs shared by `estimate` and `bench`.
struct MethodOptions {
    HiqConfig hiq;
    SamplingConfig sampling;
    std::size_t bf_cap = kDefaultBruteForceCap;
    std::size_t block_size = 2;
};

/// Known names: hiq, hiq-mp-a, hiq-mp-b, block, mp, sample, bf, recursion.
const std::vector<std::string>& method_names();
bool is_known_method(std::string_view name);

/// Runs one method by name. Throws std::invalid_argument for an unknown
/// method and RefusalError when bf is over its cap.
Estimate run_method(const Network& net, std::string_view method, std::size_t class_index, const MethodOptions& opts);

enum class Suite { two_layer, multi_layer };

std::string_view to_string(Suite suite);
Suite parse_suite(std::string_view text);

struct BenchConfig {
    Suite suite = Suite::two_layer;
    std::vector<std::size_t> sizes;  // hidden widths (two-layer) or depths (multi-layer)
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> methods;
    std::size_t input_dim = 8;
    std::size_t outputs = 10;
    std::size_t hidden_width = 8;  // multi-layer suite
    std::size_t class_index = 8;
    double scale = 1.0;
    MethodOptions options;
};

struct BenchRow {
    std::string suite;
    std::size_t width_or_depth = 0;
    std::uint64_t seed = 0;
    Estimate estimate;
};

/// Network for one bench cell.
Network bench_network(const BenchConfig& cfg, std::size_t size, std::uint64_t seed);

/// One row per (size, seed, method), sorted by (size, seed, method order).
/// Cells refused by bf are skipped and reported through `skipped`.
std::vector<BenchRow> run_bench(const BenchConfig& cfg, std::vector<std::string>* skipped = nullptr);

std::string bench_csv(const std::vector<BenchRow>& rows);
std::string bench_jsonl(const std::vector<BenchRow>& rows);
/// Mean/min/max of each (size, method) across seeds, as CSV.
std::string bench_summary(const std::vector<BenchRow>& rows);
/// Level traces of hiq rows as JSON lines, tagged with the row.
std::string bench_traces(const std::vector<BenchRow>& rows);

}  // namespace hiqlip
