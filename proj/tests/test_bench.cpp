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

#include <algorithm>
#include <map>
#include <sstream>

#include "doctest.h"

#include "hiqlip/bench.hpp"
#include "schema.hpp"

using namespace hiqlip;

namespace {

BenchConfig two_layer(std::vector<std::string> methods) {
    BenchConfig cfg;
    cfg.sizes = {8, 16};
    cfg.seeds = {1, 2};
    cfg.methods = std::move(methods);
    cfg.options.sampling.num_samples = 2000;
    return cfg;
}

std::map<std::string, double> values_of(const std::vector<BenchRow>& rows, std::size_t size, std::uint64_t seed) {
    std::map<std::string, double> v;
    for (const auto& r : rows)
        if (r.width_or_depth == size && r.seed == seed) v[r.estimate.method] = r.estimate.value;
    return v;
}

}  // namespace

TEST_CASE("method names") {
    CHECK(method_names().size() == 8);
    CHECK(is_known_method("hiq-mp-b"));
    CHECK_FALSE(is_known_method("geolip"));
    CHECK(parse_suite("multi-layer") == Suite::multi_layer);
    CHECK_THROWS(parse_suite("deep"));
}

TEST_CASE("two-layer table") {
    const auto rows = run_bench(two_layer({"hiq", "mp", "sample", "bf"}));
    CHECK(rows.size() == 16);
    for (std::uint64_t seed : {1, 2}) {
        std::size_t per_seed = 0;
        for (const auto& r : rows) per_seed += r.seed == seed;
        CHECK(per_seed == 8);
    }
    for (std::size_t size : {8, 16})
        for (std::uint64_t seed : {1, 2}) {
            auto v = values_of(rows, size, seed);
            CHECK(v["sample"] <= v["bf"] + 1e-9 * v["bf"]);
            CHECK(v["bf"] <= v["mp"] + 1e-9 * v["mp"]);
            CHECK(v["hiq"] <= v["bf"] + 1e-9 * v["bf"]);
        }
    // rows come out grouped by size, seed, then requested method order
    CHECK(rows[0].width_or_depth == 8);
    CHECK(rows[0].seed == 1);
    CHECK(rows[0].estimate.method == "hiq");
    CHECK(rows[3].estimate.method == "bf");
}

TEST_CASE("bench output formats") {
    const auto rows = run_bench(two_layer({"mp", "bf"}));
    const std::string csv = bench_csv(rows);
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "suite,width_or_depth,seed,method,value,bound_kind,wall_time_s");
    std::size_t count = 0;
    for (std::string line; std::getline(lines, line);) {
        ++count;
        CHECK(std::count(line.begin(), line.end(), ',') == 6);
        CHECK(line.rfind("two-layer,", 0) == 0);
    }
    CHECK(count == rows.size());

    const auto s = schema::load(HIQLIP_SOURCE_DIR "/docs/estimate.schema.json");
    std::istringstream jl(bench_jsonl(rows));
    for (std::string line; std::getline(jl, line);) {
        const auto j = nlohmann::json::parse(line);
        CHECK(schema::errors_of(j, s).empty());
        auto record = j;
        for (const char* key : {"suite", "width_or_depth", "seed"}) record.erase(key);
        CHECK(to_json(estimate_from_json(j)) == record);
    }
    CHECK_FALSE(bench_summary(rows).empty());
}

TEST_CASE("bench edge cases") {
    CHECK_THROWS(run_bench(two_layer({})));
    CHECK_THROWS(run_bench(two_layer({"hiq", "nope"})));

    BenchConfig big = two_layer({"bf", "mp"});
    big.sizes = {30};
    std::vector<std::string> skipped;
    const auto rows = run_bench(big, &skipped);
    CHECK(rows.size() == 2);
    CHECK(skipped.size() == 2);
    for (const auto& r : rows) CHECK(r.estimate.method == "mp");
}

TEST_CASE("bench is deterministic") {
    const auto a = run_bench(two_layer({"hiq", "sample", "bf"}));
    const auto b = run_bench(two_layer({"hiq", "sample", "bf"}));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].estimate.value == b[i].estimate.value);
        CHECK(a[i].estimate.config_digest == b[i].estimate.config_digest);
    }
}

TEST_CASE("multi-layer table") {
    BenchConfig cfg;
    cfg.suite = Suite::multi_layer;
    cfg.sizes = {3, 4};
    cfg.seeds = {0};
    cfg.hidden_width = 5;
    cfg.methods = {"hiq-mp-a", "hiq-mp-b", "recursion", "block", "mp", "sample", "bf"};
    cfg.options.hiq.solver.backend = Backend::exhaustive;
    cfg.options.sampling.num_samples = 2000;
    const auto rows = run_bench(cfg);
    CHECK(rows.size() == 14);
    const auto d3 = values_of(rows, 3, 0);
    CHECK(d3.at("hiq-mp-a") == d3.at("hiq-mp-b"));
    const auto d4 = values_of(rows, 4, 0);
    CHECK(d4.at("hiq-mp-b") == d4.at("hiq-mp-a") / 4.0);
    for (const auto& r : rows) {
        CHECK(r.suite == "multi-layer");
        CHECK(r.estimate.value >= 0.0);
    }
    const Network net = bench_network(cfg, 4, 0);
    CHECK(net.depth() == 4);
    CHECK(net.hidden_widths() == std::vector<std::size_t>{5, 5, 5});
}

TEST_CASE("estimate records round-trip") {
    Estimate e;
    e.method = "bf";
    e.value = 1.25;
    e.bound_kind = BoundKind::exact;
    e.solver_stats = {{"patterns", 16.0}};
    e.config_digest = config_digest({{"a", 1}});
    const auto j = to_json(e);
    CHECK(to_json(estimate_from_json(j)) == j);
    CHECK(config_digest(nlohmann::json::parse(j.dump())) == config_digest(j));
    CHECK(e.config_digest.size() == 16);
    CHECK(parse_bound_kind("upper") == BoundKind::upper);
    CHECK_THROWS(parse_bound_kind("maybe"));
}
