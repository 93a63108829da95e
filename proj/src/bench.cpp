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

#include "hiqlip/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "hiqlip/multilayer.hpp"

namespace hiqlip {

const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names{"hiq", "hiq-mp-a", "hiq-mp-b", "block", "mp", "sample", "bf", "recursion"};
    return names;
}

bool is_known_method(std::string_view name) {
    const auto& names = method_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

namespace {

Estimate run_method_cached(const Network& net, std::string_view method, std::size_t class_index,
                           const MethodOptions& opts, std::optional<PairConstants>& pairs) {
    if (!is_known_method(method)) throw std::invalid_argument("unknown method: " + std::string(method));
    Estimate est;
    if (method == "mp") {
        est = mp_bound(net, class_index);
    } else if (method == "sample") {
        est = sampling_lower_bound(net, class_index, opts.sampling);
    } else if (method == "bf") {
        est = brute_force_fgl(net, class_index, opts.bf_cap);
    } else if (method == "recursion") {
        est = layerwise_recursion(net, class_index, opts.hiq);
    } else if (method == "block") {
        est = block_product(net, class_index, std::min(opts.block_size, net.depth()), opts.hiq);
    } else if (net.depth() == 2) {
        // hiq, hiq-mp-a and hiq-mp-b coincide on one hidden layer.
        est = hiq_lip_two_layer(net, class_index, opts.hiq);
    } else if (method == "hiq") {
        est = layerwise_recursion(net, class_index, opts.hiq);
    } else {
        if (!pairs) pairs = pair_constants(net, class_index, opts.hiq);
        est = hiq_lip_multilayer(*pairs, method == "hiq-mp-a" ? MpVariant::A : MpVariant::B);
    }
    est.config_digest = config_digest({{"method", method}, {"estimator", est.config_digest}});
    est.method = std::string(method);
    return est;
}

std::string format_double(double v, const char* fmt = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::size_t method_rank(const std::vector<std::string>& methods, const std::string& m) {
    return static_cast<std::size_t>(std::find(methods.begin(), methods.end(), m) - methods.begin());
}

}  // namespace

Estimate run_method(const Network& net, std::string_view method, std::size_t class_index, const MethodOptions& opts) {
    std::optional<PairConstants> pairs;
    return run_method_cached(net, method, class_index, opts, pairs);
}

std::string_view to_string(Suite suite) { return suite == Suite::two_layer ? "two-layer" : "multi-layer"; }

Suite parse_suite(std::string_view text) {
    if (text == "two-layer") return Suite::two_layer;
    if (text == "multi-layer") return Suite::multi_layer;
    throw std::invalid_argument("unknown suite: " + std::string(text));
}

Network bench_network(const BenchConfig& cfg, std::size_t size, std::uint64_t seed) {
    std::vector<std::size_t> dims{cfg.input_dim};
    if (cfg.suite == Suite::two_layer) {
        dims.push_back(size);
    } else {
        if (size < 2) throw std::invalid_argument("multi-layer suite: depth must be >= 2");
        for (std::size_t l = 0; l + 1 < size; ++l) dims.push_back(cfg.hidden_width);
    }
    dims.push_back(cfg.outputs);
    return generate_synthetic(seed, dims, cfg.scale);
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg, std::vector<std::string>* skipped) {
    if (cfg.methods.empty()) throw std::invalid_argument("bench: empty method list");
    if (cfg.sizes.empty()) throw std::invalid_argument("bench: empty size list");
    if (cfg.seeds.empty()) throw std::invalid_argument("bench: empty seed list");
    for (const auto& m : cfg.methods)
        if (!is_known_method(m)) throw std::invalid_argument("unknown method: " + m);
    if (cfg.class_index >= cfg.outputs)
        throw std::invalid_argument("bench: class index " + std::to_string(cfg.class_index) +
                                    " out of range for " + std::to_string(cfg.outputs) + " outputs");

    std::vector<BenchRow> rows;
    for (std::size_t size : cfg.sizes)
        for (std::uint64_t seed : cfg.seeds) {
            const Network net = bench_network(cfg, size, seed);
            std::optional<PairConstants> pairs;
            for (const auto& method : cfg.methods) {
                try {
                    rows.push_back({std::string(to_string(cfg.suite)), size, seed,
                                    run_method_cached(net, method, cfg.class_index, cfg.options, pairs)});
                } catch (const RefusalError& e) {
                    if (skipped)
                        skipped->push_back(std::string(to_string(cfg.suite)) + " size=" + std::to_string(size) +
                                           " seed=" + std::to_string(seed) + " method=" + method + ": " + e.what());
                }
            }
        }
    std::stable_sort(rows.begin(), rows.end(), [&](const BenchRow& a, const BenchRow& b) {
        if (a.width_or_depth != b.width_or_depth) return a.width_or_depth < b.width_or_depth;
        if (a.seed != b.seed) return a.seed < b.seed;
        return method_rank(cfg.methods, a.estimate.method) < method_rank(cfg.methods, b.estimate.method);
    });
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "suite,width_or_depth,seed,method,value,bound_kind,wall_time_s\n";
    for (const auto& r : rows)
        out << r.suite << ',' << r.width_or_depth << ',' << r.seed << ',' << r.estimate.method << ','
            << format_double(r.estimate.value) << ',' << to_string(r.estimate.bound_kind) << ','
            << format_double(r.estimate.wall_time_s, "%.6f") << '\n';
    return out.str();
}

std::string bench_jsonl(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    for (const auto& r : rows) {
        nlohmann::json j = to_json(r.estimate);
        j["suite"] = r.suite;
        j["width_or_depth"] = r.width_or_depth;
        j["seed"] = r.seed;
        out << j.dump() << '\n';
    }
    return out.str();
}

std::string bench_summary(const std::vector<BenchRow>& rows) {
    struct Acc {
        std::size_t n = 0;
        double sum = 0.0, lo = 0.0, hi = 0.0;
    };
    std::map<std::tuple<std::string, std::size_t, std::string>, Acc> groups;
    std::vector<std::tuple<std::string, std::size_t, std::string>> order;
    for (const auto& r : rows) {
        auto key = std::make_tuple(r.suite, r.width_or_depth, r.estimate.method);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        Acc& a = it->second;
        const double v = r.estimate.value;
        a.lo = a.n == 0 ? v : std::min(a.lo, v);
        a.hi = a.n == 0 ? v : std::max(a.hi, v);
        a.sum += v;
        ++a.n;
    }
    std::ostringstream out;
    out << "suite,width_or_depth,method,n,mean,min,max\n";
    for (const auto& key : order) {
        const Acc& a = groups[key];
        out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ',' << a.n << ','
            << format_double(a.sum / static_cast<double>(a.n)) << ',' << format_double(a.lo) << ','
            << format_double(a.hi) << '\n';
    }
    return out.str();
}

std::string bench_traces(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    for (const auto& r : rows)
        for (const auto& t : r.estimate.trace) {
            if (!t.is_object()) continue;
            nlohmann::json j = t;
            j["suite"] = r.suite;
            j["width_or_depth"] = r.width_or_depth;
            j["seed"] = r.seed;
            j["method"] = r.estimate.method;
            out << j.dump() << '\n';
        }
    return out.str();
}

}  // namespace hiqlip
