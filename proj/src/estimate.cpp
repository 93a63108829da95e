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

#include "hiqlip/estimate.hpp"

#include <cstdint>
#include <cstdio>
#include <stdexcept>

namespace hiqlip {

std::string_view to_string(BoundKind kind) {
    switch (kind) {
        case BoundKind::upper: return "upper";
        case BoundKind::lower: return "lower";
        case BoundKind::heuristic: return "heuristic";
        case BoundKind::exact: return "exact";
    }
    return "heuristic";
}

BoundKind parse_bound_kind(std::string_view text) {
    if (text == "upper") return BoundKind::upper;
    if (text == "lower") return BoundKind::lower;
    if (text == "heuristic") return BoundKind::heuristic;
    if (text == "exact") return BoundKind::exact;
    throw std::invalid_argument("unknown bound kind: " + std::string(text));
}

nlohmann::json to_json(const Estimate& est) {
    nlohmann::json j;
    j["method"] = est.method;
    j["value"] = est.value;
    j["bound_kind"] = to_string(est.bound_kind);
    j["wall_time_s"] = est.wall_time_s;
    j["solver_stats"] = est.solver_stats;
    j["config_digest"] = est.config_digest;
    if (!est.trace.empty()) j["trace"] = est.trace;
    return j;
}

Estimate estimate_from_json(const nlohmann::json& j) {
    Estimate est;
    est.method = j.at("method").get<std::string>();
    est.value = j.at("value").get<double>();
    est.bound_kind = parse_bound_kind(j.at("bound_kind").get<std::string>());
    est.wall_time_s = j.at("wall_time_s").get<double>();
    est.solver_stats = j.at("solver_stats").get<std::map<std::string, double>>();
    est.config_digest = j.at("config_digest").get<std::string>();
    if (auto t = j.find("trace"); t != j.end()) est.trace = *t;
    return est;
}

std::string config_digest(const nlohmann::json& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : config.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hiqlip
