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

#include <chrono>
#include <map>
#include <string>
#include <string_view>

#include "json.hpp"

namespace hiqlip {

enum class BoundKind { upper, lower, heuristic, exact };

std::string_view to_string(BoundKind kind);
BoundKind parse_bound_kind(std::string_view text);

/// Result record shared by every estimator.
struct Estimate {
    std::string method;
    double value = 0.0;
    BoundKind bound_kind = BoundKind::heuristic;
    double wall_time_s = 0.0;
    std::map<std::string, double> solver_stats;
    std::string config_digest;
    nlohmann::json trace = nlohmann::json::array();
};

nlohmann::json to_json(const Estimate& est);
Estimate estimate_from_json(const nlohmann::json& j);

/// FNV-1a 64 over the compact dump of `config`; nlohmann orders object
/// keys, so the digest does not depend on insertion order.
std::string config_digest(const nlohmann::json& config);

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace hiqlip
