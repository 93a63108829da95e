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

#include <vector>

#include "hiqlip/cutnorm.hpp"

// Backends operate on problems without pinned variables; solve() folds pins
// away before dispatching here.
namespace hiqlip::backend {

std::vector<Spin> exhaustive(const CouplingProblem& problem, const SolverConfig& cfg);
std::vector<Spin> annealing(const CouplingProblem& problem, const SolverConfig& cfg);
std::vector<Spin> remote(const CouplingProblem& problem, const SolverConfig& cfg);

/// Single annealing read; exposed for determinism tests.
SpinAssignment anneal_read(const CouplingProblem& problem, const SolverConfig& cfg, std::size_t read);

nlohmann::json remote_request(const CouplingProblem& problem, const SolverConfig& cfg);

/// Picks the lowest reported energy and cross-checks it against a local
/// recomputation (relative tolerance 1e-6). Throws SolverError otherwise.
std::vector<Spin> parse_remote_response(const CouplingProblem& problem, const nlohmann::json& response);

}  // namespace hiqlip::backend
