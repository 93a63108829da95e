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
#include <cmath>

#include "httplib.h"

#include "hiqlip/solvers.hpp"

namespace hiqlip::backend {

nlohmann::json remote_request(const CouplingProblem& problem, const SolverConfig& cfg) {
    nlohmann::json linear = nlohmann::json::array();
    const auto& h = problem.fields();
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] != 0.0) linear.push_back({i, h[i]});
    nlohmann::json quadratic = nlohmann::json::array();
    for (const auto& c : problem.couplings()) quadratic.push_back({c.i, c.j, c.weight});
    return {{"num_vars", problem.n_vars()},
            {"linear", std::move(linear)},
            {"quadratic", std::move(quadratic)},
            {"num_reads", cfg.num_reads},
            {"timeout_ms", cfg.timeout_ms}};
}

std::vector<Spin> parse_remote_response(const CouplingProblem& problem, const nlohmann::json& response) {
    if (!response.is_object() || !response.contains("assignments") || !response.contains("energies"))
        throw SolverError("remote solver: response lacks \"assignments\" or \"energies\"");
    const auto& assignments = response["assignments"];
    const auto& energies = response["energies"];
    if (!assignments.is_array() || !energies.is_array() || assignments.size() != energies.size() || assignments.empty())
        throw SolverError("remote solver: assignments and energies must be non-empty arrays of equal length");

    std::size_t best = 0;
    for (std::size_t r = 0; r < energies.size(); ++r) {
        if (!energies[r].is_number()) throw SolverError("remote solver: non-numeric energy");
        if (energies[r].get<double>() < energies[best].get<double>()) best = r;
    }
    const auto& chosen = assignments[best];
    if (!chosen.is_array() || chosen.size() != problem.n_vars())
        throw SolverError("remote solver: assignment length " + std::to_string(chosen.size()) + ", expected " +
                          std::to_string(problem.n_vars()));
    std::vector<Spin> spins;
    spins.reserve(chosen.size());
    for (const auto& v : chosen) {
        if (!v.is_number_integer() || (v.get<int>() != 1 && v.get<int>() != -1))
            throw SolverError("remote solver: assignment entries must be +1 or -1");
        spins.push_back(static_cast<Spin>(v.get<int>()));
    }
    const double reported = energies[best].get<double>();
    const double local = energy(problem, spins);
    if (std::abs(reported - local) > 1e-6 * std::max(1.0, std::abs(local)))
        throw SolverError("remote solver: reported energy " + std::to_string(reported) +
                          " disagrees with local recomputation " + std::to_string(local));
    return spins;
}

std::vector<Spin> remote(const CouplingProblem& problem, const SolverConfig& cfg) {
    if (!cfg.remote_endpoint) throw SolverError("remote solver: no endpoint configured");
    std::string base = *cfg.remote_endpoint;
    while (!base.empty() && base.back() == '/') base.pop_back();

    // Split "scheme://host:port/prefix" so that a path prefix is kept.
    std::string prefix;
    if (auto scheme = base.find("://"); scheme != std::string::npos) {
        if (auto slash = base.find('/', scheme + 3); slash != std::string::npos) {
            prefix = base.substr(slash);
            base.resize(slash);
        }
    }

    httplib::Client client(base);
    if (!client.is_valid()) throw SolverError("remote solver: invalid endpoint " + *cfg.remote_endpoint);
    const auto timeout = std::chrono::milliseconds(cfg.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    const std::string body = remote_request(problem, cfg).dump();
    auto res = client.Post(prefix + "/v1/solve", body, "application/json");
    if (!res)
        throw SolverError("remote solver: request to " + *cfg.remote_endpoint + " failed (" +
                          httplib::to_string(res.error()) + ")");
    if (res->status != 200)
        throw SolverError("remote solver: HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw SolverError(std::string("remote solver: malformed response: ") + e.what());
    }
    return parse_remote_response(problem, parsed);
}

}  // namespace hiqlip::backend
