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

#include <bit>
#include <cstdint>
#include <limits>

#include "hiqlip/solvers.hpp"

namespace hiqlip::backend {

// Gray-code walk over all assignments with incremental local fields: one
// spin flips per step, so each step costs O(n). Without linear terms the
// energy is invariant under global negation and the last spin is fixed.
std::vector<Spin> exhaustive(const CouplingProblem& problem, const SolverConfig& cfg) {
    const std::size_t n = problem.n_vars();
    if (n > cfg.max_vars_exhaustive || n > 30)
        throw SolverError("exhaustive solver: " + std::to_string(n) + " variables exceed the cap");

    std::vector<double> j_dense(n * n, 0.0);
    for (const auto& c : problem.couplings()) {
        j_dense[c.i * n + c.j] = c.weight;
        j_dense[c.j * n + c.i] = c.weight;
    }
    std::vector<Spin> spins(n, 1);
    std::vector<double> local(problem.fields());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) local[i] += j_dense[i * n + j];

    double e = energy(problem, spins);
    double best = e;
    std::uint64_t best_code = 0;

    const std::size_t free_bits = problem.has_fields() ? n : n - 1;
    const std::uint64_t states = std::uint64_t{1} << free_bits;
    for (std::uint64_t g = 1; g < states; ++g) {
        const auto k = static_cast<std::size_t>(std::countr_zero(g));
        e += 2.0 * spins[k] * local[k];
        spins[k] = static_cast<Spin>(-spins[k]);
        const double delta = 2.0 * spins[k];
        const double* row = &j_dense[k * n];
        for (std::size_t j = 0; j < n; ++j) local[j] += delta * row[j];
        if (e < best) {
            best = e;
            best_code = g ^ (g >> 1);
        }
    }

    std::vector<Spin> out(n, 1);
    for (std::size_t k = 0; k < free_bits; ++k)
        if ((best_code >> k) & 1U) out[k] = -1;
    return out;
}

}  // namespace hiqlip::backend
