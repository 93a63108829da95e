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
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hiqlip/estimate.hpp"
#include "hiqlip/matrix.hpp"
#include "hiqlip/netio.hpp"

namespace hiqlip {

using Spin = std::int8_t;

/// Which part of a bipartite sign problem a variable belongs to. Matching
/// during coarsening only merges vertices with equal sides.
enum class VertexSide : std::uint8_t { row, column, pinned };

struct Coupling {
    std::size_t i;
    std::size_t j;
    double weight;
};

/// Ising instance with energy(s) = -sum_{i<j} J_ij s_i s_j - sum_i h_i s_i.
/// Couplings are stored once per unordered pair with i < j, sorted, with
/// duplicate pairs summed. Lowest energy is the goal.
class CouplingProblem {
public:
    CouplingProblem() = default;
    CouplingProblem(std::size_t n_vars, std::vector<Coupling> couplings, std::vector<double> fields = {},
                    std::map<std::size_t, Spin> pinned = {}, std::vector<VertexSide> sides = {});

    std::size_t n_vars() const noexcept { return n_vars_; }
    const std::vector<Coupling>& couplings() const noexcept { return couplings_; }
    /// Always n_vars long (zeros when the problem has no linear terms).
    const std::vector<double>& fields() const noexcept { return fields_; }
    bool has_fields() const noexcept { return has_fields_; }
    const std::map<std::size_t, Spin>& pinned() const noexcept { return pinned_; }
    /// Empty when the problem carries no bipartite structure.
    const std::vector<VertexSide>& sides() const noexcept { return sides_; }
    std::size_t free_count() const noexcept { return n_vars_ - pinned_.size(); }

private:
    std::size_t n_vars_ = 0;
    std::vector<Coupling> couplings_;
    std::vector<double> fields_;
    bool has_fields_ = false;
    std::map<std::size_t, Spin> pinned_;
    std::vector<VertexSide> sides_;
};

struct SpinAssignment {
    std::vector<Spin> spins;
    double energy = 0.0;
};

/// Throws std::invalid_argument on a length mismatch or a non +-1 entry.
double energy(const CouplingProblem& problem, std::span<const Spin> spins);

enum class Backend { exhaustive, annealing, remote };

std::string_view to_string(Backend backend);
Backend parse_backend(std::string_view text);

struct SolverConfig {
    Backend backend = Backend::annealing;
    std::uint64_t seed = 0;
    std::size_t num_reads = 16;
    std::size_t sweeps = 1000;
    // Inverse temperatures in units of the largest |coefficient| of the problem.
    double beta_min = 0.1;
    double beta_max = 10.0;
    std::size_t max_vars_exhaustive = 24;
    std::optional<std::string> remote_endpoint;
    std::size_t timeout_ms = 30000;
    // Run annealing reads on worker threads. Results do not depend on it.
    bool parallel_reads = false;

    void validate() const;
    nlohmann::json to_json() const;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pinned variables folded into linear fields of the remaining ones.
struct FreeProblem {
    CouplingProblem problem;
    std::vector<std::size_t> free_index;  // free variable -> original variable
    double offset = 0.0;                  // energy contribution of pinned-pinned terms and pinned fields
};

FreeProblem fold_pinned(const CouplingProblem& problem);

/// Lowest-energy assignment found; deterministic for a fixed config.
/// Pinned variables keep their values. Throws SolverError.
SpinAssignment solve(const CouplingProblem& problem, const SolverConfig& cfg);

/// Bipartite sign problem for max x^T A y: spins 0..n-1 are rows, n..n+m-1
/// columns, coupling (i, n+j) = a_ij.
CouplingProblem build_cut_problem(const Matrix& a);

/// Exact encoding of max_{v in {0,1}^m} ||A v||_1 for A = W^T diag(u):
/// spins x (n rows), z (m columns) and one spin pinned to +1, coupled to x_i
/// with (A 1)_i. The optimum is half of minus the minimum energy.
CouplingProblem build_fgl_problem(const ClassReduction& red);

/// ||A||_{inf->1} as minus the best energy of build_cut_problem(A). Exact
/// with the exhaustive backend, otherwise a witnessed lower bound.
Estimate cut_norm_inf1(const Matrix& a, const SolverConfig& cfg);

}  // namespace hiqlip
