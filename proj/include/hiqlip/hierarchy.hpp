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
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hiqlip/cutnorm.hpp"
#include "hiqlip/estimate.hpp"
#include "hiqlip/matrix.hpp"
#include "hiqlip/netio.hpp"

namespace hiqlip {

/// One level of the multilevel scheme. `adjacency` is symmetric with a zero
/// diagonal; its entries are the Ising couplings of that level.
struct LevelGraph {
    Matrix adjacency;
    std::vector<VertexSide> sides;
    std::vector<double> fields;
    std::vector<Spin> pinned_spin;  // 0 for free vertices

    std::size_t size() const noexcept { return sides.size(); }
    bool is_pinned(std::size_t v) const noexcept { return pinned_spin[v] != 0; }
    std::size_t free_count() const noexcept;
};

LevelGraph to_level_graph(const CouplingProblem& problem);
CouplingProblem to_problem(const LevelGraph& graph);
double energy(const LevelGraph& graph, std::span<const Spin> spins);

struct Embedding {
    std::size_t dim = 0;
    std::vector<double> positions;  // size() * dim, row per vertex
    double initial_objective = 0.0;
    double objective = 0.0;

    std::span<const double> position(std::size_t v) const { return {positions.data() + v * dim, dim}; }
};

/// sum over edges of |a_ij| * ||x_i - x_j||.
double embedding_objective(const LevelGraph& graph, const Embedding& emb);

/// Random points on the unit sphere, then `iters` rounds of projected
/// descent on embedding_objective (each vertex moves against its gradient
/// scaled by 1/weighted degree, then is renormalized). Returns the best
/// round, so objective <= initial_objective.
Embedding embed(const LevelGraph& graph, std::size_t dim, std::uint64_t seed, std::size_t iters,
                double step = 0.05);

/// Merge map between two adjacent levels. Coarse vertex ids are assigned in
/// order of each group's smallest fine vertex.
struct Matching {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::size_t> singles;
    std::vector<std::size_t> vertex_map;  // fine -> coarse
    std::size_t coarse_size = 0;
};

/// Coarse graph for a matching: A_c = P^T A_f P with the diagonal dropped,
/// fields summed per group.
LevelGraph contract(const LevelGraph& fine, const Matching& matching);

/// Greedy matching by ascending embedding distance among unmatched free
/// vertices on the same side (ties by lowest index pair), then contract().
std::pair<LevelGraph, Matching> coarsen_once(const LevelGraph& graph, const Embedding& emb);

struct Hierarchy {
    std::vector<LevelGraph> levels;  // finest first
    std::vector<Matching> matchings;  // matchings[k] maps level k to k+1
};

/// Node selection rule for refinement subproblems.
enum class Selection { abs, signed_gain };

struct HiqConfig {
    SolverConfig solver;
    std::size_t qubit_budget = 100;
    std::size_t embed_dim = 8;
    std::size_t embed_iters = 50;
    double embed_step = 0.05;
    Selection selection = Selection::abs;
    std::size_t patience = 3;
    std::size_t max_refine_iters = 100;
    // Random activation restarts used by the layer-wise recursion.
    std::size_t recursion_restarts = 4;

    nlohmann::json to_json() const;
};

Hierarchy build_hierarchy(const CouplingProblem& problem, std::size_t budget, const HiqConfig& cfg);

/// Fine spin i takes the spin of coarse vertex F(i); energy is evaluated on
/// `fine`.
SpinAssignment project(const SpinAssignment& coarse, const Matching& matching, const LevelGraph& fine);

/// gain(i) = sum_j a_ij s_i s_j + h_i s_i, so flipping i changes the energy
/// by exactly 2 * gain(i).
std::vector<double> gains(const LevelGraph& graph, std::span<const Spin> spins);

struct RefineResult {
    SpinAssignment assignment;
    std::size_t iterations = 0;
    std::vector<double> energy_trace;  // start energy, then every accepted energy
};

RefineResult refine_level(const LevelGraph& graph, const SpinAssignment& start, std::size_t k,
                          const HiqConfig& cfg, std::uint64_t stream = 0);

struct LevelTrace {
    std::size_t level = 0;
    std::size_t vertices = 0;
    double energy_before = 0.0;
    double energy_after = 0.0;
    std::size_t iterations = 0;
};

nlohmann::json to_json(const LevelTrace& t);

struct MultilevelResult {
    SpinAssignment assignment;
    std::vector<LevelTrace> trace;  // coarsest first
    std::size_t levels = 1;
    std::size_t refine_iterations = 0;
    bool exact = false;  // solved in one exhaustive call
};

/// Direct solve when the free variables fit the budget, otherwise
/// coarsen, solve the coarsest level, then project and refine level by
/// level.
MultilevelResult minimize(const CouplingProblem& problem, const HiqConfig& cfg);

/// max_{v in {0,1}^m} ||A v||_1 for a reduction, through minimize().
Estimate fgl_two_layer(const ClassReduction& red, const HiqConfig& cfg);

Estimate hiq_lip_two_layer(const Network& net, std::size_t class_index, const HiqConfig& cfg);

}  // namespace hiqlip
