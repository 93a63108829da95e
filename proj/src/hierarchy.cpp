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

#include "hiqlip/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "hiqlip/rng.hpp"

namespace hiqlip {

std::size_t LevelGraph::free_count() const noexcept {
    return static_cast<std::size_t>(std::count(pinned_spin.begin(), pinned_spin.end(), Spin{0}));
}

LevelGraph to_level_graph(const CouplingProblem& problem) {
    const std::size_t n = problem.n_vars();
    LevelGraph g;
    g.adjacency = Matrix(n, n);
    for (const auto& c : problem.couplings()) {
        g.adjacency(c.i, c.j) = c.weight;
        g.adjacency(c.j, c.i) = c.weight;
    }
    g.sides = problem.sides().empty() ? std::vector<VertexSide>(n, VertexSide::row) : problem.sides();
    g.fields = problem.fields();
    g.pinned_spin.assign(n, 0);
    for (const auto& [v, s] : problem.pinned()) {
        g.pinned_spin[v] = s;
        g.sides[v] = VertexSide::pinned;
    }
    return g;
}

CouplingProblem to_problem(const LevelGraph& graph) {
    const std::size_t n = graph.size();
    std::vector<Coupling> couplings;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (graph.adjacency(i, j) != 0.0) couplings.push_back({i, j, graph.adjacency(i, j)});
    std::map<std::size_t, Spin> pinned;
    for (std::size_t v = 0; v < n; ++v)
        if (graph.is_pinned(v)) pinned[v] = graph.pinned_spin[v];
    return CouplingProblem(n, std::move(couplings), graph.fields, std::move(pinned), graph.sides);
}

double energy(const LevelGraph& graph, std::span<const Spin> spins) {
    const std::size_t n = graph.size();
    if (spins.size() != n) throw std::invalid_argument("energy: spin vector length does not match graph");
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto row = graph.adjacency.row(i);
        for (std::size_t j = i + 1; j < n; ++j)
            if (row[j] != 0.0) e -= row[j] * spins[i] * spins[j];
    }
    for (std::size_t i = 0; i < n; ++i)
        if (graph.fields[i] != 0.0) e -= graph.fields[i] * spins[i];
    return e;
}

// --- embedding --------------------------------------------------------------

namespace {

struct Edge {
    std::size_t i;
    std::size_t j;
    double w;
};

std::vector<Edge> attraction_edges(const LevelGraph& graph) {
    std::vector<Edge> edges;
    const std::size_t n = graph.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (graph.adjacency(i, j) != 0.0) edges.push_back({i, j, std::abs(graph.adjacency(i, j))});
    return edges;
}

double distance(std::span<const double> a, std::span<const double> b) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(d2);
}

double objective_of(const std::vector<Edge>& edges, const std::vector<double>& pos, std::size_t dim) {
    double total = 0.0;
    for (const auto& e : edges)
        total += e.w * distance({pos.data() + e.i * dim, dim}, {pos.data() + e.j * dim, dim});
    return total;
}

void normalize(std::span<double> v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
}

}  // namespace

double embedding_objective(const LevelGraph& graph, const Embedding& emb) {
    return objective_of(attraction_edges(graph), emb.positions, emb.dim);
}

Embedding embed(const LevelGraph& graph, std::size_t dim, std::uint64_t seed, std::size_t iters, double step) {
    if (dim < 2) throw std::invalid_argument("embed: dimension must be >= 2");
    const std::size_t n = graph.size();
    Rng rng(seed);
    std::vector<double> pos(n * dim);
    for (std::size_t v = 0; v < n; ++v) {
        std::span<double> p(pos.data() + v * dim, dim);
        double norm2 = 0.0;
        while (norm2 < 1e-24) {
            norm2 = 0.0;
            for (double& x : p) {
                x = rng.normal();
                norm2 += x * x;
            }
        }
        normalize(p);
    }

    const auto edges = attraction_edges(graph);
    std::vector<double> degree(n, 0.0);
    for (const auto& e : edges) {
        degree[e.i] += e.w;
        degree[e.j] += e.w;
    }

    Embedding best{dim, pos, 0.0, 0.0};
    best.initial_objective = objective_of(edges, pos, dim);
    best.objective = best.initial_objective;

    std::vector<double> grad(n * dim);
    for (std::size_t it = 0; it < iters && !edges.empty(); ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (const auto& e : edges) {
            const double* xi = pos.data() + e.i * dim;
            const double* xj = pos.data() + e.j * dim;
            // Huber-smoothed pull: unit direction when far apart, proportional
            // to the offset inside radius 2*step so close pairs do not overshoot.
            const double d = std::max(distance({xi, dim}, {xj, dim}), 2.0 * step);
            for (std::size_t k = 0; k < dim; ++k) {
                const double g = e.w * (xi[k] - xj[k]) / d;
                grad[e.i * dim + k] += g;
                grad[e.j * dim + k] -= g;
            }
        }
        for (std::size_t v = 0; v < n; ++v) {
            if (degree[v] == 0.0) continue;
            std::span<double> p(pos.data() + v * dim, dim);
            for (std::size_t k = 0; k < dim; ++k) p[k] -= step * grad[v * dim + k] / degree[v];
            normalize(p);
        }
        const double obj = objective_of(edges, pos, dim);
        if (obj < best.objective) {
            best.objective = obj;
            best.positions = pos;
        }
    }
    return best;
}

// --- coarsening ---------------------------------------------------------------

LevelGraph contract(const LevelGraph& fine, const Matching& matching) {
    const std::size_t n = fine.size();
    const std::size_t c = matching.coarse_size;
    if (matching.vertex_map.size() != n) throw std::invalid_argument("contract: vertex map size mismatch");
    LevelGraph coarse;
    coarse.adjacency = Matrix(c, c);
    coarse.fields.assign(c, 0.0);
    coarse.sides.assign(c, VertexSide::row);
    coarse.pinned_spin.assign(c, 0);
    std::vector<bool> seen(c, false);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ci = matching.vertex_map[i];
        if (!seen[ci]) {
            seen[ci] = true;
            coarse.sides[ci] = fine.sides[i];
        }
        if (fine.is_pinned(i)) coarse.pinned_spin[ci] = fine.pinned_spin[i];
        coarse.fields[ci] += fine.fields[i];
        auto row = fine.adjacency.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (row[j] == 0.0) continue;
            const std::size_t cj = matching.vertex_map[j];
            if (ci != cj) coarse.adjacency(ci, cj) += row[j];
        }
    }
    return coarse;
}

std::pair<LevelGraph, Matching> coarsen_once(const LevelGraph& graph, const Embedding& emb) {
    const std::size_t n = graph.size();
    if (graph.free_count() <= 2) throw std::invalid_argument("coarsen_once: need more than two free vertices");
    if (emb.positions.size() != n * emb.dim) throw std::invalid_argument("coarsen_once: embedding size mismatch");

    std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        if (graph.is_pinned(i)) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (graph.is_pinned(j) || graph.sides[i] != graph.sides[j]) continue;
            double d2 = 0.0;
            auto pi = emb.position(i);
            auto pj = emb.position(j);
            for (std::size_t k = 0; k < emb.dim; ++k) d2 += (pi[k] - pj[k]) * (pi[k] - pj[k]);
            candidates.emplace_back(d2, i, j);
        }
    }
    std::sort(candidates.begin(), candidates.end());

    Matching m;
    std::vector<std::size_t> partner(n, n);
    for (const auto& [d2, i, j] : candidates) {
        if (partner[i] != n || partner[j] != n) continue;
        partner[i] = j;
        partner[j] = i;
        m.pairs.emplace_back(i, j);
    }
    m.vertex_map.assign(n, n);
    for (std::size_t v = 0; v < n; ++v) {
        if (partner[v] == n) {
            m.singles.push_back(v);
            m.vertex_map[v] = m.coarse_size++;
        } else if (partner[v] > v) {
            m.vertex_map[v] = m.coarse_size;
            m.vertex_map[partner[v]] = m.coarse_size++;
        }
    }
    LevelGraph coarse = contract(graph, m);
    return {std::move(coarse), std::move(m)};
}

nlohmann::json HiqConfig::to_json() const {
    return {{"solver", solver.to_json()},
            {"qubit_budget", qubit_budget},
            {"embed_dim", embed_dim},
            {"embed_iters", embed_iters},
            {"embed_step", embed_step},
            {"selection", selection == Selection::abs ? "abs" : "signed"},
            {"patience", patience},
            {"max_refine_iters", max_refine_iters},
            {"recursion_restarts", recursion_restarts}};
}

Hierarchy build_hierarchy(const CouplingProblem& problem, std::size_t budget, const HiqConfig& cfg) {
    if (budget < 4) throw std::invalid_argument("build_hierarchy: qubit budget must be >= 4");
    Hierarchy h;
    h.levels.push_back(to_level_graph(problem));
    while (h.levels.back().free_count() > budget) {
        const LevelGraph& level = h.levels.back();
        const Embedding emb =
            embed(level, cfg.embed_dim, derive_seed(cfg.solver.seed, 0x10000 + h.levels.size()), cfg.embed_iters,
                  cfg.embed_step);
        auto [coarse, matching] = coarsen_once(level, emb);
        if (coarse.free_count() >= level.free_count())
            throw std::runtime_error("build_hierarchy: no mergeable vertex pairs left");
        h.levels.push_back(std::move(coarse));
        h.matchings.push_back(std::move(matching));
    }
    return h;
}

// --- refinement ---------------------------------------------------------------

SpinAssignment project(const SpinAssignment& coarse, const Matching& matching, const LevelGraph& fine) {
    if (coarse.spins.size() != matching.coarse_size)
        throw std::invalid_argument("project: coarse assignment has " + std::to_string(coarse.spins.size()) +
                                    " spins, matching expects " + std::to_string(matching.coarse_size));
    if (matching.vertex_map.size() != fine.size()) throw std::invalid_argument("project: fine graph size mismatch");
    SpinAssignment out;
    out.spins.resize(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i) out.spins[i] = coarse.spins[matching.vertex_map[i]];
    out.energy = energy(fine, out.spins);
    return out;
}

std::vector<double> gains(const LevelGraph& graph, std::span<const Spin> spins) {
    const std::size_t n = graph.size();
    if (spins.size() != n) throw std::invalid_argument("gains: spin vector length does not match graph");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = graph.adjacency.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (row[j] != 0.0) acc += row[j] * spins[j];
        g[i] = spins[i] * (acc + graph.fields[i]);
    }
    return g;
}

RefineResult refine_level(const LevelGraph& graph, const SpinAssignment& start, std::size_t k, const HiqConfig& cfg,
                          std::uint64_t stream) {
    const std::size_t n = graph.size();
    if (start.spins.size() != n) throw std::invalid_argument("refine_level: start assignment size mismatch");
    RefineResult result;
    result.assignment.spins = start.spins;
    result.assignment.energy = energy(graph, start.spins);
    result.energy_trace.push_back(result.assignment.energy);

    std::vector<std::size_t> free_vertices;
    for (std::size_t v = 0; v < n; ++v)
        if (!graph.is_pinned(v)) free_vertices.push_back(v);
    const std::size_t take = std::min(k, free_vertices.size());
    if (take == 0) return result;
    const bool whole = take == free_vertices.size();

    std::vector<bool> selected(n, false);
    std::size_t stale = 0;
    auto& spins = result.assignment.spins;
    while (result.iterations < cfg.max_refine_iters && stale < cfg.patience) {
        ++result.iterations;
        const auto g = gains(graph, spins);
        auto key = [&](std::size_t v) { return cfg.selection == Selection::abs ? std::abs(g[v]) : g[v]; };
        std::vector<std::size_t> order = free_vertices;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double ka = key(a), kb = key(b);
            return ka != kb ? ka > kb : a < b;
        });
        // After a non-improving solve the window slides along the gain order,
        // so consecutive stale iterations look at different vertex subsets.
        std::rotate(order.begin(), order.begin() + static_cast<std::ptrdiff_t>((stale * take) % order.size()),
                    order.end());
        std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
        std::sort(chosen.begin(), chosen.end());

        std::fill(selected.begin(), selected.end(), false);
        for (std::size_t v : chosen) selected[v] = true;
        std::vector<std::size_t> local(n, n);
        for (std::size_t p = 0; p < chosen.size(); ++p) local[chosen[p]] = p;

        std::vector<Coupling> couplings;
        std::vector<double> fields(chosen.size());
        for (std::size_t p = 0; p < chosen.size(); ++p) {
            const std::size_t v = chosen[p];
            auto row = graph.adjacency.row(v);
            double h = graph.fields[v];
            for (std::size_t u = 0; u < n; ++u) {
                if (row[u] == 0.0) continue;
                if (selected[u]) {
                    if (u > v) couplings.push_back({p, local[u], row[u]});
                } else {
                    h += row[u] * spins[u];
                }
            }
            fields[p] = h;
        }
        const CouplingProblem sub(chosen.size(), std::move(couplings), std::move(fields));
        SolverConfig sub_cfg = cfg.solver;
        sub_cfg.seed = derive_seed(cfg.solver.seed, (stream << 20) + result.iterations);
        const SpinAssignment sub_best = solve(sub, sub_cfg);

        std::vector<Spin> candidate = spins;
        for (std::size_t p = 0; p < chosen.size(); ++p) candidate[chosen[p]] = sub_best.spins[p];
        const double e = energy(graph, candidate);
        if (e < result.assignment.energy - 1e-12) {
            spins = std::move(candidate);
            result.assignment.energy = e;
            result.energy_trace.push_back(e);
            stale = 0;
        } else {
            ++stale;
        }
        // The subproblem was the whole level and was solved exactly.
        if (whole && cfg.solver.backend == Backend::exhaustive) break;
    }
    return result;
}

nlohmann::json to_json(const LevelTrace& t) {
    return {{"level", t.level},
            {"vertices", t.vertices},
            {"energy_before", t.energy_before},
            {"energy_after", t.energy_after},
            {"iterations", t.iterations}};
}

MultilevelResult minimize(const CouplingProblem& problem, const HiqConfig& cfg) {
    MultilevelResult result;
    if (problem.free_count() <= cfg.qubit_budget) {
        result.assignment = solve(problem, cfg.solver);
        result.exact = cfg.solver.backend == Backend::exhaustive;
        result.trace.push_back({0, problem.n_vars(), result.assignment.energy, result.assignment.energy, 0});
        return result;
    }

    const Hierarchy h = build_hierarchy(problem, cfg.qubit_budget, cfg);
    result.levels = h.levels.size();
    const std::size_t coarsest = h.levels.size() - 1;
    SolverConfig coarse_cfg = cfg.solver;
    coarse_cfg.seed = derive_seed(cfg.solver.seed, 0x20000);
    SpinAssignment current = solve(to_problem(h.levels[coarsest]), coarse_cfg);
    result.trace.push_back({coarsest, h.levels[coarsest].size(), current.energy, current.energy, 0});

    for (std::size_t k = coarsest; k-- > 0;) {
        const SpinAssignment projected = project(current, h.matchings[k], h.levels[k]);
        RefineResult refined = refine_level(h.levels[k], projected, cfg.qubit_budget, cfg, k + 1);
        result.trace.push_back(
            {k, h.levels[k].size(), projected.energy, refined.assignment.energy, refined.iterations});
        result.refine_iterations += refined.iterations;
        current = std::move(refined.assignment);
    }
    current.energy = energy(problem, current.spins);
    result.assignment = std::move(current);
    return result;
}

Estimate fgl_two_layer(const ClassReduction& red, const HiqConfig& cfg) {
    Stopwatch clock;
    const CouplingProblem problem = build_fgl_problem(red);
    const MultilevelResult r = minimize(problem, cfg);
    Estimate est;
    est.method = "hiq";
    est.value = std::max(0.0, -0.5 * r.assignment.energy);
    est.bound_kind = r.exact ? BoundKind::exact : BoundKind::heuristic;
    est.solver_stats = {{"variables", static_cast<double>(problem.n_vars())},
                        {"levels", static_cast<double>(r.levels)},
                        {"iterations", static_cast<double>(r.refine_iterations)},
                        {"reads", static_cast<double>(cfg.solver.num_reads)},
                        {"sweeps", static_cast<double>(cfg.solver.sweeps)}};
    for (const auto& t : r.trace) est.trace.push_back(to_json(t));
    est.config_digest = config_digest({{"method", "hiq"}, {"config", cfg.to_json()}});
    est.wall_time_s = clock.seconds();
    return est;
}

Estimate hiq_lip_two_layer(const Network& net, std::size_t class_index, const HiqConfig& cfg) {
    Stopwatch clock;
    Estimate est = fgl_two_layer(class_reduction(net, class_index), cfg);
    est.config_digest =
        config_digest({{"method", "hiq"}, {"class", class_index}, {"config", cfg.to_json()}});
    est.wall_time_s = clock.seconds();
    return est;
}

}  // namespace hiqlip
