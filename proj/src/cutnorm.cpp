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

#include "hiqlip/cutnorm.hpp"

#include <algorithm>
#include <cmath>

#include "hiqlip/solvers.hpp"

namespace hiqlip {

CouplingProblem::CouplingProblem(std::size_t n_vars, std::vector<Coupling> couplings, std::vector<double> fields,
                                 std::map<std::size_t, Spin> pinned, std::vector<VertexSide> sides)
    : n_vars_(n_vars), pinned_(std::move(pinned)), sides_(std::move(sides)) {
    for (auto& c : couplings) {
        if (c.i == c.j) throw std::invalid_argument("coupling problem: self-coupling on variable " + std::to_string(c.i));
        if (c.i >= n_vars_ || c.j >= n_vars_) throw std::invalid_argument("coupling problem: variable index out of range");
        if (!std::isfinite(c.weight)) throw std::invalid_argument("coupling problem: non-finite coupling");
        if (c.i > c.j) std::swap(c.i, c.j);
    }
    std::stable_sort(couplings.begin(), couplings.end(),
                     [](const Coupling& a, const Coupling& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
    for (const auto& c : couplings) {
        if (!couplings_.empty() && couplings_.back().i == c.i && couplings_.back().j == c.j)
            couplings_.back().weight += c.weight;
        else
            couplings_.push_back(c);
    }

    if (fields.empty()) {
        fields_.assign(n_vars_, 0.0);
    } else {
        if (fields.size() != n_vars_) throw std::invalid_argument("coupling problem: fields length mismatch");
        for (double h : fields)
            if (!std::isfinite(h)) throw std::invalid_argument("coupling problem: non-finite field");
        has_fields_ = std::any_of(fields.begin(), fields.end(), [](double h) { return h != 0.0; });
        fields_ = std::move(fields);
    }
    for (const auto& [idx, s] : pinned_) {
        if (idx >= n_vars_) throw std::invalid_argument("coupling problem: pinned index out of range");
        if (s != 1 && s != -1) throw std::invalid_argument("coupling problem: pinned value must be +-1");
    }
    if (!sides_.empty() && sides_.size() != n_vars_)
        throw std::invalid_argument("coupling problem: sides length mismatch");
}

double energy(const CouplingProblem& problem, std::span<const Spin> spins) {
    if (spins.size() != problem.n_vars())
        throw std::invalid_argument("energy: expected " + std::to_string(problem.n_vars()) + " spins, got " +
                                    std::to_string(spins.size()));
    for (Spin s : spins)
        if (s != 1 && s != -1) throw std::invalid_argument("energy: spins must be +-1");
    double e = 0.0;
    for (const auto& c : problem.couplings()) e -= c.weight * spins[c.i] * spins[c.j];
    if (problem.has_fields()) {
        const auto& h = problem.fields();
        for (std::size_t i = 0; i < spins.size(); ++i) e -= h[i] * spins[i];
    }
    return e;
}

std::string_view to_string(Backend backend) {
    switch (backend) {
        case Backend::exhaustive: return "exhaustive";
        case Backend::annealing: return "annealing";
        case Backend::remote: return "remote";
    }
    return "annealing";
}

Backend parse_backend(std::string_view text) {
    if (text == "exhaustive") return Backend::exhaustive;
    if (text == "annealing") return Backend::annealing;
    if (text == "remote") return Backend::remote;
    throw std::invalid_argument("unknown solver backend: " + std::string(text));
}

void SolverConfig::validate() const {
    if (!(beta_min < beta_max) || !(beta_min > 0.0))
        throw std::invalid_argument("solver config: need 0 < beta_min < beta_max");
    if (max_vars_exhaustive > 30) throw std::invalid_argument("solver config: max_vars_exhaustive must be <= 30");
    if (num_reads == 0) throw std::invalid_argument("solver config: num_reads must be >= 1");
    if (backend == Backend::annealing && sweeps == 0) throw std::invalid_argument("solver config: sweeps must be >= 1");
    if (backend == Backend::remote && (!remote_endpoint || remote_endpoint->empty()))
        throw std::invalid_argument("solver config: remote backend needs an endpoint");
}

nlohmann::json SolverConfig::to_json() const {
    nlohmann::json j;
    j["backend"] = to_string(backend);
    j["seed"] = seed;
    j["num_reads"] = num_reads;
    j["sweeps"] = sweeps;
    j["beta_min"] = beta_min;
    j["beta_max"] = beta_max;
    j["max_vars_exhaustive"] = max_vars_exhaustive;
    j["timeout_ms"] = timeout_ms;
    if (remote_endpoint) j["remote_endpoint"] = *remote_endpoint;
    return j;
}

FreeProblem fold_pinned(const CouplingProblem& problem) {
    const auto& pinned = problem.pinned();
    const std::size_t n = problem.n_vars();
    std::vector<std::size_t> to_free(n, n);
    FreeProblem out;
    for (std::size_t v = 0; v < n; ++v) {
        if (pinned.count(v)) continue;
        to_free[v] = out.free_index.size();
        out.free_index.push_back(v);
    }
    if (pinned.empty()) {
        out.problem = problem;
        return out;
    }
    const std::size_t nf = out.free_index.size();
    std::vector<double> fields(nf, 0.0);
    std::vector<Coupling> couplings;
    const auto& h = problem.fields();
    for (std::size_t f = 0; f < nf; ++f) fields[f] = h[out.free_index[f]];
    for (const auto& [v, s] : pinned) out.offset -= h[v] * s;
    for (const auto& c : problem.couplings()) {
        const bool pi = to_free[c.i] == n;
        const bool pj = to_free[c.j] == n;
        if (!pi && !pj)
            couplings.push_back({to_free[c.i], to_free[c.j], c.weight});
        else if (pi && pj)
            out.offset -= c.weight * pinned.at(c.i) * pinned.at(c.j);
        else if (pi)
            fields[to_free[c.j]] += c.weight * pinned.at(c.i);
        else
            fields[to_free[c.i]] += c.weight * pinned.at(c.j);
    }
    std::vector<VertexSide> sides;
    if (!problem.sides().empty())
        for (std::size_t v : out.free_index) sides.push_back(problem.sides()[v]);
    out.problem = CouplingProblem(nf, std::move(couplings), std::move(fields), {}, std::move(sides));
    return out;
}

SpinAssignment solve(const CouplingProblem& problem, const SolverConfig& cfg) {
    cfg.validate();
    FreeProblem folded = fold_pinned(problem);
    const std::size_t nf = folded.problem.n_vars();

    std::vector<Spin> free_spins;
    if (nf > 0) {
        switch (cfg.backend) {
            case Backend::exhaustive:
                if (nf > cfg.max_vars_exhaustive)
                    throw SolverError("exhaustive solver: " + std::to_string(nf) + " free variables exceed the cap of " +
                                      std::to_string(cfg.max_vars_exhaustive));
                free_spins = backend::exhaustive(folded.problem, cfg);
                break;
            case Backend::annealing: free_spins = backend::annealing(folded.problem, cfg); break;
            case Backend::remote: free_spins = backend::remote(folded.problem, cfg); break;
        }
    }

    SpinAssignment out;
    out.spins.assign(problem.n_vars(), 1);
    for (const auto& [v, s] : problem.pinned()) out.spins[v] = s;
    for (std::size_t f = 0; f < nf; ++f) out.spins[folded.free_index[f]] = free_spins[f];
    out.energy = energy(problem, out.spins);
    return out;
}

CouplingProblem build_cut_problem(const Matrix& a) {
    if (a.empty()) throw std::invalid_argument("build_cut_problem: empty matrix");
    const std::size_t n = a.rows();
    const std::size_t m = a.cols();
    std::vector<Coupling> couplings;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            if (!std::isfinite(a(i, j))) throw std::invalid_argument("build_cut_problem: non-finite entry");
            if (a(i, j) != 0.0) couplings.push_back({i, n + j, a(i, j)});
        }
    std::vector<VertexSide> sides(n, VertexSide::row);
    sides.resize(n + m, VertexSide::column);
    return CouplingProblem(n + m, std::move(couplings), {}, {}, std::move(sides));
}

CouplingProblem build_fgl_problem(const ClassReduction& red) {
    const Matrix& a = red.a;
    if (a.empty()) throw std::invalid_argument("build_fgl_problem: empty reduction");
    const std::size_t n = a.rows();
    const std::size_t m = a.cols();
    const std::size_t pin = n + m;
    std::vector<Coupling> couplings;
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            row_sum += a(i, j);
            if (a(i, j) != 0.0) couplings.push_back({i, n + j, a(i, j)});
        }
        if (row_sum != 0.0) couplings.push_back({i, pin, row_sum});
    }
    std::vector<VertexSide> sides(n, VertexSide::row);
    sides.resize(n + m, VertexSide::column);
    sides.push_back(VertexSide::pinned);
    return CouplingProblem(n + m + 1, std::move(couplings), {}, {{pin, Spin{1}}}, std::move(sides));
}

Estimate cut_norm_inf1(const Matrix& a, const SolverConfig& cfg) {
    Stopwatch clock;
    const CouplingProblem problem = build_cut_problem(a);
    const SpinAssignment best = solve(problem, cfg);
    Estimate est;
    est.method = "cut-norm";
    est.value = -best.energy;
    est.bound_kind = cfg.backend == Backend::exhaustive ? BoundKind::exact : BoundKind::lower;
    est.solver_stats = {{"variables", static_cast<double>(problem.n_vars())},
                        {"reads", static_cast<double>(cfg.num_reads)},
                        {"sweeps", static_cast<double>(cfg.sweeps)}};
    nlohmann::json config = {{"method", est.method}, {"solver", cfg.to_json()}};
    est.config_digest = config_digest(config);
    est.wall_time_s = clock.seconds();
    return est;
}

}  // namespace hiqlip
