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
#include <thread>

#include "hiqlip/rng.hpp"
#include "hiqlip/solvers.hpp"

namespace hiqlip::backend {

namespace {

struct Csr {
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> targets;
    std::vector<double> weights;
};

Csr to_csr(const CouplingProblem& problem) {
    const std::size_t n = problem.n_vars();
    Csr g;
    g.offsets.assign(n + 1, 0);
    for (const auto& c : problem.couplings()) {
        ++g.offsets[c.i + 1];
        ++g.offsets[c.j + 1];
    }
    for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] += g.offsets[i];
    g.targets.resize(g.offsets[n]);
    g.weights.resize(g.offsets[n]);
    std::vector<std::size_t> fill(g.offsets.begin(), g.offsets.end() - 1);
    for (const auto& c : problem.couplings()) {
        g.targets[fill[c.i]] = c.j;
        g.weights[fill[c.i]++] = c.weight;
        g.targets[fill[c.j]] = c.i;
        g.weights[fill[c.j]++] = c.weight;
    }
    return g;
}

double coefficient_scale(const CouplingProblem& problem) {
    double scale = 0.0;
    for (const auto& c : problem.couplings()) scale = std::max(scale, std::abs(c.weight));
    for (double h : problem.fields()) scale = std::max(scale, std::abs(h));
    return scale;
}

class Annealer {
public:
    explicit Annealer(const CouplingProblem& problem) : problem_(problem), graph_(to_csr(problem)) {}

    SpinAssignment run(const SolverConfig& cfg, std::size_t read) const {
        const std::size_t n = problem_.n_vars();
        Rng rng(derive_seed(cfg.seed, read));
        std::vector<Spin> s(n);
        for (auto& x : s) x = static_cast<Spin>(rng.spin());

        const double scale = coefficient_scale(problem_);
        if (scale == 0.0) return {s, energy(problem_, s)};

        std::vector<double> local(problem_.fields());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = graph_.offsets[i]; k < graph_.offsets[i + 1]; ++k)
                local[i] += graph_.weights[k] * s[graph_.targets[k]];

        double e = energy(problem_, s);
        double best_e = e;
        std::vector<Spin> best = s;

        const double b0 = cfg.beta_min / scale;
        const double b1 = cfg.beta_max / scale;
        const double ratio = cfg.sweeps > 1 ? std::pow(b1 / b0, 1.0 / static_cast<double>(cfg.sweeps - 1)) : 1.0;
        double beta = cfg.sweeps > 1 ? b0 : b1;
        for (std::size_t sweep = 0; sweep < cfg.sweeps; ++sweep, beta *= ratio) {
            for (std::size_t i = 0; i < n; ++i) {
                const double delta = 2.0 * s[i] * local[i];
                if (delta > 0.0 && rng.uniform() >= std::exp(-beta * delta)) continue;
                flip(s, local, i);
                e += delta;
            }
            if (e < best_e) {
                best_e = e;
                best = s;
            }
        }

        // Zero-temperature quench from the best state.
        s = best;
        std::fill(local.begin(), local.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            local[i] = problem_.fields()[i];
            for (std::size_t k = graph_.offsets[i]; k < graph_.offsets[i + 1]; ++k)
                local[i] += graph_.weights[k] * s[graph_.targets[k]];
        }
        for (bool improved = true; improved;) {
            improved = false;
            for (std::size_t i = 0; i < n; ++i)
                if (2.0 * s[i] * local[i] < 0.0) {
                    flip(s, local, i);
                    improved = true;
                }
        }
        return {s, energy(problem_, s)};
    }

private:
    void flip(std::vector<Spin>& s, std::vector<double>& local, std::size_t i) const {
        s[i] = static_cast<Spin>(-s[i]);
        const double d = 2.0 * s[i];
        for (std::size_t k = graph_.offsets[i]; k < graph_.offsets[i + 1]; ++k)
            local[graph_.targets[k]] += d * graph_.weights[k];
    }

    const CouplingProblem& problem_;
    Csr graph_;
};

}  // namespace

SpinAssignment anneal_read(const CouplingProblem& problem, const SolverConfig& cfg, std::size_t read) {
    return Annealer(problem).run(cfg, read);
}

std::vector<Spin> annealing(const CouplingProblem& problem, const SolverConfig& cfg) {
    const Annealer annealer(problem);
    std::vector<SpinAssignment> reads(cfg.num_reads);
    const std::size_t workers =
        cfg.parallel_reads ? std::min<std::size_t>(cfg.num_reads, std::max(1U, std::thread::hardware_concurrency())) : 1;
    if (workers <= 1) {
        for (std::size_t r = 0; r < cfg.num_reads; ++r) reads[r] = annealer.run(cfg, r);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t r = w; r < cfg.num_reads; r += workers) reads[r] = annealer.run(cfg, r);
            });
    }
    std::size_t best = 0;
    for (std::size_t r = 1; r < reads.size(); ++r)
        if (reads[r].energy < reads[best].energy) best = r;
    return reads[best].spins;
}

}  // namespace hiqlip::backend
