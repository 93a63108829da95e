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

#include "hiqlip/multilayer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hiqlip/cutnorm.hpp"
#include "hiqlip/rng.hpp"

namespace hiqlip {

namespace {

std::vector<double> mat_vec(const Matrix& w, std::span<const double> v) {
    std::vector<double> out(w.rows(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
        auto row = w.row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < w.cols(); ++c) acc += row[c] * v[c];
        out[r] = acc;
    }
    return out;
}

std::vector<double> apply_transposed(const Matrix& w, std::span<const double> v) {
    std::vector<double> out(w.cols(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
        if (v[r] == 0.0) continue;
        auto row = w.row(r);
        for (std::size_t c = 0; c < w.cols(); ++c) out[c] += v[r] * row[c];
    }
    return out;
}

void mask(std::vector<double>& v, std::span<const Spin> d) {
    for (std::size_t j = 0; j < v.size(); ++j)
        if (d[j] == 0) v[j] = 0.0;
}

std::vector<double> to_double(std::span<const Spin> s) { return {s.begin(), s.end()}; }

// W_last D_{last-1} ... D_first W_first for layers [first, last].
Matrix chain_product(std::span<const Matrix> layers, std::span<const std::vector<Spin>> d, std::size_t first,
                     std::size_t last) {
    Matrix p = layers[first];
    for (std::size_t l = first + 1; l <= last; ++l) {
        const auto& act = d[l - 1];
        for (std::size_t r = 0; r < p.rows(); ++r)
            if (act[r] == 0)
                for (double& x : p.row(r)) x = 0.0;
        p = multiply(layers[l], p);
    }
    return p;
}

void check_chain(std::span<const Matrix> layers) {
    if (layers.empty()) throw std::invalid_argument("maximize_block: empty layer chain");
    for (std::size_t l = 1; l < layers.size(); ++l)
        if (layers[l].cols() != layers[l - 1].rows())
            throw std::invalid_argument("maximize_block: layer " + std::to_string(l + 1) + " does not chain");
}

HiqConfig reseeded(const HiqConfig& cfg, std::uint64_t stream) {
    HiqConfig out = cfg;
    out.solver.seed = derive_seed(cfg.solver.seed, stream);
    return out;
}

struct Witness {
    std::vector<std::vector<Spin>> d;
    std::vector<Spin> x;
    std::vector<Spin> y;
    double value = -std::numeric_limits<double>::infinity();
};

}  // namespace

double block_objective(std::span<const Matrix> layers, std::span<const std::vector<Spin>> activations,
                       std::span<const Spin> x, std::span<const Spin> y) {
    std::vector<double> v = mat_vec(layers.front(), to_double(y));
    for (std::size_t l = 1; l < layers.size(); ++l) {
        mask(v, activations[l - 1]);
        v = mat_vec(layers[l], v);
    }
    double total = 0.0;
    for (std::size_t r = 0; r < v.size(); ++r) total += x[r] * v[r];
    return total;
}

BlockMaximum maximize_block(std::span<const Matrix> layers, const HiqConfig& cfg, std::uint64_t stream) {
    check_chain(layers);
    const std::size_t k = layers.size();
    const std::size_t out_dim = layers.back().rows();
    const std::size_t in_dim = layers.front().cols();
    BlockMaximum best;
    best.value = -std::numeric_limits<double>::infinity();

    auto solve_signs = [&](const Matrix& p, std::uint64_t s, Witness& w) {
        const auto r = minimize(build_cut_problem(p), reseeded(cfg, s));
        w.x.assign(r.assignment.spins.begin(), r.assignment.spins.begin() + static_cast<std::ptrdiff_t>(out_dim));
        w.y.assign(r.assignment.spins.begin() + static_cast<std::ptrdiff_t>(out_dim), r.assignment.spins.end());
    };

    if (k == 1) {
        Witness w;
        solve_signs(layers.front(), derive_seed(stream, 0), w);
        best.value = block_objective(layers, {}, w.x, w.y);
        best.x = std::move(w.x);
        best.y = std::move(w.y);
        best.trace.push_back(best.value);
        best.passes = 1;
        return best;
    }

    constexpr std::size_t kMaxPasses = 50;
    for (std::size_t restart = 0; restart <= cfg.recursion_restarts; ++restart) {
        Witness w;
        Rng rng(derive_seed(derive_seed(cfg.solver.seed, stream), 0x30000 + restart));
        for (std::size_t l = 0; l + 1 < k; ++l) {
            std::vector<Spin> act(layers[l].rows(), 1);
            if (restart > 0)
                for (auto& a : act) a = static_cast<Spin>(rng.spin() > 0 ? 1 : 0);
            w.d.push_back(std::move(act));
        }
        std::vector<double> trace;
        std::size_t passes = 0;
        while (passes < kMaxPasses) {
            ++passes;
            const double start = w.value;
            const std::uint64_t s = derive_seed(stream, restart * 1000 + passes * 4);

            // (a) signs for fixed activations.
            {
                Witness trial = w;
                solve_signs(chain_product(layers, w.d, 0, k - 1), s, trial);
                trial.value = block_objective(layers, trial.d, trial.x, trial.y);
                if (trial.value > w.value) w = std::move(trial);
            }
            // (a') last activation layer and input signs jointly, output signs fixed:
            // max over v, y of u^T diag(v) M y with u = W_k^T x is an exact two-layer problem.
            {
                const std::vector<double> u = apply_transposed(layers[k - 1], to_double(w.x));
                Matrix m = chain_product(layers, w.d, 0, k - 2);
                const auto r = minimize(build_fgl_problem(make_reduction(std::move(m), u)), reseeded(cfg, s + 1));
                Witness trial = w;
                trial.y.assign(r.assignment.spins.begin(), r.assignment.spins.begin() + static_cast<std::ptrdiff_t>(in_dim));
                auto& last = trial.d[k - 2];
                for (std::size_t j = 0; j < last.size(); ++j)
                    last[j] = r.assignment.spins[in_dim + j] > 0 ? 1 : 0;
                trial.value = block_objective(layers, trial.d, trial.x, trial.y);
                if (trial.value > w.value) w = std::move(trial);
            }
            // (b) each activation layer at fixed signs: the objective is linear in D_l,
            // so D_l[j] = 1 exactly when its coefficient is positive.
            for (std::size_t l = 0; l + 1 < k; ++l) {
                std::vector<double> right = mat_vec(layers[0], to_double(w.y));
                for (std::size_t t = 1; t <= l; ++t) {
                    mask(right, w.d[t - 1]);
                    right = mat_vec(layers[t], right);
                }
                std::vector<double> left = to_double(w.x);
                for (std::size_t t = k - 1; t > l; --t) {
                    left = apply_transposed(layers[t], left);
                    if (t - 1 > l) mask(left, w.d[t - 1]);
                }
                Witness trial = w;
                for (std::size_t j = 0; j < trial.d[l].size(); ++j) trial.d[l][j] = left[j] * right[j] > 0.0 ? 1 : 0;
                trial.value = block_objective(layers, trial.d, trial.x, trial.y);
                if (trial.value >= w.value) w = std::move(trial);
            }
            trace.push_back(w.value);
            if (!(w.value > start + 1e-12 * std::max(1.0, std::abs(w.value)))) break;
        }
        if (w.value > best.value) {
            best.value = w.value;
            best.activations = w.d;
            best.x = w.x;
            best.y = w.y;
            best.trace = trace;
            best.passes = passes;
        }
    }
    return best;
}

Estimate layerwise_recursion(const Network& net, std::size_t class_index, const HiqConfig& cfg) {
    if (net.depth() < 2) throw std::invalid_argument("layerwise_recursion: depth must be >= 2");
    Stopwatch clock;
    const auto chain = class_chain(net, class_index);
    const BlockMaximum m = maximize_block(chain, cfg);
    Estimate est;
    est.method = "recursion";
    est.value = std::max(0.0, m.value);
    est.bound_kind = BoundKind::heuristic;
    est.solver_stats = {{"passes", static_cast<double>(m.passes)},
                        {"restarts", static_cast<double>(cfg.recursion_restarts)},
                        {"reads", static_cast<double>(cfg.solver.num_reads)},
                        {"sweeps", static_cast<double>(cfg.solver.sweeps)}};
    est.trace = m.trace;
    est.config_digest = config_digest({{"method", "recursion"}, {"class", class_index}, {"config", cfg.to_json()}});
    est.wall_time_s = clock.seconds();
    return est;
}

BlockPlan plan_blocks(std::size_t depth, std::size_t b) {
    if (b < 1 || b > depth)
        throw std::invalid_argument("block size must be in [1, " + std::to_string(depth) + "], got " + std::to_string(b));
    BlockPlan plan;
    plan.max_len = b;
    for (std::size_t first = 0; first < depth; first += b) plan.blocks.emplace_back(first, std::min(depth, first + b));
    return plan;
}

Estimate block_product(const Network& net, std::size_t class_index, std::size_t b, const HiqConfig& cfg) {
    Stopwatch clock;
    const BlockPlan plan = plan_blocks(net.depth(), b);
    const auto chain = class_chain(net, class_index);
    const std::span<const Matrix> all(chain);

    Estimate est;
    est.method = "block";
    nlohmann::json gammas = nlohmann::json::array();
    double product = 1.0;
    for (std::size_t i = 0; i < plan.blocks.size(); ++i) {
        const auto [first, last] = plan.blocks[i];
        const double gamma = std::max(0.0, maximize_block(all.subspan(first, last - first), cfg, 0x40000 + i).value);
        gammas.push_back(gamma);
        product *= gamma;
    }
    const auto damping_exp = static_cast<double>(net.depth() - plan.blocks.size());
    const double cb = std::ldexp(1.0, static_cast<int>(b) - 1);
    est.value = product / std::pow(cb, damping_exp);
    est.bound_kind = BoundKind::heuristic;
    est.solver_stats = {{"blocks", static_cast<double>(plan.blocks.size())},
                        {"block_size", static_cast<double>(b)},
                        {"reads", static_cast<double>(cfg.solver.num_reads)},
                        {"sweeps", static_cast<double>(cfg.solver.sweeps)}};
    est.trace = std::move(gammas);
    est.config_digest =
        config_digest({{"method", "block"}, {"class", class_index}, {"b", b}, {"config", cfg.to_json()}});
    est.wall_time_s = clock.seconds();
    return est;
}

double mp_coefficient(std::size_t d, MpVariant variant) {
    if (d < 2) throw std::invalid_argument("mp_coefficient: depth must be >= 2");
    const double a = std::ldexp(1.0, -static_cast<int>(d - 2));
    if (variant == MpVariant::A) return a;
    return a / std::pow(static_cast<double>(d), static_cast<double>(d) - 3.0);
}

PairConstants pair_constants(const Network& net, std::size_t class_index, const HiqConfig& cfg, Pairing pairing) {
    if (net.depth() < 2) throw std::invalid_argument("pair_constants: depth must be >= 2");
    Stopwatch clock;
    const auto chain = class_chain(net, class_index);
    const std::span<const Matrix> all(chain);
    PairConstants pc;
    pc.depth = net.depth();
    pc.pairing = pairing;
    const std::size_t d = net.depth();
    for (std::size_t l = 0; l + 1 < d; ++l) {
        double gamma = 0.0;
        if (pairing == Pairing::single) {
            gamma = maximize_block(all.subspan(l + 1, 1), cfg, 0x50000 + l).value;
        } else if (l + 2 == d) {
            gamma = fgl_two_layer(make_reduction(chain[l], class_row(net, class_index)),
                                  reseeded(cfg, 0x50000 + l))
                        .value;
        } else {
            gamma = maximize_block(all.subspan(l, 2), cfg, 0x50000 + l).value;
        }
        pc.gammas.push_back(std::max(0.0, gamma));
    }
    pc.config_digest = config_digest({{"class", class_index},
                                      {"pairing", pairing == Pairing::single ? "single" : "overlapping"},
                                      {"config", cfg.to_json()}});
    pc.wall_time_s = clock.seconds();
    return pc;
}

Estimate hiq_lip_multilayer(const PairConstants& pairs, MpVariant variant) {
    Stopwatch clock;
    if (pairs.depth < 3) throw std::invalid_argument("hiq_lip_multilayer: depth must be >= 3");
    double product = 1.0;
    for (double g : pairs.gammas) product *= g;
    // Variant B is computed from variant A by one division so that
    // B == A / d^{d-3} holds exactly.
    double value = mp_coefficient(pairs.depth, MpVariant::A) * product;
    if (variant == MpVariant::B) {
        const auto d = static_cast<double>(pairs.depth);
        value /= std::pow(d, d - 3.0);
    }
    Estimate est;
    est.method = variant == MpVariant::A ? "hiq-mp-a" : "hiq-mp-b";
    est.value = value;
    est.bound_kind = BoundKind::heuristic;
    est.solver_stats = {{"pairs", static_cast<double>(pairs.gammas.size())},
                        {"depth", static_cast<double>(pairs.depth)}};
    est.trace = pairs.gammas;
    est.config_digest = config_digest({{"method", est.method}, {"pairs", pairs.config_digest}});
    est.wall_time_s = pairs.wall_time_s + clock.seconds();
    return est;
}

Estimate hiq_lip_multilayer(const Network& net, std::size_t class_index, MpVariant variant, const HiqConfig& cfg,
                            Pairing pairing) {
    if (net.depth() < 3) throw std::invalid_argument("hiq_lip_multilayer: depth must be >= 3");
    return hiq_lip_multilayer(pair_constants(net, class_index, cfg, pairing), variant);
}

}  // namespace hiqlip
