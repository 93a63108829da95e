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

#include "hiqlip/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <thread>

#include "hiqlip/rng.hpp"

namespace hiqlip {

namespace {

double l1(std::span<const double> v) {
    double total = 0.0;
    for (double x : v) total += std::abs(x);
    return total;
}

// Row vector g times matrix w (g has w.rows() entries).
std::vector<double> row_times(std::span<const double> g, const Matrix& w) {
    std::vector<double> out(w.cols(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
        if (g[r] == 0.0) continue;
        auto row = w.row(r);
        for (std::size_t c = 0; c < w.cols(); ++c) out[c] += g[r] * row[c];
    }
    return out;
}

}  // namespace

Estimate mp_bound(const Network& net, std::size_t class_index) {
    Stopwatch clock;
    const auto u = class_row(net, class_index);
    double value = l1(u);
    for (std::size_t l = 0; l + 1 < net.depth(); ++l) {
        const Matrix& w = net.layer(l).weights;
        double norm = 0.0;
        for (std::size_t r = 0; r < w.rows(); ++r) norm = std::max(norm, l1(w.row(r)));
        value *= norm;
    }
    Estimate est;
    est.method = "mp";
    est.value = value;
    est.bound_kind = BoundKind::upper;
    est.config_digest = config_digest({{"method", "mp"}, {"class", class_index}});
    est.wall_time_s = clock.seconds();
    return est;
}

void SamplingConfig::validate() const {
    if (num_samples < 1) throw std::invalid_argument("sampling: num_samples must be >= 1");
    if (!(domain_low < domain_high)) throw std::invalid_argument("sampling: need domain_low < domain_high");
}

std::vector<double> input_gradient(const Network& net, std::size_t class_index, std::span<const double> x) {
    if (x.size() != net.input_dim()) throw std::invalid_argument("input_gradient: input dimension mismatch");
    const std::size_t d = net.depth();
    std::vector<std::vector<char>> active(d > 0 ? d - 1 : 0);
    std::vector<double> a(x.begin(), x.end());
    for (std::size_t l = 0; l + 1 < d; ++l) {
        const auto& layer = net.layer(l);
        std::vector<double> z(layer.rows(), 0.0);
        for (std::size_t r = 0; r < layer.rows(); ++r) {
            auto row = layer.weights.row(r);
            double acc = layer.bias ? (*layer.bias)[r] : 0.0;
            for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * a[c];
            z[r] = acc;
        }
        active[l].resize(z.size());
        for (std::size_t r = 0; r < z.size(); ++r) {
            active[l][r] = z[r] > 0.0;
            z[r] = z[r] > 0.0 ? z[r] : 0.0;
        }
        a = std::move(z);
    }
    std::vector<double> g = class_row(net, class_index);
    for (std::size_t l = d - 1; l-- > 0;) {
        for (std::size_t r = 0; r < g.size(); ++r)
            if (!active[l][r]) g[r] = 0.0;
        g = row_times(g, net.layer(l).weights);
    }
    return g;
}

Estimate sampling_lower_bound(const Network& net, std::size_t class_index, const SamplingConfig& cfg) {
    cfg.validate();
    (void)class_row(net, class_index);
    Stopwatch clock;
    const std::size_t n = net.input_dim();
    auto chunk_max = [&](std::size_t begin, std::size_t end) {
        std::vector<double> x(n);
        double best = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const std::uint64_t key = derive_seed(cfg.seed, i);
            for (std::size_t c = 0; c < n; ++c)
                x[c] = cfg.domain_low + (cfg.domain_high - cfg.domain_low) * bits_to_unit(splitmix64(key + c));
            best = std::max(best, l1(input_gradient(net, class_index, x)));
        }
        return best;
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.threads, cfg.num_samples));
    double best = 0.0;
    if (workers == 1) {
        best = chunk_max(0, cfg.num_samples);
    } else {
        std::vector<double> partial(workers, 0.0);
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w)
                pool.emplace_back([&, w] {
                    partial[w] = chunk_max(cfg.num_samples * w / workers, cfg.num_samples * (w + 1) / workers);
                });
        }
        best = *std::max_element(partial.begin(), partial.end());
    }

    Estimate est;
    est.method = "sample";
    est.value = best;
    est.bound_kind = BoundKind::lower;
    est.solver_stats = {{"samples", static_cast<double>(cfg.num_samples)}};
    est.config_digest = config_digest({{"method", "sample"},
                                       {"class", class_index},
                                       {"num_samples", cfg.num_samples},
                                       {"domain", {cfg.domain_low, cfg.domain_high}},
                                       {"seed", cfg.seed}});
    est.wall_time_s = clock.seconds();
    return est;
}

namespace {

// Nested Gray-code walk over activation patterns, outermost layer first.
// The running row vector of each layer is updated by one row per step.
class PatternSearch {
public:
    explicit PatternSearch(std::vector<Matrix> chain) : chain_(std::move(chain)) {
        for (std::size_t t = 0; t + 1 < chain_.size(); ++t) act_.emplace_back(chain_[t].rows(), 0);
        best_act_ = act_;
    }

    std::vector<std::vector<std::uint8_t>> run() {
        if (act_.empty()) return best_act_;
        auto top = chain_.back().row(0);
        walk(act_.size() - 1, {top.begin(), top.end()});
        return best_act_;
    }

    double evaluate(const std::vector<std::vector<std::uint8_t>>& act) const {
        auto top = chain_.back().row(0);
        std::vector<double> g(top.begin(), top.end());
        for (std::size_t t = act.size(); t-- > 0;) {
            for (std::size_t j = 0; j < g.size(); ++j)
                if (act[t][j] == 0) g[j] = 0.0;
            g = row_times(g, chain_[t]);
        }
        return l1(g);
    }

private:
    // r: row vector over the units of activation layer t.
    void walk(std::size_t t, const std::vector<double>& r) {
        const Matrix& w = chain_[t];
        std::vector<double> s(w.cols(), 0.0);
        auto& a = act_[t];
        std::fill(a.begin(), a.end(), std::uint8_t{0});
        visit(t, s);
        const std::uint64_t states = std::uint64_t{1} << a.size();
        for (std::uint64_t g = 1; g < states; ++g) {
            const auto j = static_cast<std::size_t>(std::countr_zero(g));
            const double coef = a[j] ? -r[j] : r[j];
            a[j] = static_cast<std::uint8_t>(1 - a[j]);
            if (coef != 0.0) {
                auto row = w.row(j);
                for (std::size_t c = 0; c < s.size(); ++c) s[c] += coef * row[c];
            }
            visit(t, s);
        }
    }

    void visit(std::size_t t, const std::vector<double>& s) {
        if (t > 0) {
            walk(t - 1, s);
            return;
        }
        const double v = l1(s);
        if (v > best_) {
            best_ = v;
            best_act_ = act_;
        }
    }

    std::vector<Matrix> chain_;
    std::vector<std::vector<std::uint8_t>> act_;
    std::vector<std::vector<std::uint8_t>> best_act_;
    double best_ = -1.0;
};

}  // namespace

Estimate brute_force_fgl(const Network& net, std::size_t class_index, std::size_t cap) {
    const std::size_t hidden = net.hidden_units();
    if (hidden > cap)
        throw RefusalError("brute force needs 2^" + std::to_string(hidden) + " patterns; " + std::to_string(hidden) +
                               " hidden units exceed the cap of " + std::to_string(cap) +
                               " (raise the cap to at least " + std::to_string(hidden) + ")",
                           hidden);
    if (hidden > 62) throw RefusalError("brute force: too many hidden units", hidden);
    Stopwatch clock;
    PatternSearch search(class_chain(net, class_index));
    const auto best = search.run();
    Estimate est;
    est.method = "bf";
    est.value = search.evaluate(best);
    est.bound_kind = BoundKind::exact;
    est.solver_stats = {{"patterns", std::ldexp(1.0, static_cast<int>(hidden))}};
    est.config_digest = config_digest({{"method", "bf"}, {"class", class_index}, {"cap", cap}});
    est.wall_time_s = clock.seconds();
    return est;
}

}  // namespace hiqlip
