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
#include <numeric>
#include <set>

#include "doctest.h"

#include "hiqlip/baselines.hpp"
#include "hiqlip/hierarchy.hpp"
#include "oracles.hpp"

using namespace hiqlip;

namespace {

LevelGraph random_graph(Rng& rng, std::size_t n, double density, bool fields) {
    std::vector<Coupling> c;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform() < density) c.push_back({i, j, rng.uniform(-1, 1)});
    std::vector<double> h;
    if (fields) {
        h.resize(n);
        for (double& x : h) x = rng.uniform(-1, 1);
    }
    return to_level_graph(CouplingProblem(n, c, h));
}

std::vector<Spin> random_spins(Rng& rng, std::size_t n) {
    std::vector<Spin> s(n);
    for (auto& x : s) x = static_cast<Spin>(rng.spin());
    return s;
}

double pair_distance(const Embedding& e, std::size_t a, std::size_t b) {
    double d = 0.0;
    for (std::size_t k = 0; k < e.dim; ++k) d += std::pow(e.position(a)[k] - e.position(b)[k], 2);
    return std::sqrt(d);
}

HiqConfig exhaustive_cfg(std::size_t budget) {
    HiqConfig cfg;
    cfg.solver.backend = Backend::exhaustive;
    cfg.qubit_budget = budget;
    return cfg;
}

// A_c = P^T A_f P as the literal quadruple sum over an explicit dense P,
// with the merged-pair diagonal dropped.
Matrix dense_coarse(const Matrix& af, const std::vector<std::size_t>& map, std::size_t c) {
    const std::size_t n = af.rows();
    Matrix p(n, c);
    for (std::size_t i = 0; i < n; ++i) p(i, map[i]) = 1.0;
    Matrix ac(c, c);
    for (std::size_t a = 0; a < c; ++a)
        for (std::size_t b = 0; b < c; ++b) {
            if (a == b) continue;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (p(i, a) == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j)
                    if (p(j, b) != 0.0) acc += p(i, a) * af(i, j) * p(j, b);
            }
            ac(a, b) = acc;
        }
    return ac;
}

}  // namespace

TEST_CASE("embedding examples") {
    const LevelGraph edge = to_level_graph(CouplingProblem(2, {{0, 1, 1.0}}));
    Embedding start = embed(edge, 8, 3, 0);
    Embedding done = embed(edge, 8, 3, 50);
    CHECK(pair_distance(done, 0, 1) < pair_distance(start, 0, 1));
    CHECK(done.objective <= done.initial_objective);

    const LevelGraph zero = to_level_graph(CouplingProblem(5, {}));
    const Embedding z0 = embed(zero, 4, 9, 0), z1 = embed(zero, 4, 9, 50);
    CHECK(z0.positions == z1.positions);

    int dominant_closest = 0;
    const LevelGraph tri = to_level_graph(CouplingProblem(3, {{0, 1, -5.0}, {0, 2, 0.5}, {1, 2, 0.5}}));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Embedding e = embed(tri, 8, seed, 50);
        const double d01 = pair_distance(e, 0, 1);
        if (d01 < pair_distance(e, 0, 2) && d01 < pair_distance(e, 1, 2)) ++dominant_closest;
    }
    CHECK(dominant_closest >= 18);

    CHECK_THROWS(embed(edge, 1, 0, 10));
}

TEST_CASE("embedding stays on the sphere and never worsens") {
    Rng rng(4);
    for (std::uint64_t t = 0; t < 20; ++t) {
        const LevelGraph g = random_graph(rng, 30, 0.3, false);
        const Embedding e = embed(g, 2 + t % 7, t, 50);
        for (std::size_t v = 0; v < g.size(); ++v) {
            double norm = 0.0;
            for (double x : e.position(v)) norm += x * x;
            CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
        }
        CHECK(e.objective <= e.initial_objective);
        CHECK(embedding_objective(g, e) == doctest::Approx(e.objective).epsilon(1e-12));
    }
}

TEST_CASE("coarsening examples") {
    Matrix a(4, 4);
    const double w[4][4] = {{0, 0.5, 1, 2}, {0.5, 0, 3, 4}, {1, 3, 0, -1}, {2, 4, -1, 0}};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) a(i, j) = w[i][j];
    LevelGraph g{a, std::vector<VertexSide>(4, VertexSide::row), std::vector<double>{0.1, 0.2, 0.3, 0.4},
                 std::vector<Spin>(4, 0)};
    Matching m;
    m.pairs = {{0, 1}, {2, 3}};
    m.vertex_map = {0, 0, 1, 1};
    m.coarse_size = 2;
    const LevelGraph c = contract(g, m);
    CHECK(c.adjacency(0, 1) == 1 + 2 + 3 + 4);
    CHECK(c.adjacency(1, 0) == 10);
    CHECK(c.adjacency(0, 0) == 0);
    CHECK(c.fields[0] == doctest::Approx(0.3));
    CHECK(c.fields[1] == doctest::Approx(0.7));
}

TEST_CASE("coarsening preserves or loses weight mass") {
    Rng rng(10);
    for (std::uint64_t t = 0; t < 30; ++t) {
        const bool bipartite = t % 2 == 0;
        LevelGraph g = bipartite ? to_level_graph(build_cut_problem(oracle::random_matrix(rng, 6, 7)))
                                 : random_graph(rng, 13, 0.5, false);
        const Embedding e = embed(g, 8, t, 50);
        const auto [c, m] = coarsen_once(g, e);
        double fine = 0.0, coarse = 0.0, internal = 0.0;
        for (double x : g.adjacency.data()) fine += std::abs(x);
        for (double x : c.adjacency.data()) coarse += std::abs(x);
        for (auto [i, j] : m.pairs) internal += std::abs(g.adjacency(i, j));
        CHECK(coarse <= fine + 1e-12);
        if (internal == 0.0) {
            // with same-sign accumulation this is equality; signs may cancel otherwise
            double signed_fine = 0.0, signed_coarse = 0.0;
            for (double x : g.adjacency.data()) signed_fine += x;
            for (double x : c.adjacency.data()) signed_coarse += x;
            CHECK(signed_coarse == doctest::Approx(signed_fine).epsilon(1e-12));
        }
        if (bipartite) CHECK(internal == 0.0);
    }

    // all-positive weights with no internal edges: equality of absolute mass
    Matrix pos(3, 3, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
    const LevelGraph bg = to_level_graph(build_cut_problem(pos));
    const auto [c, m] = coarsen_once(bg, embed(bg, 8, 1, 50));
    double fine = 0.0, coarse = 0.0;
    for (double x : bg.adjacency.data()) fine += std::abs(x);
    for (double x : c.adjacency.data()) coarse += std::abs(x);
    CHECK(coarse == doctest::Approx(fine).epsilon(1e-14));
}

TEST_CASE("coarse adjacency matches a dense product") {
    Rng rng(12);
    for (std::uint64_t t = 0; t < 30; ++t) {
        const LevelGraph g = random_graph(rng, 10, 0.6, true);
        const auto [c, m] = coarsen_once(g, embed(g, 8, t, 50));
        CHECK(c.adjacency == dense_coarse(g.adjacency, m.vertex_map, m.coarse_size));
    }
}

TEST_CASE("matching validity") {
    Rng rng(13);
    for (std::uint64_t t = 0; t < 30; ++t) {
        const std::size_t n = 4 + rng.below(8), mcols = 3 + rng.below(8);
        Matrix w = oracle::random_matrix(rng, mcols, n);
        std::vector<double> u(mcols);
        for (double& x : u) x = rng.uniform(-1, 1);
        const LevelGraph g = to_level_graph(build_fgl_problem(make_reduction(w, u)));
        const auto [c, m] = coarsen_once(g, embed(g, 8, t, 50));
        CHECK(m.coarse_size == m.pairs.size() + m.singles.size());
        CHECK(c.size() == m.coarse_size);
        std::multiset<std::size_t> seen;
        for (auto [i, j] : m.pairs) {
            seen.insert(i);
            seen.insert(j);
            CHECK(g.sides[i] == g.sides[j]);
            CHECK_FALSE(g.is_pinned(i));
            CHECK_FALSE(g.is_pinned(j));
            CHECK(m.vertex_map[i] == m.vertex_map[j]);
        }
        for (auto s : m.singles) seen.insert(s);
        CHECK(seen.size() == g.size());
        CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == g.size());
        std::set<std::size_t> image(m.vertex_map.begin(), m.vertex_map.end());
        CHECK(image.size() == m.coarse_size);
        CHECK(*image.rbegin() == m.coarse_size - 1);
        CHECK(c.free_count() + 1 == c.size());
    }
}

TEST_CASE("hierarchy sizes") {
    Rng rng(14);
    const LevelGraph g100 = random_graph(rng, 100, 0.1, false);
    const Hierarchy h = build_hierarchy(to_problem(g100), 25, HiqConfig{});
    CHECK(h.levels.back().free_count() <= 25);
    CHECK(h.levels.back().free_count() >= 13);
    CHECK(h.matchings.size() + 1 == h.levels.size());
    for (std::size_t k = 1; k < h.levels.size(); ++k) CHECK(h.levels[k].size() < h.levels[k - 1].size());

    const Hierarchy single = build_hierarchy(to_problem(random_graph(rng, 20, 0.3, false)), 20, HiqConfig{});
    CHECK(single.levels.size() == 1);
    CHECK(single.matchings.empty());

    const Hierarchy h64 = build_hierarchy(to_problem(random_graph(rng, 64, 0.5, false)), 16, HiqConfig{});
    std::vector<std::size_t> sizes;
    for (const auto& l : h64.levels) sizes.push_back(l.size());
    std::vector<std::size_t> expected{64};
    while (expected.back() > 16) expected.push_back((expected.back() + 1) / 2);
    REQUIRE(sizes.size() == expected.size());
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        CHECK(sizes[k] + 1 >= expected[k]);
        CHECK(sizes[k] <= expected[k] + 1);
    }

    CHECK_THROWS(build_hierarchy(to_problem(g100), 3, HiqConfig{}));
}

TEST_CASE("projection") {
    Rng rng(15);
    const LevelGraph g = random_graph(rng, 12, 0.5, true);
    Matching id;
    id.vertex_map.resize(12);
    std::iota(id.vertex_map.begin(), id.vertex_map.end(), 0);
    id.singles = id.vertex_map;
    id.coarse_size = 12;
    SpinAssignment s{random_spins(rng, 12), 0.0};
    s.energy = energy(g, s.spins);
    CHECK(project(s, id, g).spins == s.spins);

    Matching pair;
    pair.pairs = {{1, 2}};
    pair.singles = {0};
    pair.vertex_map = {1, 0, 0};
    pair.coarse_size = 2;
    const LevelGraph three = random_graph(rng, 3, 1.0, false);
    const SpinAssignment p = project(SpinAssignment{{-1, 1}, 0.0}, pair, three);
    CHECK(p.spins == std::vector<Spin>{1, -1, -1});
    CHECK(p.energy == energy(three, p.spins));

    for (std::uint64_t t = 0; t < 20; ++t) {
        const LevelGraph fine = random_graph(rng, 12, 0.5, true);
        const auto [c, m] = coarsen_once(fine, embed(fine, 8, t, 50));
        SpinAssignment sc{random_spins(rng, c.size()), 0.0};
        const SpinAssignment sf = project(sc, m, fine);
        std::vector<Spin> expanded(12);
        for (std::size_t i = 0; i < 12; ++i) expanded[i] = sc.spins[m.vertex_map[i]];
        CHECK(sf.spins == expanded);
        CHECK(sf.energy == doctest::Approx(energy(fine, expanded)).epsilon(1e-12));
    }
    CHECK_THROWS(project(SpinAssignment{{1}, 0.0}, pair, three));
}

TEST_CASE("coarse consistency") {
    Rng rng(16);
    for (std::uint64_t t = 0; t < 30; ++t) {
        const LevelGraph fine = random_graph(rng, 14, 0.7, true);
        const auto [c, m] = coarsen_once(fine, embed(fine, 8, t, 50));
        const std::vector<Spin> sc = random_spins(rng, c.size());
        const SpinAssignment sf = project(SpinAssignment{sc, 0.0}, m, fine);
        double internal = 0.0;
        for (auto [i, j] : m.pairs) internal += fine.adjacency(i, j) * sf.spins[i] * sf.spins[j];
        CHECK(energy(c, sc) == doctest::Approx(sf.energy + internal).epsilon(1e-12));
    }
}

TEST_CASE("gains") {
    const LevelGraph two = to_level_graph(CouplingProblem(2, {{0, 1, 1.0}}));
    CHECK(gains(two, std::vector<Spin>{1, 1}) == std::vector<double>{1, 1});
    CHECK(gains(two, std::vector<Spin>{1, -1}) == std::vector<double>{-1, -1});

    Rng rng(17);
    for (int t = 0; t < 50; ++t) {
        const LevelGraph g = random_graph(rng, 3 + rng.below(60), 0.4, t % 2 == 0);
        const auto s = random_spins(rng, g.size());
        const auto gain = gains(g, s);
        const double e = energy(g, s);
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto f = s;
            f[i] = static_cast<Spin>(-f[i]);
            const double diff = energy(g, f) - e;
            CHECK(std::abs(diff - 2 * gain[i]) <= 1e-9 * std::max(1.0, std::abs(e)));
        }
    }
}

TEST_CASE("refinement") {
    Rng rng(18);
    SolverConfig exact;
    exact.backend = Backend::exhaustive;

    int optimal = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        const LevelGraph g = random_graph(rng, 12, 0.3, t % 2 == 0);
        const double best = solve(to_problem(g), exact).energy;
        SpinAssignment start{std::vector<Spin>(12, 1), 0.0};
        start.energy = energy(g, start.spins);
        HiqConfig cfg = exhaustive_cfg(10);
        const RefineResult r = refine_level(g, start, 10, cfg, t);
        CHECK(r.assignment.energy <= start.energy);
        CHECK(r.assignment.energy == doctest::Approx(energy(g, r.assignment.spins)).epsilon(1e-12));
        for (std::size_t k = 1; k < r.energy_trace.size(); ++k) CHECK(r.energy_trace[k] < r.energy_trace[k - 1]);
        if (std::abs(r.assignment.energy - best) <= 1e-9) ++optimal;

        if (t < 20) {
            const SpinAssignment opt = solve(to_problem(g), exact);
            const RefineResult same = refine_level(g, opt, 10, cfg, t);
            CHECK(same.assignment.energy == opt.energy);

            const RefineResult full = refine_level(g, start, 12, cfg, t);
            CHECK(full.assignment.energy == doctest::Approx(best).epsilon(1e-12));
        }
    }
    CHECK(optimal >= 90);
}

TEST_CASE("two-layer estimator") {
    HiqConfig cfg = exhaustive_cfg(16);
    const Network zero(std::vector<WeightMatrix>{{Matrix(3, 4, 1.0), {}}, {Matrix(2, 3, 0.0), {}}});
    CHECK(hiq_lip_two_layer(zero, 1, cfg).value == 0.0);

    Matrix eye(4, 4);
    for (std::size_t i = 0; i < 4; ++i) eye(i, i) = 1.0;
    const Network id(std::vector<WeightMatrix>{{eye, {}}, {Matrix(1, 4, 1.0), {}}});
    CHECK(hiq_lip_two_layer(id, 0, cfg).value == 4.0);

    int exact = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        const std::size_t n = 2 + rng.below(11), m = 2 + rng.below(11);
        const Network net = generate_synthetic(seed, std::vector<std::size_t>{n, m, 2}, 1.0);
        const Estimate e = hiq_lip_two_layer(net, 1, cfg);
        const double truth = oracle::network_fgl(net, 1);
        CHECK(e.value <= truth + 1e-9);
        if (std::abs(e.value - truth) <= 1e-9) ++exact;
        CHECK(!e.trace.empty());
        double previous = std::numeric_limits<double>::infinity();
        for (const auto& level : e.trace) {
            CHECK(level.contains("level"));
            CHECK(level.contains("vertices"));
            CHECK(level.contains("iterations"));
            CHECK(level["energy_after"].get<double>() <= level["energy_before"].get<double>());
            CHECK(level["energy_before"].get<double>() <= previous + 1e-9);
            previous = level["energy_after"].get<double>();
        }
    }
    CHECK(exact >= 28);

    CHECK_THROWS(hiq_lip_two_layer(generate_synthetic(1, std::vector<std::size_t>{2, 2, 2, 2}, 1.0), 0, cfg));
}

TEST_CASE("estimate is invariant under relabeling") {
    HiqConfig cfg = exhaustive_cfg(30);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Network net = generate_synthetic(seed, std::vector<std::size_t>{6, 9, 3}, 1.0);
        const Matrix& w1 = net.layer(0).weights;
        const Matrix& w2 = net.layer(1).weights;
        Matrix p1(9, 6), p2(3, 9);
        for (std::size_t i = 0; i < 9; ++i)
            for (std::size_t j = 0; j < 6; ++j) p1(i, j) = w1((i + 4) % 9, (j + 1) % 6);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 9; ++j) p2(i, j) = w2(i, (j + 4) % 9);
        const Network perm(std::vector<WeightMatrix>{{p1, {}}, {p2, {}}});
        CHECK(hiq_lip_two_layer(perm, 2, cfg).value == doctest::Approx(hiq_lip_two_layer(net, 2, cfg).value).epsilon(1e-12));
    }
}
