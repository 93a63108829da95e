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

#include <atomic>
#include <chrono>
#include <thread>

#include "doctest.h"
#include "httplib.h"

#include "hiqlip/cutnorm.hpp"
#include "hiqlip/solvers.hpp"
#include "oracles.hpp"

using namespace hiqlip;
using nlohmann::json;

namespace {

// A local stand-in for a remote sampler. It solves requests exactly and can be
// told to misbehave.
class FakeDevice {
public:
    enum class Mode { good, wrong_energy, malformed, server_error, slow, short_assignment };

    FakeDevice() {
        server_.Post(R"(/(prefix/)?v1/solve)", [this](const httplib::Request& req, httplib::Response& res) {
            last_request_ = json::parse(req.body);
            ++requests_;
            handle(res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeDevice() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
    void set_mode(Mode m) { mode_ = m; }
    const json& last_request() const { return last_request_; }
    int requests() const { return requests_; }

private:
    void handle(httplib::Response& res) {
        const json& r = last_request_;
        const std::size_t n = r["num_vars"];
        std::vector<Coupling> couplings;
        for (const auto& q : r["quadratic"]) couplings.push_back({q[0], q[1], q[2]});
        std::vector<double> h(n, 0.0);
        for (const auto& l : r["linear"]) h[l[0].get<std::size_t>()] = l[1];
        const CouplingProblem p(n, couplings, h);
        SolverConfig exact;
        exact.backend = Backend::exhaustive;
        const SpinAssignment best = solve(p, exact);

        std::vector<int> worst(n, 1);
        json body = {{"assignments", json::array({worst, std::vector<int>(best.spins.begin(), best.spins.end())})},
                     {"energies", json::array({energy(p, std::vector<Spin>(n, 1)), best.energy})}};
        switch (mode_.load()) {
            case Mode::good: break;
            case Mode::wrong_energy: body["energies"][1] = best.energy - 1.0; break;
            case Mode::malformed: res.set_content("{\"assignments\": [", "application/json"); return;
            case Mode::server_error:
                res.status = 503;
                res.set_content("device busy", "text/plain");
                return;
            case Mode::slow: std::this_thread::sleep_for(std::chrono::milliseconds(600)); break;
            case Mode::short_assignment: body["assignments"][1].erase(0); break;
        }
        res.set_content(body.dump(), "application/json");
    }

    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<Mode> mode_{Mode::good};
    json last_request_;
    std::atomic<int> requests_{0};
};

SolverConfig remote_cfg(const std::string& endpoint) {
    SolverConfig cfg;
    cfg.backend = Backend::remote;
    cfg.remote_endpoint = endpoint;
    cfg.timeout_ms = 2000;
    return cfg;
}

}  // namespace

TEST_CASE("request wire format") {
    const CouplingProblem p(3, {{0, 2, 1.5}, {0, 1, -1.0}}, {0.0, 0.25, 0.0});
    SolverConfig cfg;
    cfg.num_reads = 7;
    const json r = backend::remote_request(p, cfg);
    CHECK(r["num_vars"] == 3);
    CHECK(r["num_reads"] == 7);
    CHECK(r["timeout_ms"] == cfg.timeout_ms);
    CHECK(r["linear"] == json::array({json::array({1, 0.25})}));
    CHECK(r["quadratic"].size() == 2);
}

TEST_CASE("remote backend round trip") {
    FakeDevice device;
    Rng rng(8);
    for (int t = 0; t < 5; ++t) {
        const Matrix a = oracle::random_matrix(rng, 3, 4);
        const Estimate e = cut_norm_inf1(a, remote_cfg(device.endpoint()));
        CHECK(e.value == doctest::Approx(oracle::cut_norm(a)).epsilon(1e-12));
        CHECK(e.bound_kind == BoundKind::lower);
    }
    CHECK(device.requests() == 5);

    // pinned spins are folded away before the request leaves
    const ClassReduction red = make_reduction(Matrix(2, 1, std::vector<double>{1, -1}), {1.0, 1.0});
    const SpinAssignment s = solve(build_fgl_problem(red), remote_cfg(device.endpoint()));
    CHECK(-s.energy / 2 == 1.0);
    CHECK(s.spins.back() == 1);
    CHECK(device.last_request()["num_vars"] == 3);

    // a path prefix in the endpoint is kept
    CHECK(solve(CouplingProblem(2, {{0, 1, 1.0}}), remote_cfg(device.endpoint() + "/prefix/")).energy == -1.0);
}

TEST_CASE("remote failures surface as solver errors") {
    FakeDevice device;
    const CouplingProblem p(3, {{0, 1, 1.0}, {1, 2, -2.0}});
    for (auto mode : {FakeDevice::Mode::wrong_energy, FakeDevice::Mode::malformed, FakeDevice::Mode::server_error,
                      FakeDevice::Mode::short_assignment}) {
        device.set_mode(mode);
        CHECK_THROWS_AS(solve(p, remote_cfg(device.endpoint())), SolverError);
    }

    device.set_mode(FakeDevice::Mode::slow);
    SolverConfig quick = remote_cfg(device.endpoint());
    quick.timeout_ms = 100;
    CHECK_THROWS_AS(solve(p, quick), SolverError);
}

TEST_CASE("unreachable endpoint") {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    const CouplingProblem p(2, {{0, 1, 1.0}});
    try {
        solve(p, remote_cfg("http://127.0.0.1:" + std::to_string(port)));
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).find("127.0.0.1") != std::string::npos);
    }
}

TEST_CASE("response validation") {
    const CouplingProblem p(2, {{0, 1, 1.0}});
    CHECK(backend::parse_remote_response(p, json{{"assignments", {{1, 1}}}, {"energies", {-1.0}}}) ==
          std::vector<Spin>{1, 1});
    CHECK_THROWS_AS(backend::parse_remote_response(p, json{{"assignments", {{1, 0}}}, {"energies", {-1.0}}}),
                    SolverError);
    CHECK_THROWS_AS(backend::parse_remote_response(p, json{{"assignments", json::array()}, {"energies", json::array()}}),
                    SolverError);
    CHECK_THROWS_AS(backend::parse_remote_response(p, json::object()), SolverError);
}
