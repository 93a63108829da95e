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

#include "hiqlip/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"

#include "hiqlip/bench.hpp"

namespace hiqlip {

namespace {

struct SolverFlags {
    std::string solver = "annealing";
    std::string selection = "abs";
    std::string endpoint;
};

void add_solver_flags(CLI::App& app, MethodOptions& opts, SolverFlags& flags) {
    auto& s = opts.hiq.solver;
    app.add_option("--solver", flags.solver, "QUBO backend")
        ->check(CLI::IsMember({"exhaustive", "annealing", "remote"}))
        ->capture_default_str();
    app.add_option("--qubit-budget", opts.hiq.qubit_budget, "Largest subproblem handed to the backend")
        ->check(CLI::Range(4, 1 << 20))
        ->capture_default_str();
    app.add_option("--seed", s.seed, "Solver seed")->capture_default_str();
    app.add_option("--reads", s.num_reads, "Annealing restarts")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--sweeps", s.sweeps, "Annealing sweeps per read")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--beta-min", s.beta_min, "Initial inverse temperature")->capture_default_str();
    app.add_option("--beta-max", s.beta_max, "Final inverse temperature")->capture_default_str();
    app.add_option("--exhaustive-cap", s.max_vars_exhaustive, "Free-variable cap of the exhaustive backend")
        ->check(CLI::Range(1, 30))
        ->capture_default_str();
    app.add_option("--endpoint", flags.endpoint, "Remote solver base URL (HIQLIP_REMOTE_ENDPOINT overrides)");
    app.add_option("--timeout-ms", s.timeout_ms, "Remote solver timeout")->capture_default_str();
    app.add_flag("--parallel-reads", s.parallel_reads, "Run annealing reads on worker threads");
    app.add_option("--selection", flags.selection, "Refinement node selection")
        ->check(CLI::IsMember({"abs", "signed"}))
        ->capture_default_str();
    app.add_option("--restarts", opts.hiq.recursion_restarts, "Random activation restarts for the recursion")
        ->capture_default_str();
    app.add_option("--samples", opts.sampling.num_samples, "Sampling budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--domain-low", opts.sampling.domain_low, "Sampling box lower bound")->capture_default_str();
    app.add_option("--domain-high", opts.sampling.domain_high, "Sampling box upper bound")->capture_default_str();
    app.add_option("--sample-seed", opts.sampling.seed, "Sampling seed")->capture_default_str();
    app.add_option("--threads", opts.sampling.threads, "Sampling worker threads")->capture_default_str();
    app.add_option("--bf-cap", opts.bf_cap, "Hidden-unit cap for brute force")->capture_default_str();
    app.add_option("--block-size", opts.block_size, "Layers per block for the block product")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

void finish_solver_flags(MethodOptions& opts, const SolverFlags& flags) {
    opts.hiq.solver.backend = parse_backend(flags.solver);
    opts.hiq.selection = flags.selection == "signed" ? Selection::signed_gain : Selection::abs;
    if (!flags.endpoint.empty()) opts.hiq.solver.remote_endpoint = flags.endpoint;
    if (const char* env = std::getenv("HIQLIP_REMOTE_ENDPOINT"); env && *env) opts.hiq.solver.remote_endpoint = env;
    opts.hiq.solver.validate();
    opts.sampling.validate();
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lipschitz constant estimation for ReLU networks via multilevel QUBO"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "hiqlip 0.1.0");

    // estimate
    auto* est_cmd = app.add_subcommand("estimate", "Estimate the l_inf -> l_1 Lipschitz constant of one output");
    std::string net_path;
    std::size_t class_index = 8;
    std::string method = "hiq";
    bool as_csv = false;
    bool as_json = false;
    MethodOptions est_opts;
    SolverFlags est_flags;
    est_cmd->add_option("--network", net_path, "hiqlip-net-v1 weight file")->required();
    est_cmd->add_option("--class", class_index, "Output index")->capture_default_str();
    est_cmd->add_option("--method", method, "Estimator")
        ->check(CLI::IsMember(method_names()))
        ->capture_default_str();
    auto* json_flag = est_cmd->add_flag("--json", as_json, "Print a JSON record (default)");
    est_cmd->add_flag("--csv", as_csv, "Print a CSV record")->excludes(json_flag);
    add_solver_flags(*est_cmd, est_opts, est_flags);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Run a results table over synthetic networks");
    BenchConfig bench;
    std::string suite = "two-layer";
    std::string format = "csv";
    std::string bench_out;
    std::string trace_out;
    bool summary = false;
    SolverFlags bench_flags;
    bench_cmd->add_option("--suite", suite, "two-layer or multi-layer")
        ->check(CLI::IsMember({"two-layer", "multi-layer"}))
        ->capture_default_str();
    bench_cmd->add_option("--sizes,--widths,--depths", bench.sizes, "Hidden widths or depths")
        ->delimiter(',')
        ->required();
    bench_cmd->add_option("--seeds", bench.seeds, "Network seeds")->delimiter(',')->required();
    bench_cmd->add_option("--methods", bench.methods, "Estimators to run")->delimiter(',')->required();
    bench_cmd->add_option("--input-dim", bench.input_dim, "Input width")->capture_default_str();
    bench_cmd->add_option("--outputs", bench.outputs, "Output width")->capture_default_str();
    bench_cmd->add_option("--hidden-width", bench.hidden_width, "Hidden width (multi-layer)")->capture_default_str();
    bench_cmd->add_option("--class", bench.class_index, "Output index")->capture_default_str();
    bench_cmd->add_option("--scale", bench.scale, "Weight scale")->capture_default_str();
    bench_cmd->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    bench_cmd->add_option("--out", bench_out, "Output file (default stdout)");
    bench_cmd->add_option("--trace", trace_out, "Write per-level refinement traces as JSON lines");
    bench_cmd->add_flag("--summary", summary, "Print mean/min/max per (size, method) to stderr");
    add_solver_flags(*bench_cmd, bench.options, bench_flags);

    // gen
    auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic hiqlip-net-v1 network");
    std::vector<std::size_t> dims;
    std::uint64_t gen_seed = 0;
    double scale = 1.0;
    std::string gen_out;
    gen_cmd->add_option("--dims", dims, "Layer sizes, input first")->delimiter(',')->required();
    gen_cmd->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
    gen_cmd->add_option("--scale", scale, "Entries are uniform in [-scale, scale]")->capture_default_str();
    gen_cmd->add_option("--out", gen_out, "Output path")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << "hiqlip 0.1.0\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (est_cmd->parsed()) {
            finish_solver_flags(est_opts, est_flags);
            const Network net = load_network(net_path);
            const Estimate est = run_method(net, method, class_index, est_opts);
            if (as_csv) {
                std::ostringstream row;
                row << std::setprecision(17) << est.method << ',' << est.value << ',' << to_string(est.bound_kind)
                    << ',' << std::setprecision(6) << std::fixed << est.wall_time_s;
                out << "method,value,bound_kind,wall_time_s\n" << row.str() << '\n';
            } else {
                out << to_json(est).dump() << '\n';
            }
            return 0;
        }
        if (bench_cmd->parsed()) {
            finish_solver_flags(bench.options, bench_flags);
            bench.suite = parse_suite(suite);
            std::vector<std::string> skipped;
            const auto rows = run_bench(bench, &skipped);
            for (const auto& s : skipped) err << "skipped: " << s << '\n';
            write_or_print(bench_out, format == "csv" ? bench_csv(rows) : bench_jsonl(rows), out);
            if (!trace_out.empty()) write_or_print(trace_out, bench_traces(rows), out);
            if (summary) err << bench_summary(rows);
            return 0;
        }
        if (gen_cmd->parsed()) {
            if (dims.size() < 2) {
                err << "error: --dims needs at least two layer sizes (input and output)\n";
                return 1;
            }
            save_network(generate_synthetic(gen_seed, dims, scale), gen_out);
            return 0;
        }
    } catch (const RefusalError& e) {
        err << "refused: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace hiqlip
