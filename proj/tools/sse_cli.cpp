// sse: command-line driver for secure state estimation experiments.
//
//   sse run                 --config cfg.json [--seed S] [--out DIR] [--format csv|json|both] [--parallel P]
//   sse report-observability --config cfg.json
//   sse decode-noiseless    --config cfg.json
//   sse compare-oracle      --config cfg.json
//
// Exit status: 0 all checks pass, 2 the experiment ran but a bound was violated,
// 3 configuration or precondition error, 1 anything else.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "sse/errors.hpp"
#include "sse/harness.hpp"

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    std::string format = "both";
    int parallel = 1;
    bool dump_trace = false;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "override the config seed");
    cmd->add_option("--out", o.out, "output directory")->capture_default_str();
    cmd->add_option("--format", o.format, "csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}))
        ->capture_default_str();
    cmd->add_option("--parallel", o.parallel, "worker threads for trials")->check(CLI::PositiveNumber);
    cmd->add_flag("--dump-trace", o.dump_trace, "write per-timestep trace_<row>.csv files");
}

void print_summary(const sse::ExperimentResult& r) {
    std::printf("mode: %s  algorithm: %s\n", sse::to_string(r.config.mode), r.algorithm.c_str());
    if (r.observability) {
        const auto& o = *r.observability;
        std::printf("theta=%d  p=%d  k=%d  max_correctable=%d  max_detectable=%d  min_hamming=%d  witness=%d  "
                    "sparse_condition=%s\n",
                    o.theta, o.p, o.k, o.max_correctable, o.max_detectable, o.min_hamming_distance, o.witness_distance,
                    o.sparse_condition_holds ? "holds" : "fails");
    }
    if (!r.rows.empty()) {
        const auto& a = r.aggregate;
        std::printf("trials=%d  pass_fraction=%.4f  mean_mse=%.6g  bound=%.6g  epsilon=%.6g\n", a.trials,
                    a.pass_fraction, a.mean_mse, a.bound, a.epsilon);
        if (r.worst_attacked_set)
            std::printf("worst attacked set: %s\n", sse::format_set(*r.worst_attacked_set).c_str());
    }
    for (const auto& d : r.decode)
        if (d.trial == 0) std::printf("decode {%s}: %s\n", sse::format_set(d.attacked_set).c_str(), to_string(d.status));
    std::printf("%s\n", r.acceptance_passed() ? "PASS" : "FAIL");
}

int execute(const std::string& command, const Options& o) {
    auto config = sse::load_config(o.config);
    if (o.seed) config.seed = *o.seed;
    if (command == "report-observability") config.mode = sse::ExperimentMode::observability_report;
    if (command == "decode-noiseless") config.mode = sse::ExperimentMode::noiseless_decode;

    sse::RunOptions run;
    run.parallel = o.parallel;
    run.keep_traces = o.dump_trace;
    const auto result =
        command == "compare-oracle" ? sse::oracle_comparison(config, run) : sse::run_experiment(config, run);

    const auto format = o.format == "csv"    ? sse::OutputFormat::csv
                        : o.format == "json" ? sse::OutputFormat::json
                                             : sse::OutputFormat::both;
    sse::emit_results(result, o.out, format);
    print_summary(result);
    return result.acceptance_passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Secure state estimation under sparse sensor attacks"};
    app.set_version_flag("--version", std::string(sse::kSoftwareVersion));
    app.require_subcommand(1);

    Options opts;
    std::string chosen;
    for (const char* name : {"run", "report-observability", "decode-noiseless", "compare-oracle"}) {
        auto* cmd = app.add_subcommand(name);
        add_common(cmd, opts);
        cmd->callback([&chosen, name] { chosen = name; });
    }
    app.get_subcommand("run")->description("Monte Carlo campaign with the configured estimator");
    app.get_subcommand("report-observability")->description("sparse observability index and coding bounds");
    app.get_subcommand("decode-noiseless")->description("brute-force noiseless secure decoding");
    app.get_subcommand("compare-oracle")->description("secure estimator against the oracle that knows the attacked set");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        return execute(chosen, opts);
    } catch (const sse::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const sse::PreconditionError& e) {
        std::cerr << "precondition error: " << e.what() << "\n";
        return 3;
    } catch (const sse::DimensionError& e) {
        std::cerr << "dimension error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
