#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sse/errors.hpp"
#include "sse/harness.hpp"

using namespace sse;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(SSE_SOURCE_DIR) / "configs";

std::string config_path_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<accepted>";
}

const char* kBase = R"({
  "system": {"A": [[1, 0], [0, 1]], "C": [[1, 0], [0, 1], [1, 1]], "sigma_w": 1, "sigma_v": 1},
  "k": 0, "mode": "prediction"
})";

ExperimentConfig small_scalar() {
    auto c = load_config(kConfigs / "scalar_zero_out.json");
    c.N = 2000;
    c.trials = 4;
    return c;
}

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("shipped configs parse and round-trip through the JSON echo") {
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
        CAPTURE(entry.path().string());
        const auto c = load_config(entry.path());
        const auto again = parse_config(to_json(c).dump());
        CHECK(again == c);
    }
    const auto c = load_config(kConfigs / "scalar_zero_out.json");
    CHECK(c.k == 1);
    CHECK(c.trials == 20);
    CHECK(c.attack.strategy == "zero_out");
    CHECK(c.attack.attacked_set == SensorSet{1});
    CHECK_FALSE(c.epsilon.has_value());
    CHECK(load_config(kConfigs / "coupled_worst_case_scan.json").attack.worst_case_scan());
}

TEST_CASE("config diagnostics name the offending field") {
    CHECK(config_path_of(kBase) == "<accepted>");
    CHECK(config_path_of(R"({"system": {"A": [[1, 0], [0]], "C": [[1, 0]], "sigma_w": 1, "sigma_v": 1},
                             "k": 0, "mode": "prediction"})") == "system.A[1]");
    CHECK(config_path_of(R"({"system": {"A": [[1, 0], [0, 1]], "C": [[1, 0, 2]], "sigma_w": 1, "sigma_v": 1},
                             "k": 0, "mode": "prediction"})") == "system.C[0]");
    CHECK(config_path_of(R"({"system": {"A": [[1, 0, 0], [0, 1, 0]], "C": [[1, 0, 2]], "sigma_w": 1, "sigma_v": 1},
                             "k": 0, "mode": "prediction"})") == "system.A");
    CHECK(config_path_of(R"({"system": {"A": [[1]], "C": [[1], ["x"]], "sigma_w": 1, "sigma_v": 1},
                             "k": 0, "mode": "prediction"})") == "system.C[1][0]");
    CHECK(config_path_of(R"({"system": {"A": [[1]], "C": [[1], [1]], "sigma_w": -1, "sigma_v": 1},
                             "k": 0, "mode": "prediction"})") == "system.sigma_w");
    CHECK(config_path_of(R"({"system": {"A": [[1]], "C": [[1], [1]], "sigma_w": 1, "sigma_v": 1},
                             "k": 1, "mode": "prediction", "attack": {"strategy": "zero_out", "attacked_set": [5]}})") ==
          "attack.attacked_set[0]");
    CHECK(config_path_of(R"({"system": {"A": [[1]], "C": [[1], [1]], "sigma_w": 1, "sigma_v": 1},
                             "k": 1, "mode": "prediction", "attack": {"strategy": "replay", "params": {"b": 1}}})") ==
          "attack.params.b");
    CHECK(config_path_of(R"({"system": {"A": [[1]], "C": [[1], [1]], "sigma_w": 1, "sigma_v": 1},
                             "k": 0, "mode": "prediction", "trials": 0})") == "trials");
    CHECK(config_path_of(R"({"system": {"A": [[1]], "C": [[1]], "sigma_w": 1, "sigma_v": 1},
                             "k": 0, "mode": "predict"})") == "mode");
    CHECK(config_path_of(R"({"system": {"A": [[1]], "C": [[1]], "sigma_w": 1, "sigma_v": 1},
                             "k": 0, "mode": "prediction", "extra": 1})") == "extra");
    CHECK(config_path_of(R"({"system": {"A": [[1]], "C": [[1]], "sigma_w": 1},
                             "k": 0, "mode": "prediction"})") == "system.sigma_v");
    CHECK(config_path_of("{\n  \"k\": 1,\n  \"mode\": ]\n}") == "3:11");
    CHECK_THROWS_AS(load_config(kConfigs / "missing.json"), ConfigError);
}

TEST_CASE("noiseless unattacked run has zero error") {
    auto c = parse_config(kBase);
    c.sigma_w = 0;
    c.sigma_v = 0;
    c.trials = 1;
    c.N = 50;
    c.burn_in = 10;
    const auto r = run_experiment(c);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].mse == 0.0);
    CHECK(r.rows[0].pass);
    CHECK(r.acceptance_passed());
}

TEST_CASE("observability report of the five-sensor plane") {
    const auto r = run_experiment(load_config(kConfigs / "plane_observability.json"));
    REQUIRE(r.observability.has_value());
    CHECK(r.observability->theta == 2);
    CHECK(r.observability->max_correctable == 1);
    CHECK(r.observability->max_detectable == 3);
    CHECK(r.observability->min_hamming_distance == 4);
    CHECK(r.observability->witness_distance == 4);
    CHECK_FALSE(r.observability->sparse_condition_holds);
    CHECK(r.rows.empty());
}

TEST_CASE("sparse condition is enforced before estimation") {
    auto c = load_config(kConfigs / "plane_observability.json");
    c.mode = ExperimentMode::prediction;
    c.sigma_w = c.sigma_v = 1;
    CHECK_THROWS_AS(run_experiment(c), PreconditionError);
}

TEST_CASE("rows, aggregate and files agree") {
    const auto r = run_experiment(small_scalar());
    CHECK(r.algorithm == "scalar_prediction");
    REQUIRE(r.rows.size() == 4);
    const auto csv = split_csv(results_csv(r));
    REQUIRE(csv.size() == 5);
    CHECK(csv[0] == std::vector<std::string>{"trial", "seed", "attacked_set", "selected_set", "mse", "bound", "pass"});
    double sum = 0;
    for (std::size_t i = 1; i < csv.size(); ++i) {
        CHECK(csv[i][2] == "1");
        sum += std::stod(csv[i][4]);
    }
    const auto j = results_json(r);
    CHECK(std::abs(j["aggregate"]["mean_mse"].get<double>() - sum / 4) < 1e-12);
    CHECK(j["software"]["version"] == kSoftwareVersion);
    CHECK(j["rows"].size() == 4);
    CHECK(parse_config(j["config"].dump()) == r.config);

    const auto again = aggregate_rows(r.rows, r.aggregate.bound, r.aggregate.epsilon);
    CHECK(again.pass_fraction == r.aggregate.pass_fraction);
    CHECK(again.mean_mse == r.aggregate.mean_mse);

    const fs::path dir = fs::temp_directory_path() / "sse_harness_test";
    fs::remove_all(dir);
    emit_results(r, dir, OutputFormat::both);
    CHECK(fs::exists(dir / "results.csv"));
    CHECK(fs::exists(dir / "results.json"));
    CHECK_FALSE(fs::exists(dir / "oracle.csv"));
    std::ifstream in(dir / "results.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == results_csv(r));
    fs::remove_all(dir);

    CHECK_THROWS_AS(emit_results(r, "/proc/sse-cannot-write-here", OutputFormat::csv), Error);
}

TEST_CASE("runs are deterministic and independent of the thread count") {
    const auto c = small_scalar();
    const auto a = run_experiment(c);
    RunOptions opts;
    opts.parallel = 3;
    const auto b = run_experiment(c, opts);
    CHECK(results_csv(a) == results_csv(b));
    auto ja = results_json(a);
    auto jb = results_json(b);
    ja.erase("generated_at");
    jb.erase("generated_at");
    CHECK(ja.dump() == jb.dump());

    auto other = c;
    other.seed += 1;
    CHECK(results_csv(run_experiment(other)) != results_csv(a));
}

TEST_CASE("worst-case scan covers every attacked set") {
    auto c = load_config(kConfigs / "coupled_worst_case_scan.json");
    c.trials = 2;
    c.N = 2000;
    const auto r = run_experiment(c);
    CHECK(r.algorithm == "vector_prediction");
    CHECK(r.rows.size() == 10);
    REQUIRE(r.scan.size() == 5);
    REQUIRE(r.worst_attacked_set.has_value());
    double worst = 1.0;
    for (const auto& e : r.scan) worst = std::min(worst, e.aggregate.pass_fraction);
    CHECK(r.aggregate.pass_fraction == worst);
    CHECK(r.rows[2].attacked_set == SensorSet{1});
    CHECK(r.rows[0].seed == r.rows[2].seed);
}

TEST_CASE("trace dump") {
    auto c = small_scalar();
    c.trials = 1;
    c.N = 100;
    RunOptions opts;
    opts.keep_traces = true;
    const auto r = run_experiment(c, opts);
    REQUIRE(r.traces.size() == 1);
    const auto rows = split_csv(trace_csv(r.traces[0]));
    CHECK(rows.size() == 101);
    CHECK(rows[0] == std::vector<std::string>{"t", "x0", "xhat0", "squared_error"});
    CHECK(rows[1][0] == std::to_string(c.burn_in));
}

TEST_CASE("noiseless decoding mode") {
    const auto r = run_experiment(load_config(kConfigs / "plane_decode.json"));
    CHECK(r.rows.size() == 50);
    CHECK(r.aggregate.pass_fraction == 1.0);
    for (const auto& d : r.decode) CHECK(d.status == DecodeStatus::unique);
    CHECK(r.acceptance_passed());

    auto noisy = load_config(kConfigs / "plane_decode.json");
    noisy.sigma_v = 0.1;
    CHECK_THROWS_AS(run_experiment(noisy), PreconditionError);
}

TEST_CASE("oracle comparison") {
    auto c = small_scalar();
    c.trials = 2;
    const auto r = oracle_comparison(c);
    REQUIRE(r.oracle.size() == 2);
    for (const auto& o : r.oracle) {
        CHECK(o.oracle_bound == doctest::Approx((1 + std::sqrt(3.0)) / 2));
        CHECK(o.secure_mse == r.rows[static_cast<std::size_t>(o.trial)].mse);
    }
    CHECK(split_csv(oracle_csv(r)).size() == 3);

    auto none = c;
    none.k = 0;
    none.attack = AttackConfig{};
    const auto z = oracle_comparison(none);
    for (std::size_t i = 0; i < z.oracle.size(); ++i) {
        CHECK(z.oracle[i].oracle_bound == doctest::Approx(z.rows[i].bound));
        CHECK(z.oracle[i].oracle_mse == doctest::Approx(z.rows[i].mse));
    }

    auto biased = c;
    biased.attack.strategy = "bias";
    biased.attack.bias = Eigen::VectorXd::Constant(1, 3.0);
    CHECK_THROWS_AS(oracle_comparison(biased), PreconditionError);
}
