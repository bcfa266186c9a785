#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sse/adversary.hpp"
#include "sse/estimator.hpp"
#include "sse/linear_system.hpp"
#include "sse/observability.hpp"

namespace sse {

inline constexpr const char* kSoftwareName = "securestate";
inline constexpr const char* kSoftwareVersion = SSE_VERSION;

enum class ExperimentMode { prediction, filtering, noiseless_decode, observability_report };
const char* to_string(ExperimentMode mode);

struct AttackConfig {
    std::string strategy = "none";  // none | zero_out | bias | replay | scripted
    Eigen::VectorXd bias;           // params.b: one entry (broadcast) or one per attacked sensor
    int delay = 1;                  // params.delay
    Eigen::MatrixXd table;          // params.table, p x T
    /// Empty optional means "worst_case_scan".
    std::optional<SensorSet> attacked_set = SensorSet{};

    bool worst_case_scan() const noexcept { return !attacked_set.has_value(); }
    AttackStrategy make_strategy() const;
};

struct ExperimentConfig {
    Eigen::MatrixXd A;
    Eigen::MatrixXd C;
    double sigma_w = 0;
    double sigma_v = 0;
    std::optional<Eigen::VectorXd> initial_state;
    int k = 0;
    ExperimentMode mode = ExperimentMode::prediction;
    AttackConfig attack;
    int N = 10'000;
    std::optional<double> epsilon;
    int burn_in = 200;
    int trials = 1;
    std::uint64_t seed = 0;
    /// Fraction of passing trials needed for a zero exit status.
    double required_pass_fraction = 0.95;

    LinearSystem system() const { return LinearSystem(A, C, sigma_w, sigma_v); }
    WindowConfig window() const { return WindowConfig::after_burn_in(burn_in, N, epsilon); }
};

bool operator==(const AttackConfig& a, const AttackConfig& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Parses and validates a JSON config. Throws ConfigError whose path() is either a
/// field path such as "system.C[2]" or "line:column" for syntax errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Full config echo (defaults included); parse_config(to_json(c).dump()) == c.
nlohmann::ordered_json to_json(const ExperimentConfig& config);

/// Checks dimensions and ranges of an already-built config; throws ConfigError.
void validate_config(const ExperimentConfig& config);

struct TrialRow {
    int trial = 0;
    std::uint64_t seed = 0;
    SensorSet attacked_set;
    std::optional<SensorSet> selected_set;
    double mse = 0;  // NaN when no candidate set passed
    double bound = 0;
    bool pass = false;
};

struct OracleRow {
    int trial = 0;
    std::uint64_t seed = 0;
    SensorSet attacked_set;
    double secure_mse = 0;
    double oracle_mse = 0;
    double oracle_bound = 0;  // P_opt or F_opt of the true good set
};

struct Aggregate {
    int trials = 0;
    double pass_fraction = 0;
    double mean_mse = 0;  // over rows with a finite mse
    double bound = 0;
    double epsilon = 0;
};

struct ScanEntry {
    SensorSet attacked_set;
    Aggregate aggregate;
};

struct ObservabilityReport {
    int p = 0;
    int theta = 0;
    int k = 0;
    int max_correctable = 0;
    int max_detectable = 0;
    int min_hamming_distance = 0;
    int witness_distance = 0;
    bool sparse_condition_holds = false;
    std::vector<std::pair<SensorSet, bool>> examined_subsets;
};

struct DecodeRow {
    int trial = 0;
    SensorSet attacked_set;
    DecodeStatus status = DecodeStatus::infeasible;
    Eigen::VectorXd true_state;
    std::vector<Eigen::VectorXd> estimates;
};

/// Per-timestep window dump of one trial (row index into ExperimentResult::rows).
struct TraceDump {
    std::size_t row = 0;
    int t1 = 0;
    Eigen::MatrixXd states;     // n x N
    Eigen::MatrixXd estimates;  // n x N, empty when nothing was selected
};

struct ExperimentResult {
    ExperimentConfig config;
    std::string algorithm;
    std::vector<TrialRow> rows;
    Aggregate aggregate;
    std::vector<ScanEntry> scan;
    std::optional<SensorSet> worst_attacked_set;
    std::optional<ObservabilityReport> observability;
    std::vector<OracleRow> oracle;
    std::vector<DecodeRow> decode;
    std::vector<TraceDump> traces;

    /// Exit-status verdict: estimation modes need pass_fraction >= required_pass_fraction;
    /// noiseless decoding must succeed on every trial whenever the sparse condition holds.
    bool acceptance_passed() const;
};

struct RunOptions {
    int parallel = 1;
    bool with_oracle = false;
    bool keep_traces = false;
};

/// Seed of trial `trial`; shared across attacked sets in a worst-case scan.
std::uint64_t trial_seed(std::uint64_t seed, int trial);

/// Recomputes an aggregate from rows (epsilon and bound copied from the first row's run).
Aggregate aggregate_rows(const std::vector<TrialRow>& rows, double bound, double epsilon);

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// run_experiment with the oracle estimator alongside; requires the zero_out strategy.
ExperimentResult oracle_comparison(const ExperimentConfig& config, const RunOptions& options = {});

ObservabilityReport observability_report(const LinearSystem& system, int k);

enum class OutputFormat { csv, json, both };

/// Writes results.csv and/or results.json (plus oracle.csv when oracle rows exist and
/// trace_<row>.csv for every kept trace) into `dir`, creating it if needed.
/// Throws Error if a file cannot be written.
void emit_results(const ExperimentResult& result, const std::filesystem::path& dir, OutputFormat format);

std::string results_csv(const ExperimentResult& result);
std::string oracle_csv(const ExperimentResult& result);
std::string trace_csv(const TraceDump& trace);
/// `generated_at` is the only non-deterministic field.
nlohmann::ordered_json results_json(const ExperimentResult& result);

/// "%.17g" rendering used in every CSV.
std::string format_double(double x);

}  // namespace sse
