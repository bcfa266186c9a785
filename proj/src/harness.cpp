#include "sse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "sse/errors.hpp"
#include "sse/kalman.hpp"
#include "sse/rng.hpp"
#include "sse/simulation.hpp"

namespace sse {

using json = nlohmann::ordered_json;

const char* to_string(ExperimentMode mode) {
    switch (mode) {
        case ExperimentMode::prediction: return "prediction";
        case ExperimentMode::filtering: return "filtering";
        case ExperimentMode::noiseless_decode: return "noiseless_decode";
        case ExperimentMode::observability_report: return "observability_report";
    }
    return "unknown";
}

AttackStrategy AttackConfig::make_strategy() const {
    if (strategy == "none") return strategy::None{};
    if (strategy == "zero_out") return strategy::ZeroOut{};
    if (strategy == "bias") return strategy::Bias{bias};
    if (strategy == "replay") return strategy::Replay{delay};
    if (strategy == "scripted") return strategy::Scripted{table};
    throw ConfigError("attack.strategy", "unknown strategy '" + strategy + "'");
}

namespace {

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

}  // namespace

bool operator==(const AttackConfig& a, const AttackConfig& b) {
    return a.strategy == b.strategy && same_matrix(a.bias, b.bias) && a.delay == b.delay &&
           same_matrix(a.table, b.table) && a.attacked_set == b.attacked_set;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    const bool init_eq = a.initial_state.has_value() == b.initial_state.has_value() &&
                         (!a.initial_state || same_matrix(*a.initial_state, *b.initial_state));
    return same_matrix(a.A, b.A) && same_matrix(a.C, b.C) && a.sigma_w == b.sigma_w && a.sigma_v == b.sigma_v &&
           init_eq && a.k == b.k && a.mode == b.mode && a.attack == b.attack && a.N == b.N && a.epsilon == b.epsilon &&
           a.burn_in == b.burn_in && a.trials == b.trials && a.seed == b.seed &&
           a.required_pass_fraction == b.required_pass_fraction;
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return item.key() == a; });
        if (!ok) throw ConfigError(child(path, item.key()), "unknown field");
    }
}

const json& require(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ConfigError(child(path, key), "missing required field");
    return j.at(key);
}

double read_double(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
    return x;
}

long long read_int(const json& j, const std::string& path) {
    if (j.is_number_integer()) return j.get<long long>();
    if (j.is_number_float()) {
        const double x = j.get<double>();
        if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
    }
    throw ConfigError(path, "expected an integer");
}

int read_int32(const json& j, const std::string& path) {
    const long long v = read_int(j, path);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(path, "integer out of range");
    return static_cast<int>(v);
}

std::uint64_t read_seed(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    const long long v = read_int(j, path);
    if (v < 0) throw ConfigError(path, "seed must be non-negative");
    return static_cast<std::uint64_t>(v);
}

Eigen::VectorXd read_vector(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = read_double(j[i], index(path, i));
    return v;
}

Eigen::MatrixXd read_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of rows");
    std::size_t cols = 0;
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string rp = index(path, r);
        if (!j[r].is_array()) throw ConfigError(rp, "expected a row array");
        if (r == 0) {
            cols = j[r].size();
            if (cols == 0) throw ConfigError(rp, "row is empty");
        } else if (j[r].size() != cols) {
            throw ConfigError(rp, "row has " + std::to_string(j[r].size()) + " entries, expected " +
                                      std::to_string(cols) + " (matrix must be rectangular)");
        }
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                read_double(j[r][c], index(index(path, r), c));
    return m;
}

SensorSet read_set(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected an array of sensor indices or \"worst_case_scan\"");
    SensorSet s;
    for (std::size_t i = 0; i < j.size(); ++i) s.push_back(read_int32(j[i], index(path, i)));
    return s;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

ExperimentMode read_mode(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    const auto s = j.get<std::string>();
    if (s == "prediction") return ExperimentMode::prediction;
    if (s == "filtering") return ExperimentMode::filtering;
    if (s == "noiseless_decode") return ExperimentMode::noiseless_decode;
    if (s == "observability_report") return ExperimentMode::observability_report;
    throw ConfigError(path, "unknown mode '" + s +
                                "' (expected prediction, filtering, noiseless_decode or observability_report)");
}

AttackConfig read_attack(const json& j) {
    const std::string path = "attack";
    expect_object(j, path);
    reject_unknown(j, path, {"strategy", "params", "attacked_set"});
    AttackConfig a;
    if (j.contains("strategy")) {
        const auto& s = j.at("strategy");
        if (!s.is_string()) throw ConfigError("attack.strategy", "expected a string");
        a.strategy = s.get<std::string>();
    }
    const std::string pp = "attack.params";
    const json params = j.contains("params") ? j.at("params") : json::object();
    expect_object(params, pp);
    if (a.strategy == "none" || a.strategy == "zero_out") {
        reject_unknown(params, pp, {});
    } else if (a.strategy == "bias") {
        reject_unknown(params, pp, {"b"});
        const auto& b = require(params, pp, "b");
        a.bias = b.is_array() ? read_vector(b, "attack.params.b") : Eigen::VectorXd::Constant(1, read_double(b, "attack.params.b"));
    } else if (a.strategy == "replay") {
        reject_unknown(params, pp, {"delay"});
        a.delay = read_int32(require(params, pp, "delay"), "attack.params.delay");
    } else if (a.strategy == "scripted") {
        reject_unknown(params, pp, {"table"});
        a.table = read_matrix(require(params, pp, "table"), "attack.params.table");
    } else {
        throw ConfigError("attack.strategy",
                          "unknown strategy '" + a.strategy + "' (expected none, zero_out, bias, replay or scripted)");
    }
    if (j.contains("attacked_set")) {
        const auto& s = j.at("attacked_set");
        if (s.is_string()) {
            if (s.get<std::string>() != "worst_case_scan")
                throw ConfigError("attack.attacked_set", "expected an index array or \"worst_case_scan\"");
            a.attacked_set.reset();
        } else {
            a.attacked_set = read_set(s, "attack.attacked_set");
        }
    }
    return a;
}

}  // namespace

void validate_config(const ExperimentConfig& c) {
    if (c.A.rows() == 0 || c.A.rows() != c.A.cols())
        throw ConfigError("system.A", "must be square, got " + std::to_string(c.A.rows()) + "x" +
                                          std::to_string(c.A.cols()));
    const auto n = c.A.rows();
    if (c.C.rows() == 0) throw ConfigError("system.C", "must have at least one row");
    if (c.C.cols() != n)
        throw ConfigError("system.C[0]", "row has " + std::to_string(c.C.cols()) + " entries, expected n = " +
                                             std::to_string(n));
    const int p = static_cast<int>(c.C.rows());
    if (c.sigma_w < 0) throw ConfigError("system.sigma_w", "must be >= 0");
    if (c.sigma_v < 0) throw ConfigError("system.sigma_v", "must be >= 0");
    if (c.initial_state && c.initial_state->size() != n)
        throw ConfigError("system.initial_state", "has " + std::to_string(c.initial_state->size()) +
                                                      " entries, expected n = " + std::to_string(n));
    if (c.k < 0 || c.k >= p) throw ConfigError("k", "must lie in [0, p) with p = " + std::to_string(p));

    const auto& a = c.attack;
    if (a.attacked_set) {
        const auto& s = *a.attacked_set;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] < 0 || s[i] >= p)
                throw ConfigError(index("attack.attacked_set", i), "sensor index out of range [0, " +
                                                                       std::to_string(p) + ")");
            for (std::size_t q = 0; q < i; ++q)
                if (s[q] == s[i]) throw ConfigError(index("attack.attacked_set", i), "duplicate sensor index");
        }
        if (static_cast<int>(s.size()) > c.k)
            throw ConfigError("attack.attacked_set", "attacks " + std::to_string(s.size()) +
                                                         " sensors but k = " + std::to_string(c.k));
    }
    if (a.strategy == "bias") {
        const auto kap = a.attacked_set ? static_cast<Eigen::Index>(a.attacked_set->size()) : c.k;
        if (a.bias.size() != 1 && a.bias.size() != kap)
            throw ConfigError("attack.params.b", "needs 1 or " + std::to_string(kap) + " entries");
    } else if (a.strategy == "replay") {
        if (a.delay < 1) throw ConfigError("attack.params.delay", "must be >= 1");
    } else if (a.strategy == "scripted") {
        if (a.table.rows() != p)
            throw ConfigError("attack.params.table", "must have p = " + std::to_string(p) + " rows");
    }

    if (c.N < 1) throw ConfigError("window.N", "must be >= 1");
    if (c.burn_in < 0) throw ConfigError("window.burn_in", "must be >= 0");
    if (c.epsilon && *c.epsilon < 0) throw ConfigError("window.epsilon", "must be >= 0");
    if (c.trials < 1) throw ConfigError("trials", "must be >= 1");
    if (!(c.required_pass_fraction >= 0 && c.required_pass_fraction <= 1))
        throw ConfigError("required_pass_fraction", "must lie in [0, 1]");
}

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        throw ConfigError(std::to_string(line) + ":" + std::to_string(col), "JSON syntax error");
    }
    expect_object(root, "");
    reject_unknown(root, "",
                   {"system", "k", "mode", "attack", "window", "trials", "seed", "required_pass_fraction"});

    ExperimentConfig c;
    const auto& sys = require(root, "", "system");
    expect_object(sys, "system");
    reject_unknown(sys, "system", {"A", "C", "sigma_w", "sigma_v", "initial_state"});
    c.A = read_matrix(require(sys, "system", "A"), "system.A");
    c.C = read_matrix(require(sys, "system", "C"), "system.C");
    c.sigma_w = read_double(require(sys, "system", "sigma_w"), "system.sigma_w");
    c.sigma_v = read_double(require(sys, "system", "sigma_v"), "system.sigma_v");
    if (sys.contains("initial_state") && !sys.at("initial_state").is_null())
        c.initial_state = read_vector(sys.at("initial_state"), "system.initial_state");

    c.k = read_int32(require(root, "", "k"), "k");
    c.mode = read_mode(require(root, "", "mode"), "mode");
    if (root.contains("attack")) c.attack = read_attack(root.at("attack"));

    if (root.contains("window")) {
        const auto& w = root.at("window");
        expect_object(w, "window");
        reject_unknown(w, "window", {"N", "epsilon", "burn_in"});
        if (w.contains("N")) c.N = read_int32(w.at("N"), "window.N");
        if (w.contains("epsilon") && !w.at("epsilon").is_null())
            c.epsilon = read_double(w.at("epsilon"), "window.epsilon");
        if (w.contains("burn_in")) c.burn_in = read_int32(w.at("burn_in"), "window.burn_in");
    }
    if (root.contains("trials")) c.trials = read_int32(root.at("trials"), "trials");
    if (root.contains("seed")) c.seed = read_seed(root.at("seed"), "seed");
    if (root.contains("required_pass_fraction"))
        c.required_pass_fraction = read_double(root.at("required_pass_fraction"), "required_pass_fraction");

    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json set_json(const SensorSet& s) {
    json out = json::array();
    for (int d : s) out.push_back(d);
    return out;
}

}  // namespace

json to_json(const ExperimentConfig& c) {
    json sys;
    sys["A"] = matrix_json(c.A);
    sys["C"] = matrix_json(c.C);
    sys["sigma_w"] = c.sigma_w;
    sys["sigma_v"] = c.sigma_v;
    sys["initial_state"] = c.initial_state ? vector_json(*c.initial_state) : json(nullptr);

    json params = json::object();
    if (c.attack.strategy == "bias") params["b"] = vector_json(c.attack.bias);
    if (c.attack.strategy == "replay") params["delay"] = c.attack.delay;
    if (c.attack.strategy == "scripted") params["table"] = matrix_json(c.attack.table);
    json attack;
    attack["strategy"] = c.attack.strategy;
    attack["params"] = params;
    attack["attacked_set"] = c.attack.attacked_set ? set_json(*c.attack.attacked_set) : json("worst_case_scan");

    json window;
    window["N"] = c.N;
    window["epsilon"] = c.epsilon ? json(*c.epsilon) : json(nullptr);
    window["burn_in"] = c.burn_in;

    json out;
    out["system"] = sys;
    out["k"] = c.k;
    out["mode"] = to_string(c.mode);
    out["attack"] = attack;
    out["window"] = window;
    out["trials"] = c.trials;
    out["seed"] = c.seed;
    out["required_pass_fraction"] = c.required_pass_fraction;
    return out;
}

// ---------------------------------------------------------------------------
// running

std::uint64_t trial_seed(std::uint64_t seed, int trial) { return derive_seed(seed, static_cast<std::uint64_t>(trial)); }

Aggregate aggregate_rows(const std::vector<TrialRow>& rows, double bound, double epsilon) {
    Aggregate a;
    a.trials = static_cast<int>(rows.size());
    a.bound = bound;
    a.epsilon = epsilon;
    int passed = 0;
    int finite = 0;
    double sum = 0;
    for (const auto& r : rows) {
        if (r.pass) ++passed;
        if (std::isfinite(r.mse)) {
            ++finite;
            sum += r.mse;
        }
    }
    a.pass_fraction = rows.empty() ? 0.0 : static_cast<double>(passed) / static_cast<double>(rows.size());
    a.mean_mse = finite ? sum / finite : std::numeric_limits<double>::quiet_NaN();
    return a;
}

bool ExperimentResult::acceptance_passed() const {
    switch (config.mode) {
        case ExperimentMode::observability_report: return true;
        case ExperimentMode::noiseless_decode:
            return (observability && !observability->sparse_condition_holds) ||
                   std::all_of(rows.begin(), rows.end(), [](const TrialRow& r) { return r.pass; });
        default: return aggregate.pass_fraction >= config.required_pass_fraction;
    }
}

ObservabilityReport observability_report(const LinearSystem& system, int k) {
    const auto analysis = sparse_observability_index(system);
    ObservabilityReport r;
    r.p = analysis.p;
    r.theta = analysis.theta;
    r.k = k;
    r.max_correctable = analysis.max_correctable;
    r.max_detectable = analysis.max_detectable;
    r.min_hamming_distance = analysis.min_hamming_distance;
    r.sparse_condition_holds = check_sparse_condition(analysis, k);
    r.witness_distance = hamming_witness(system, analysis).distance;
    // ascending size, then lexicographic
    for (const auto& [s, obs] : analysis.per_subset_observable) r.examined_subsets.emplace_back(s, obs);
    std::stable_sort(r.examined_subsets.begin(), r.examined_subsets.end(),
                     [](const auto& a, const auto& b) { return a.first.size() < b.first.size(); });
    return r;
}

namespace {

// Runs job(i) for i in [0, count) on up to `parallel` threads; rethrows the first failure.
template <class Job>
void parallel_for(std::size_t count, int parallel, Job job) {
    const auto workers = static_cast<std::size_t>(std::max(1, parallel));
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<SensorSet> attacked_sets(const ExperimentConfig& c) {
    if (c.attack.attacked_set) return {*c.attack.attacked_set};
    return combinations(static_cast<int>(c.C.rows()), c.k);
}

void finish_scan(ExperimentResult& result, const std::vector<SensorSet>& sets, double bound, double epsilon) {
    const std::size_t per_set = static_cast<std::size_t>(result.config.trials);
    if (!result.config.attack.worst_case_scan()) {
        result.aggregate = aggregate_rows(result.rows, bound, epsilon);
        return;
    }
    std::size_t worst = 0;
    for (std::size_t s = 0; s < sets.size(); ++s) {
        const std::vector<TrialRow> slice(result.rows.begin() + static_cast<std::ptrdiff_t>(s * per_set),
                                          result.rows.begin() + static_cast<std::ptrdiff_t>((s + 1) * per_set));
        result.scan.push_back({sets[s], aggregate_rows(slice, bound, epsilon)});
        const auto& cand = result.scan.back().aggregate;
        const auto& cur = result.scan[worst].aggregate;
        const double cand_mse = std::isnan(cand.mean_mse) ? std::numeric_limits<double>::infinity() : cand.mean_mse;
        const double cur_mse = std::isnan(cur.mean_mse) ? std::numeric_limits<double>::infinity() : cur.mean_mse;
        if (cand.pass_fraction < cur.pass_fraction || (cand.pass_fraction == cur.pass_fraction && cand_mse > cur_mse))
            worst = s;
    }
    result.worst_attacked_set = result.scan[worst].attacked_set;
    result.aggregate = result.scan[worst].aggregate;
}

ExperimentResult run_decode(const ExperimentConfig& c, const RunOptions& options) {
    const auto system = c.system();
    if (system.sigma_w() != 0.0 || system.sigma_v() != 0.0)
        throw PreconditionError("noiseless_decode: requires sigma_w = sigma_v = 0");
    ExperimentResult result;
    result.config = c;
    result.algorithm = "noiseless_decode";
    result.observability = observability_report(system, c.k);

    const int n = system.n();
    const auto sets = attacked_sets(c);
    const std::size_t per_set = static_cast<std::size_t>(c.trials);
    result.rows.resize(sets.size() * per_set);
    result.decode.resize(sets.size() * per_set);
    const auto strategy = c.attack.make_strategy();

    parallel_for(result.rows.size(), options.parallel, [&](std::size_t job) {
        const auto& kappa = sets[job / per_set];
        const int trial = static_cast<int>(job % per_set);
        const auto seed = trial_seed(c.seed, trial);
        Eigen::VectorXd x0;
        if (c.initial_state) {
            x0 = *c.initial_state;
        } else {
            GaussianStream g(derive_seed(seed, stream::initial_state));
            x0.resize(n);
            for (int i = 0; i < n; ++i) x0(i) = g.next();
        }
        const AttackPlan plan(kappa, strategy, CausalityMode::prediction);
        plan.validate(system, n);
        const auto trace = simulate(system, n, x0, plan, seed);
        auto decoded = noiseless_secure_decode(system, trace.attacked_outputs, c.k);

        double err = std::numeric_limits<double>::quiet_NaN();
        for (const auto& e : decoded.estimates) {
            const double d = (e - x0).squaredNorm();
            if (std::isnan(err) || d < err) err = d;
        }
        TrialRow row;
        row.trial = trial;
        row.seed = seed;
        row.attacked_set = kappa;
        row.mse = err;
        row.bound = 0;
        row.pass = decoded.status == DecodeStatus::unique && std::sqrt(err) < kDecodeResidualTolerance;
        result.rows[job] = row;
        result.decode[job] = DecodeRow{trial, kappa, decoded.status, x0, std::move(decoded.estimates)};
    });
    finish_scan(result, sets, 0.0, 0.0);
    return result;
}

ExperimentResult run_estimation(const ExperimentConfig& c, const RunOptions& options) {
    const auto system = c.system();
    const auto analysis = sparse_observability_index(system);
    if (!check_sparse_condition(analysis, c.k))
        throw PreconditionError("sparse observability condition theta <= p - 2k fails (theta = " +
                                std::to_string(analysis.theta) + ", p = " + std::to_string(system.p()) +
                                ", k = " + std::to_string(c.k) + ")");
    const bool filtering = c.mode == ExperimentMode::filtering;
    const bool scalar = !filtering && system.n() == 1;

    ExperimentResult result;
    result.config = c;
    result.algorithm = filtering ? "vector_filtering" : (scalar ? "scalar_prediction" : "vector_prediction");
    result.observability = observability_report(system, c.k);

    const auto window = c.window();
    window.validate();
    const int max_mu = scalar ? 1 : max_subset_mu(system, analysis.theta);
    const int horizon = required_horizon(window, max_mu);
    const auto causality = filtering ? CausalityMode::filtering : CausalityMode::prediction;
    const auto strategy = c.attack.make_strategy();
    const Eigen::VectorXd x0 = c.initial_state.value_or(Eigen::VectorXd::Zero(system.n()));

    const auto sets = attacked_sets(c);
    std::vector<std::optional<SteadyStateFilter>> oracles(sets.size());
    if (options.with_oracle)
        for (std::size_t s = 0; s < sets.size(); ++s)
            oracles[s] = solve_steady_state(system, complement(system.p(), sets[s]));

    const std::size_t per_set = static_cast<std::size_t>(c.trials);
    const std::size_t jobs = sets.size() * per_set;
    result.rows.resize(jobs);
    if (options.with_oracle) result.oracle.resize(jobs);
    if (options.keep_traces) result.traces.resize(jobs);
    std::vector<double> bounds(jobs), epsilons(jobs);

    parallel_for(jobs, options.parallel, [&](std::size_t job) {
        const std::size_t si = job / per_set;
        const auto& kappa = sets[si];
        const int trial = static_cast<int>(job % per_set);
        const auto seed = trial_seed(c.seed, trial);

        const AttackPlan plan(kappa, strategy, causality);
        plan.validate(system, horizon);
        const auto trace = simulate(system, horizon, x0, plan, seed);
        const auto report = filtering ? algorithm3_vector_filter(system, trace, window, c.k)
                                      : (scalar ? algorithm1_scalar_predict(system, trace, window, c.k)
                                                : algorithm2_vector_predict(system, trace, window, c.k));
        TrialRow row;
        row.trial = trial;
        row.seed = seed;
        row.attacked_set = kappa;
        row.selected_set = report.selected_set;
        row.bound = report.bound;
        row.mse = report.selected_set ? windowed_mse(trace.states, report.estimates, window.t1)
                                      : std::numeric_limits<double>::quiet_NaN();
        row.pass = report.selected_set.has_value() && row.mse <= report.bound + report.epsilon;
        bounds[job] = report.bound;
        epsilons[job] = report.epsilon;

        if (options.with_oracle) {
            const auto& filter = *oracles[si];
            const Eigen::MatrixXd ys = trace.attacked_outputs(filter.sensor_set, Eigen::seqN(0, window.t1 + window.N));
            const Eigen::VectorXd zero = Eigen::VectorXd::Zero(system.n());
            const Eigen::MatrixXd est = filtering ? run_filtering(filter, ys, zero) : run_prediction(filter, ys, zero);
            OracleRow o;
            o.trial = trial;
            o.seed = seed;
            o.attacked_set = kappa;
            o.secure_mse = row.mse;
            o.oracle_mse = windowed_mse(trace.states, est.middleCols(window.t1, window.N), window.t1);
            o.oracle_bound = filtering ? filter.f_opt : filter.p_opt;
            result.oracle[job] = o;
        }
        if (options.keep_traces)
            result.traces[job] =
                TraceDump{job, window.t1, trace.states.middleCols(window.t1, window.N), report.estimates};
        result.rows[job] = std::move(row);
    });
    finish_scan(result, sets, bounds.front(), epsilons.front());
    return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    validate_config(config);
    switch (config.mode) {
        case ExperimentMode::observability_report: {
            ExperimentResult result;
            result.config = config;
            result.algorithm = "observability_report";
            result.observability = observability_report(config.system(), config.k);
            return result;
        }
        case ExperimentMode::noiseless_decode: return run_decode(config, options);
        default: return run_estimation(config, options);
    }
}

ExperimentResult oracle_comparison(const ExperimentConfig& config, const RunOptions& options) {
    if (config.mode != ExperimentMode::prediction && config.mode != ExperimentMode::filtering)
        throw PreconditionError("oracle_comparison: mode must be prediction or filtering");
    if (config.attack.strategy != "zero_out" && config.k > 0)
        throw PreconditionError("oracle_comparison: requires the zero_out attack strategy");
    auto opts = options;
    opts.with_oracle = true;
    return run_experiment(config, opts);
}

// ---------------------------------------------------------------------------
// output

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string set_cell(const SensorSet& s) { return s.empty() ? "none" : format_set(s); }

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json aggregate_json(const Aggregate& a) {
    json j;
    j["trials"] = a.trials;
    j["pass_fraction"] = a.pass_fraction;
    j["mean_mse"] = number_or_null(a.mean_mse);
    j["bound"] = a.bound;
    j["epsilon"] = a.epsilon;
    return j;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    out.close();
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::string results_csv(const ExperimentResult& r) {
    std::string out = "trial,seed,attacked_set,selected_set,mse,bound,pass\n";
    for (const auto& row : r.rows) {
        out += std::to_string(row.trial) + "," + std::to_string(row.seed) + "," + set_cell(row.attacked_set) + "," +
               (row.selected_set ? set_cell(*row.selected_set) : std::string("none")) + "," + format_double(row.mse) +
               "," + format_double(row.bound) + "," + (row.pass ? "1" : "0") + "\n";
    }
    return out;
}

std::string oracle_csv(const ExperimentResult& r) {
    std::string out = "trial,seed,attacked_set,secure_mse,oracle_mse,oracle_bound\n";
    for (const auto& o : r.oracle)
        out += std::to_string(o.trial) + "," + std::to_string(o.seed) + "," + set_cell(o.attacked_set) + "," +
               format_double(o.secure_mse) + "," + format_double(o.oracle_mse) + "," + format_double(o.oracle_bound) +
               "\n";
    return out;
}

std::string trace_csv(const TraceDump& tr) {
    const Eigen::Index n = tr.states.rows();
    const bool have = tr.estimates.size() > 0;
    std::string out = "t";
    for (Eigen::Index i = 0; i < n; ++i) out += ",x" + std::to_string(i);
    for (Eigen::Index i = 0; i < n; ++i) out += ",xhat" + std::to_string(i);
    out += ",squared_error\n";
    for (Eigen::Index j = 0; j < tr.states.cols(); ++j) {
        out += std::to_string(tr.t1 + j);
        for (Eigen::Index i = 0; i < n; ++i) out += "," + format_double(tr.states(i, j));
        for (Eigen::Index i = 0; i < n; ++i)
            out += "," + format_double(have ? tr.estimates(i, j) : std::numeric_limits<double>::quiet_NaN());
        const double err = have ? (tr.states.col(j) - tr.estimates.col(j)).squaredNorm()
                                : std::numeric_limits<double>::quiet_NaN();
        out += "," + format_double(err) + "\n";
    }
    return out;
}

json results_json(const ExperimentResult& r) {
    json out;
    out["software"] = {{"name", kSoftwareName}, {"version", kSoftwareVersion}};
    out["generated_at"] = utc_timestamp();
    out["config"] = to_json(r.config);
    out["algorithm"] = r.algorithm;

    json agg = aggregate_json(r.aggregate);
    agg["required_pass_fraction"] = r.config.required_pass_fraction;
    agg["acceptance_passed"] = r.acceptance_passed();
    out["aggregate"] = agg;

    if (!r.scan.empty()) {
        json scan = json::array();
        for (const auto& e : r.scan) scan.push_back({{"attacked_set", set_json(e.attacked_set)}, {"aggregate", aggregate_json(e.aggregate)}});
        out["worst_case_scan"] = scan;
        out["worst_attacked_set"] = set_json(*r.worst_attacked_set);
    }

    json rows = json::array();
    for (const auto& row : r.rows) {
        json j;
        j["trial"] = row.trial;
        j["seed"] = row.seed;
        j["attacked_set"] = set_json(row.attacked_set);
        j["selected_set"] = row.selected_set ? set_json(*row.selected_set) : json(nullptr);
        j["mse"] = number_or_null(row.mse);
        j["bound"] = row.bound;
        j["pass"] = row.pass;
        rows.push_back(std::move(j));
    }
    out["rows"] = rows;

    if (r.observability) {
        const auto& o = *r.observability;
        json subsets = json::array();
        for (const auto& [s, obs] : o.examined_subsets)
            subsets.push_back({{"subset", set_json(s)}, {"observable", obs}});
        out["observability"] = {{"p", o.p},
                                {"theta", o.theta},
                                {"k", o.k},
                                {"max_correctable", o.max_correctable},
                                {"max_detectable", o.max_detectable},
                                {"min_hamming_distance", o.min_hamming_distance},
                                {"witness_distance", o.witness_distance},
                                {"sparse_condition_holds", o.sparse_condition_holds},
                                {"examined_subsets", subsets}};
    } else {
        out["observability"] = nullptr;
    }

    if (!r.oracle.empty()) {
        json oracle = json::array();
        for (const auto& o : r.oracle)
            oracle.push_back({{"trial", o.trial},
                              {"seed", o.seed},
                              {"attacked_set", set_json(o.attacked_set)},
                              {"secure_mse", number_or_null(o.secure_mse)},
                              {"oracle_mse", o.oracle_mse},
                              {"oracle_bound", o.oracle_bound}});
        out["oracle"] = oracle;
    }

    if (!r.decode.empty()) {
        json decode = json::array();
        for (const auto& d : r.decode) {
            json est = json::array();
            for (const auto& e : d.estimates) est.push_back(vector_json(e));
            decode.push_back({{"trial", d.trial},
                              {"attacked_set", set_json(d.attacked_set)},
                              {"status", to_string(d.status)},
                              {"true_state", vector_json(d.true_state)},
                              {"estimates", est}});
        }
        out["decode"] = decode;
    }
    return out;
}

void emit_results(const ExperimentResult& result, const std::filesystem::path& dir, OutputFormat format) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    if (format != OutputFormat::json) {
        write_file(dir / "results.csv", results_csv(result));
        if (!result.oracle.empty()) write_file(dir / "oracle.csv", oracle_csv(result));
    }
    if (format != OutputFormat::csv) write_file(dir / "results.json", results_json(result).dump(2) + "\n");
    for (const auto& tr : result.traces) write_file(dir / ("trace_" + std::to_string(tr.row) + ".csv"), trace_csv(tr));
}

}  // namespace sse
