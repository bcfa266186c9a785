#include "sse/observability.hpp"

#include <random>
#include <string>

#include "sse/errors.hpp"
#include "sse/linalg.hpp"

namespace sse {

namespace {

void check_pair(const Eigen::MatrixXd& A, const Eigen::MatrixXd& c_sub, const char* what) {
    if (A.rows() != A.cols()) throw DimensionError(std::string(what) + ": A must be square");
    if (c_sub.cols() != A.rows())
        throw DimensionError(std::string(what) + ": output rows have " + std::to_string(c_sub.cols()) +
                             " columns, expected n = " + std::to_string(A.rows()));
}

// Y_s stacked block-row by time, matching stacked_observability's row order.
Eigen::VectorXd stack_symbols(const Eigen::MatrixXd& symbols, const SensorSet& s) {
    const auto m = static_cast<Eigen::Index>(s.size());
    const Eigen::Index blocks = symbols.cols();
    Eigen::VectorXd y(m * blocks);
    for (Eigen::Index r = 0; r < blocks; ++r)
        for (Eigen::Index q = 0; q < m; ++q) y(r * m + q) = symbols(s[static_cast<std::size_t>(q)], r);
    return y;
}

}  // namespace

Eigen::MatrixXd stacked_observability(const Eigen::MatrixXd& A, const Eigen::MatrixXd& c_sub, int blocks) {
    check_pair(A, c_sub, "stacked_observability");
    const Eigen::Index rows = c_sub.rows();
    Eigen::MatrixXd stack(rows * blocks, A.cols());
    Eigen::MatrixXd block = c_sub;
    for (int r = 0; r < blocks; ++r) {
        stack.middleRows(r * rows, rows) = block;
        block = block * A;
    }
    return stack;
}

ObservabilityMatrix build_observability_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& c_sub,
                                               std::optional<int> max_rows) {
    check_pair(A, c_sub, "build_observability_matrix");
    const int n = static_cast<int>(A.rows());
    const int cap = max_rows.value_or(n);
    if (cap < 1) throw PreconditionError("build_observability_matrix: max_rows must be >= 1");

    const Eigen::Index rows = c_sub.rows();
    Eigen::MatrixXd stack(0, n);
    Eigen::MatrixXd block = c_sub;
    for (int mu = 1; mu <= cap; ++mu) {
        Eigen::MatrixXd grown(stack.rows() + rows, n);
        grown << stack, block;
        stack = std::move(grown);
        if (rows > 0 && linalg::numerical_rank(stack) == n) return {stack, mu};
        block = block * A;
    }
    return {stack, std::nullopt};
}

bool is_observable(const LinearSystem& system, const SensorSet& sensors) {
    if (sensors.empty()) return false;
    return build_observability_matrix(system.A(), system.output_rows(sensors)).mu.has_value();
}

ObservabilityAnalysis sparse_observability_index(const LinearSystem& system) {
    const int p = system.p();
    SensorSet all(p);
    for (int d = 0; d < p; ++d) all[d] = d;
    if (!is_observable(system, all))
        throw PreconditionError("sparse_observability_index: (A, C) is not observable with all sensors");

    ObservabilityAnalysis out;
    out.p = p;
    out.theta = p;
    for (int m = 1; m <= p; ++m) {
        bool every = true;
        for (const auto& s : combinations(p, m)) {
            const bool obs = is_observable(system, s);
            out.per_subset_observable.emplace(s, obs);
            if (!obs) {
                every = false;
                break;
            }
        }
        if (every) {
            out.theta = m;
            break;
        }
    }
    out.max_correctable = (p - out.theta) / 2;
    out.max_detectable = p - out.theta;
    out.min_hamming_distance = p - out.theta + 1;
    return out;
}

bool check_sparse_condition(const ObservabilityAnalysis& analysis, int k) {
    if (k < 0 || k > analysis.p)
        throw PreconditionError("check_sparse_condition: k must lie in [0, p], got " + std::to_string(k));
    return analysis.theta <= analysis.p - 2 * k;
}

Eigen::MatrixXd observation_symbols(const LinearSystem& system, const Eigen::VectorXd& x0) {
    if (x0.size() != system.n()) throw DimensionError("observation_symbols: state dimension mismatch");
    const int n = system.n();
    Eigen::MatrixXd symbols(system.p(), n);
    Eigen::VectorXd z = x0;
    for (int r = 0; r < n; ++r) {
        symbols.col(r) = system.C() * z;
        z = system.A() * z;
    }
    return symbols;
}

HammingWitness hamming_witness(const LinearSystem& system) {
    return hamming_witness(system, sparse_observability_index(system));
}

HammingWitness hamming_witness(const LinearSystem& system, const ObservabilityAnalysis& analysis) {
    const int p = system.p();
    const int n = system.n();
    HammingWitness best;
    best.distance = p;
    if (analysis.theta <= 1) return best;

    constexpr double kSymbolTolerance = 1e-9;
    constexpr int kSampledDirections = 5;
    std::mt19937_64 rng(0x5eedULL);
    std::normal_distribution<double> gauss;

    for (const auto& subset : combinations(p, analysis.theta - 1)) {
        const Eigen::MatrixXd stack = stacked_observability(system.A(), system.output_rows(subset), n);
        const Eigen::MatrixXd basis = linalg::nullspace_basis(stack);
        if (basis.cols() == 0) continue;

        std::vector<Eigen::VectorXd> directions;
        if (basis.cols() == 1) {
            directions.emplace_back(basis.col(0));
        } else {
            for (int s = 0; s < kSampledDirections; ++s) {
                Eigen::VectorXd g(basis.cols());
                for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = gauss(rng);
                directions.emplace_back((basis * g).normalized());
            }
        }

        for (const auto& x : directions) {
            const Eigen::MatrixXd sym = observation_symbols(system, x);
            SensorSet agree;
            for (int d = 0; d < p; ++d)
                if (sym.row(d).norm() < kSymbolTolerance) agree.push_back(d);
            const int distance = p - static_cast<int>(agree.size());
            if (!best.witness || distance < best.distance) {
                best.distance = distance;
                best.witness = std::make_pair(x, Eigen::VectorXd(Eigen::VectorXd::Zero(n)));
                best.agreeing_sensors = agree;
            }
        }
    }
    return best;
}

const char* to_string(DecodeStatus status) {
    switch (status) {
        case DecodeStatus::unique: return "unique";
        case DecodeStatus::ambiguous: return "ambiguous";
        case DecodeStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

DecodeResult noiseless_secure_decode(const LinearSystem& system, const Eigen::MatrixXd& symbols, int k) {
    const int p = system.p();
    const int n = system.n();
    if (symbols.rows() != p || symbols.cols() != n)
        throw DimensionError("noiseless_secure_decode: expected a p x n symbol matrix (" + std::to_string(p) + "x" +
                             std::to_string(n) + ")");
    if (k < 0 || k > p) throw PreconditionError("noiseless_secure_decode: k must lie in [0, p]");

    DecodeResult out;
    try {
        out.sparse_condition_holds = check_sparse_condition(sparse_observability_index(system), k);
    } catch (const PreconditionError&) {
        out.sparse_condition_holds = false;
    }

    for (const auto& s : combinations(p, p - k)) {
        const Eigen::MatrixXd O = stacked_observability(system.A(), system.output_rows(s), n);
        if (s.empty() || linalg::numerical_rank(O) < n) {
            out.unobservable_subsets.push_back(s);
            continue;
        }
        const Eigen::VectorXd y = stack_symbols(symbols, s);
        const Eigen::VectorXd x = O.colPivHouseholderQr().solve(y);
        if ((O * x - y).norm() >= kDecodeResidualTolerance * (1.0 + y.norm())) continue;

        bool seen = false;
        for (const auto& e : out.estimates)
            if ((e - x).norm() < kDecodeMergeTolerance) seen = true;
        if (!seen) out.estimates.push_back(x);
    }

    if (out.estimates.empty())
        out.status = DecodeStatus::infeasible;
    else if (out.estimates.size() == 1)
        out.status = DecodeStatus::unique;
    else
        out.status = DecodeStatus::ambiguous;
    return out;
}

SubsetObservabilityData build_subset_data(const LinearSystem& system, const SensorSet& subset) {
    const Eigen::MatrixXd c_i = system.output_rows(subset);
    auto obs = build_observability_matrix(system.A(), c_i);
    if (subset.empty() || !obs.mu)
        throw PreconditionError("build_subset_data: subset {" + format_set(subset) + "} is not observable");

    const int n = system.n();
    const int theta = static_cast<int>(subset.size());
    const int mu = *obs.mu;

    SubsetObservabilityData d;
    d.subset = subset;
    d.mu = mu;
    d.O = std::move(obs.stack);
    d.O_pinv = linalg::left_pseudo_inverse(d.O);

    // Block row r, block column q < r holds C_i A^(r-1-q); block row 0 is zero.
    std::vector<Eigen::MatrixXd> powers;  // C_i A^j, j = 0 .. mu-2
    Eigen::MatrixXd block = c_i;
    for (int j = 0; j + 1 < mu; ++j) {
        powers.push_back(block);
        block = block * system.A();
    }
    d.J = Eigen::MatrixXd::Zero(theta * mu, n * (mu - 1));
    for (int r = 1; r < mu; ++r)
        for (int q = 0; q < r; ++q) d.J.block(r * theta, q * n, theta, n) = powers[static_cast<std::size_t>(r - 1 - q)];

    const double sw2 = system.sigma_w() * system.sigma_w();
    const double sv2 = system.sigma_v() * system.sigma_v();
    d.M = sw2 * d.J * d.J.transpose() + sv2 * Eigen::MatrixXd::Identity(theta * mu, theta * mu);
    d.noise_trace = (d.O_pinv * d.M * d.O_pinv.transpose()).trace();
    return d;
}

}  // namespace sse
