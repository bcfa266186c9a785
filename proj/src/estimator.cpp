#include "sse/estimator.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

#include "sse/errors.hpp"

namespace sse {

void WindowConfig::validate() const {
    if (N < 1) throw PreconditionError("WindowConfig: N must be >= 1");
    if (burn_in < 0) throw PreconditionError("WindowConfig: burn_in must be >= 0");
    if (t1 < burn_in) throw PreconditionError("WindowConfig: window start t1 precedes the burn-in");
    if (epsilon && !(*epsilon >= 0.0)) throw PreconditionError("WindowConfig: epsilon must be >= 0");
}

const CandidateSetReport* ResidueReport::find(const SensorSet& s) const {
    for (const auto& c : sets)
        if (c.sensors == s) return &c;
    return nullptr;
}

int required_horizon(const WindowConfig& window, int max_mu) { return window.t1 + window.N + max_mu - 1; }

int max_subset_mu(const LinearSystem& system, int theta) {
    int best = 1;
    for (const auto& s : combinations(system.p(), theta)) {
        const auto obs = build_observability_matrix(system.A(), system.output_rows(s));
        if (!obs.mu) throw PreconditionError("max_subset_mu: subset {" + format_set(s) + "} is not observable");
        best = std::max(best, *obs.mu);
    }
    return best;
}

std::vector<std::vector<int>> partition_groups(int count, int mu) {
    if (mu < 1) throw PreconditionError("partition_groups: mu must be >= 1");
    const int per_group = count / mu;
    if (per_group < 1)
        throw PreconditionError("partition_groups: window of " + std::to_string(count) + " steps leaves an empty group for mu = " +
                                std::to_string(mu));
    std::vector<std::vector<int>> groups(static_cast<std::size_t>(mu));
    for (int j = 0; j < per_group * mu; ++j) groups[static_cast<std::size_t>(j % mu)].push_back(j);
    return groups;
}

Eigen::MatrixXd compute_block_residues(const SubsetObservabilityData& subset, const Eigen::MatrixXd& subset_outputs,
                                       const Eigen::MatrixXd& estimates, int t1) {
    const auto theta = static_cast<Eigen::Index>(subset.subset.size());
    const int mu = subset.mu;
    if (subset_outputs.rows() != theta) throw DimensionError("compute_block_residues: outputs must have theta rows");
    if (estimates.rows() != subset.O.cols()) throw DimensionError("compute_block_residues: estimate dimension mismatch");
    const Eigen::Index count = estimates.cols();
    if (t1 < 0 || t1 + count + mu - 1 > subset_outputs.cols())
        throw PreconditionError("compute_block_residues: trace horizon " + std::to_string(subset_outputs.cols()) +
                                " does not cover the window plus look-ahead (needs " +
                                std::to_string(t1 + count + mu - 1) + ")");

    Eigen::MatrixXd r(theta * mu, count);
    for (Eigen::Index j = 0; j < count; ++j)
        for (int b = 0; b < mu; ++b) r.block(b * theta, j, theta, 1) = subset_outputs.col(t1 + j + b);
    r.noalias() -= subset.O * estimates;
    return r;
}

namespace {

double relative_slack(double statistic, double threshold) {
    if (threshold > 0.0) return statistic / threshold;
    return statistic <= threshold ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

std::vector<GroupCheck> block_residue_test(const SubsetObservabilityData& subset, const Eigen::MatrixXd& residues,
                                           double base, double epsilon) {
    if (residues.rows() != subset.O.rows()) throw DimensionError("block_residue_test: residue size mismatch");
    const auto groups = partition_groups(static_cast<int>(residues.cols()), subset.mu);
    const Eigen::Index used = static_cast<Eigen::Index>(groups.size() * groups.front().size());

    // tr(O† r r' O†') = ||O† r||^2
    const Eigen::RowVectorXd sq = (subset.O_pinv * residues.leftCols(used)).colwise().squaredNorm();
    const double threshold = base + subset.noise_trace + epsilon;

    std::vector<GroupCheck> out;
    out.reserve(groups.size());
    for (std::size_t l = 0; l < groups.size(); ++l) {
        double sum = 0;
        for (int j : groups[l]) sum += sq(j);
        GroupCheck g;
        g.group = static_cast<int>(l);
        g.size = static_cast<int>(groups[l].size());
        g.statistic = sum / g.size;
        g.threshold = threshold;
        g.pass = g.statistic <= threshold;
        out.push_back(g);
    }
    return out;
}

std::vector<GroupCheck> block_residue_test_prediction(const SubsetObservabilityData& subset,
                                                      const Eigen::MatrixXd& residues, double p_opt, double epsilon) {
    return block_residue_test(subset, residues, p_opt, epsilon);
}

std::vector<GroupCheck> block_residue_test_filtering(const SubsetObservabilityData& subset,
                                                     const Eigen::MatrixXd& residues, double f_opt, double cross_term,
                                                     double epsilon) {
    return block_residue_test(subset, residues, f_opt - 2.0 * cross_term, epsilon);
}

double filtering_cross_term(const SubsetObservabilityData& subset, const Eigen::MatrixXd& L_i, double sigma_v) {
    const auto theta = static_cast<Eigen::Index>(subset.subset.size());
    if (L_i.rows() != subset.O.cols() || L_i.cols() != theta)
        throw DimensionError("filtering_cross_term: L_i must be n x theta");
    // E(v_stack v_i(t)') = sigma_v^2 [I_theta; 0]
    return sigma_v * sigma_v * (L_i.transpose() * subset.O_pinv.leftCols(theta)).trace();
}

namespace {

enum class Estimate { prediction, filtering };

void check_outputs(const LinearSystem& system, const Eigen::MatrixXd& outputs, const WindowConfig& window, int k,
                   const char* what) {
    window.validate();
    if (outputs.rows() != system.p())
        throw DimensionError(std::string(what) + ": outputs must have p = " + std::to_string(system.p()) + " rows");
    if (k < 0 || k >= system.p())
        throw PreconditionError(std::string(what) + ": k must lie in [0, p)");
    if (outputs.cols() < window.t1 + window.N)
        throw PreconditionError(std::string(what) + ": trace horizon does not cover the window");
}

void select(ResidueReport& report) {
    double best = std::numeric_limits<double>::infinity();
    const CandidateSetReport* chosen = nullptr;
    for (const auto& c : report.sets) {
        if (!c.pass) continue;
        if (!chosen || c.max_relative_slack < best) {
            best = c.max_relative_slack;
            chosen = &c;
        }
    }
    if (chosen) {
        report.selected_set = chosen->sensors;
        report.estimates = chosen->estimates;
    } else {
        report.selected_set.reset();
        report.estimates.resize(0, 0);
    }
}

ResidueReport vector_bank(const LinearSystem& system, const Eigen::MatrixXd& outputs, const WindowConfig& window, int k,
                          Estimate kind, const char* what) {
    check_outputs(system, outputs, window, k, what);
    const auto analysis = sparse_observability_index(system);
    if (!check_sparse_condition(analysis, k))
        throw PreconditionError(std::string(what) + ": sparse observability condition theta <= p - 2k fails (theta = " +
                                std::to_string(analysis.theta) + ", p = " + std::to_string(system.p()) +
                                ", k = " + std::to_string(k) + ")");
    const int theta = analysis.theta;
    const int p = system.p();
    const int t1 = window.t1;
    const int N = window.N;

    ResidueReport report;
    report.t1 = t1;
    report.N = N;

    std::vector<SteadyStateFilter> filters;
    for (const auto& s : combinations(p, p - k)) {
        filters.push_back(solve_steady_state(system, s));
        CandidateSetReport c;
        c.sensors = s;
        c.opt_trace = kind == Estimate::prediction ? filters.back().p_opt : filters.back().f_opt;
        report.bound = std::max(report.bound, c.opt_trace);
        report.sets.push_back(std::move(c));
    }
    report.epsilon = window.epsilon.value_or(kDefaultEpsilonFraction * report.bound);

    std::map<SensorSet, SubsetObservabilityData> subset_cache;
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(system.n());

    for (std::size_t si = 0; si < report.sets.size(); ++si) {
        auto& c = report.sets[si];
        const auto& filter = filters[si];
        const Eigen::MatrixXd ys = outputs(c.sensors, Eigen::seqN(0, t1 + N));
        const Eigen::MatrixXd est =
            kind == Estimate::prediction ? run_prediction(filter, ys, x0) : run_filtering(filter, ys, x0);
        c.estimates = est.middleCols(t1, N);

        c.pass = true;
        c.max_relative_slack = 0;
        for (const auto& subset : combinations(c.sensors, theta)) {
            auto it = subset_cache.find(subset);
            if (it == subset_cache.end()) it = subset_cache.emplace(subset, build_subset_data(system, subset)).first;
            const auto& data = it->second;

            const int used = (N / data.mu) * data.mu;
            const Eigen::MatrixXd yi = outputs(subset, Eigen::all);
            const Eigen::MatrixXd r = compute_block_residues(data, yi, c.estimates.leftCols(used), t1);

            SubsetCheck sc;
            sc.subset = subset;
            sc.mu = data.mu;
            sc.noise_trace = data.noise_trace;
            if (kind == Estimate::prediction) {
                sc.groups = block_residue_test_prediction(data, r, c.opt_trace, report.epsilon);
            } else {
                sc.cross_term = filtering_cross_term(data, restrict_gain_columns(filter, subset), system.sigma_v());
                sc.groups = block_residue_test_filtering(data, r, c.opt_trace, sc.cross_term, report.epsilon);
            }
            sc.pass = std::all_of(sc.groups.begin(), sc.groups.end(), [](const GroupCheck& g) { return g.pass; });
            for (const auto& g : sc.groups)
                c.max_relative_slack = std::max(c.max_relative_slack, relative_slack(g.statistic, g.threshold));
            c.pass = c.pass && sc.pass;
            c.subset_checks.push_back(std::move(sc));
        }
    }
    select(report);
    return report;
}

}  // namespace

ResidueReport algorithm1_scalar_predict(const LinearSystem& system, const Eigen::MatrixXd& outputs,
                                        const WindowConfig& window, int k) {
    if (system.n() != 1) throw PreconditionError("algorithm1_scalar_predict: requires a scalar state (n = 1)");
    check_outputs(system, outputs, window, k, "algorithm1_scalar_predict");
    const int p = system.p();
    if (p < 2 * k + 1) throw PreconditionError("algorithm1_scalar_predict: requires p >= 2k + 1");

    const int t1 = window.t1;
    const int N = window.N;
    const double sv2 = system.sigma_v() * system.sigma_v();

    ResidueReport report;
    report.t1 = t1;
    report.N = N;

    std::vector<std::optional<SteadyStateFilter>> filters;
    for (const auto& s : combinations(p, p - k)) {
        CandidateSetReport c;
        c.sensors = s;
        c.observable = is_observable(system, s);
        if (c.observable) {
            filters.emplace_back(solve_steady_state(system, s));
            c.opt_trace = filters.back()->p_opt;
            report.bound = std::max(report.bound, c.opt_trace);
        } else {
            filters.emplace_back(std::nullopt);
        }
        report.sets.push_back(std::move(c));
    }
    if (std::none_of(report.sets.begin(), report.sets.end(), [](const auto& c) { return c.observable; }))
        throw PreconditionError("algorithm1_scalar_predict: no sensor set of size p - k is observable");
    report.epsilon = window.epsilon.value_or(kDefaultEpsilonFraction * report.bound);

    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
    for (std::size_t si = 0; si < report.sets.size(); ++si) {
        auto& c = report.sets[si];
        if (!c.observable) continue;
        const auto& filter = *filters[si];
        const Eigen::MatrixXd ys = outputs(c.sensors, Eigen::seqN(0, t1 + N));
        c.estimates = run_prediction(filter, ys, x0).middleCols(t1, N);

        c.pass = true;
        for (std::size_t q = 0; q < c.sensors.size(); ++q) {
            const int d = c.sensors[q];
            const double cd = system.C()(d, 0);
            const Eigen::ArrayXd r =
                ys.row(static_cast<Eigen::Index>(q)).segment(t1, N).array() - cd * c.estimates.row(0).array();
            SensorCheck sc;
            sc.sensor = d;
            sc.statistic = r.square().mean();
            sc.threshold = cd * cd * filter.p_opt + sv2 + report.epsilon;
            sc.pass = sc.statistic <= sc.threshold;
            c.max_relative_slack = std::max(c.max_relative_slack, relative_slack(sc.statistic, sc.threshold));
            c.pass = c.pass && sc.pass;
            c.sensor_checks.push_back(sc);
        }
    }
    select(report);
    return report;
}

ResidueReport algorithm2_vector_predict(const LinearSystem& system, const Eigen::MatrixXd& outputs,
                                        const WindowConfig& window, int k) {
    return vector_bank(system, outputs, window, k, Estimate::prediction, "algorithm2_vector_predict");
}

ResidueReport algorithm3_vector_filter(const LinearSystem& system, const Eigen::MatrixXd& outputs,
                                       const WindowConfig& window, int k) {
    return vector_bank(system, outputs, window, k, Estimate::filtering, "algorithm3_vector_filter");
}

}  // namespace sse
