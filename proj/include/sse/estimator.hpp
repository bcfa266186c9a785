#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "sse/kalman.hpp"
#include "sse/linear_system.hpp"
#include "sse/observability.hpp"
#include "sse/simulation.hpp"

namespace sse {

/// Measured window G = {t1, ..., t1 + N - 1}. Filters start at t = 0 and run
/// through the burn-in, so t1 must not precede it.
struct WindowConfig {
    int t1 = 200;
    int N = 10'000;
    /// Residue-test slack. When unset, 0.1 * max_s (P_opt,s or F_opt,s).
    std::optional<double> epsilon;
    int burn_in = 200;

    static WindowConfig after_burn_in(int burn_in, int N, std::optional<double> epsilon = std::nullopt) {
        return WindowConfig{burn_in, N, epsilon, burn_in};
    }
    void validate() const;
};

inline constexpr double kDefaultEpsilonFraction = 0.1;

/// One group G_l of one subset's block residue test.
struct GroupCheck {
    int group = 0;
    int size = 0;
    double statistic = 0;
    double threshold = 0;
    bool pass = false;
};

struct SubsetCheck {
    SensorSet subset;
    int mu = 0;
    double noise_trace = 0;  // tr(O† M O†')
    double cross_term = 0;   // filtering only
    std::vector<GroupCheck> groups;
    bool pass = false;
};

/// Per-sensor scalar residue test.
struct SensorCheck {
    int sensor = 0;
    double statistic = 0;
    double threshold = 0;
    bool pass = false;
};

struct CandidateSetReport {
    SensorSet sensors;
    bool observable = true;
    double opt_trace = 0;  // P_opt,s (prediction) or F_opt,s (filtering)
    std::vector<SensorCheck> sensor_checks;
    std::vector<SubsetCheck> subset_checks;
    bool pass = false;
    /// max over all checks of statistic / threshold; drives the selection.
    double max_relative_slack = 0;
    /// n x N estimates of this set's filter on the window.
    Eigen::MatrixXd estimates;
};

struct ResidueReport {
    int t1 = 0;
    int N = 0;
    double epsilon = 0;
    /// max over candidate sets of opt_trace: the achievable bound.
    double bound = 0;
    std::vector<CandidateSetReport> sets;
    std::optional<SensorSet> selected_set;
    Eigen::MatrixXd estimates;  // n x N for the selected set; empty when none passes

    const CandidateSetReport* find(const SensorSet& s) const;
};

/// Groups G_l = { j : j mod mu = l } over the first mu * floor(count / mu) window
/// offsets. Throws PreconditionError if a group would be empty.
std::vector<std::vector<int>> partition_groups(int count, int mu);

/// r_i(t) = [y_i(t); ...; y_i(t+mu-1)] - O_i x̂(t) for t = t1 + j, j < estimates.cols().
/// `subset_outputs` is theta x T (rows in subset order, full trace from t = 0).
Eigen::MatrixXd compute_block_residues(const SubsetObservabilityData& subset, const Eigen::MatrixXd& subset_outputs,
                                       const Eigen::MatrixXd& estimates, int t1);

/// Per group: (1/N_B) sum ||O† r_i(t)||^2 <= base + tr(O† M O†') + epsilon.
/// `residues` columns are window offsets; the tail beyond mu * floor(cols / mu) is dropped.
std::vector<GroupCheck> block_residue_test(const SubsetObservabilityData& subset, const Eigen::MatrixXd& residues,
                                           double base, double epsilon);

/// Prediction threshold base: P_opt,s.
std::vector<GroupCheck> block_residue_test_prediction(const SubsetObservabilityData& subset,
                                                      const Eigen::MatrixXd& residues, double p_opt, double epsilon);

/// Filtering threshold base: F_opt,s - 2 * cross_term.
std::vector<GroupCheck> block_residue_test_filtering(const SubsetObservabilityData& subset,
                                                     const Eigen::MatrixXd& residues, double f_opt, double cross_term,
                                                     double epsilon);

/// E(v_i(t)' L_i' O† v_stack) = sigma_v^2 tr(L_i' [first theta columns of O†]).
double filtering_cross_term(const SubsetObservabilityData& subset, const Eigen::MatrixXd& L_i, double sigma_v);

/// Scalar-state secure prediction with per-sensor residue tests. `outputs` is p x T.
ResidueReport algorithm1_scalar_predict(const LinearSystem& system, const Eigen::MatrixXd& outputs,
                                        const WindowConfig& window, int k);

/// Vector-state secure prediction with block residue tests over every theta-subset.
ResidueReport algorithm2_vector_predict(const LinearSystem& system, const Eigen::MatrixXd& outputs,
                                        const WindowConfig& window, int k);

/// Vector-state secure filtering; filtering estimates and the cross-term threshold.
ResidueReport algorithm3_vector_filter(const LinearSystem& system, const Eigen::MatrixXd& outputs,
                                       const WindowConfig& window, int k);

inline ResidueReport algorithm1_scalar_predict(const LinearSystem& s, const SimulationTrace& tr,
                                               const WindowConfig& w, int k) {
    return algorithm1_scalar_predict(s, tr.attacked_outputs, w, k);
}
inline ResidueReport algorithm2_vector_predict(const LinearSystem& s, const SimulationTrace& tr,
                                               const WindowConfig& w, int k) {
    return algorithm2_vector_predict(s, tr.attacked_outputs, w, k);
}
inline ResidueReport algorithm3_vector_filter(const LinearSystem& s, const SimulationTrace& tr,
                                              const WindowConfig& w, int k) {
    return algorithm3_vector_filter(s, tr.attacked_outputs, w, k);
}

/// Trace horizon needed to evaluate the window with look-ahead max_mu - 1.
int required_horizon(const WindowConfig& window, int max_mu);

/// Largest observability index over the theta-subsets of {0..p-1}.
int max_subset_mu(const LinearSystem& system, int theta);

}  // namespace sse
