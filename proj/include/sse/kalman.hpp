#pragma once

#include <Eigen/Dense>

#include "sse/linear_system.hpp"

namespace sse {

/// Steady-state Kalman filter for one sensor set.
///
/// P_pred is the stabilizing fixed point of
///   P = A P A' + sigma_w^2 I - A P C_s' (C_s P C_s' + sigma_v^2 I)^-1 C_s P A'
/// and the gains follow from it:
///   L_pred = A P C_s' S^-1   (x̂(t+1) = A x̂(t) + L_pred (y(t) - C_s x̂(t)))
///   K_filt = P C_s' S^-1     (x̂(t) = x̂p(t) + K_filt (y(t) - C_s x̂p(t)), x̂p(t+1) = A x̂(t))
struct SteadyStateFilter {
    SensorSet sensor_set;
    Eigen::MatrixXd A;
    Eigen::MatrixXd C;        // rows of C for sensor_set
    Eigen::MatrixXd P_pred;   // n x n
    Eigen::MatrixXd L_pred;   // n x |s|
    Eigen::MatrixXd K_filt;   // n x |s|
    Eigen::MatrixXd P_filt;   // n x n
    double p_opt = 0;         // tr(P_pred)
    double f_opt = 0;         // tr(P_filt)
    int iterations = 0;

    int n() const noexcept { return static_cast<int>(A.rows()); }
};

struct RiccatiOptions {
    /// Stop once max|P_next - P| < tolerance * max(1, max|P|).
    double tolerance = 1e-10;
    int max_iterations = 1'000'000;
};

/// Fixed-point Riccati iteration from P0 = sigma_w^2 I.
/// Throws PreconditionError if (A, C_s) is unobservable, ConvergenceError on
/// budget exhaustion or a singular innovation covariance that the gain needs.
SteadyStateFilter solve_steady_state(const LinearSystem& system, const SensorSet& sensor_set,
                                     const RiccatiOptions& options = {});

/// RHS(P) - P for the prediction Riccati map of (system, sensor_set).
Eigen::MatrixXd riccati_residual(const LinearSystem& system, const SensorSet& sensor_set, const Eigen::MatrixXd& P);

/// Prediction estimates. `outputs` is |s| x T (rows in sensor_set order); column t
/// of the result is x̂(t), built from outputs 0..t-1 only.
Eigen::MatrixXd run_prediction(const SteadyStateFilter& filter, const Eigen::MatrixXd& outputs,
                               const Eigen::VectorXd& x_hat0);

/// Filtering estimates; column t uses outputs 0..t. `x_hat0` is the prior x̂p(0).
Eigen::MatrixXd run_filtering(const SteadyStateFilter& filter, const Eigen::MatrixXd& outputs,
                              const Eigen::VectorXd& x_hat0);

/// Columns of K_filt for `subset` (global sensor indices, each in sensor_set).
Eigen::MatrixXd restrict_gain_columns(const SteadyStateFilter& filter, const SensorSet& subset);

}  // namespace sse
