#include "sse/kalman.hpp"

#include <algorithm>
#include <string>

#include "sse/errors.hpp"
#include "sse/linalg.hpp"
#include "sse/observability.hpp"

namespace sse {

namespace {

// G = P C' (C P C' + sigma_v^2 I)^-1. A singular innovation covariance is tolerated
// only when P C' vanishes, in which case the gain is zero.
Eigen::MatrixXd innovation_gain(const Eigen::MatrixXd& P, const Eigen::MatrixXd& C, double sv2) {
    const Eigen::MatrixXd PCt = P * C.transpose();
    Eigen::MatrixXd S = C * PCt;
    S.diagonal().array() += sv2;
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-13) return llt.solve(PCt.transpose()).transpose();
    if (linalg::max_abs(PCt) == 0.0) return Eigen::MatrixXd::Zero(P.rows(), C.rows());
    throw ConvergenceError("Kalman gain: innovation covariance C P C' + sigma_v^2 I is singular");
}

Eigen::MatrixXd riccati_map(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, double sw2, double sv2,
                            const Eigen::MatrixXd& P) {
    const Eigen::MatrixXd G = innovation_gain(P, C, sv2);
    const Eigen::MatrixXd Pf = P - G * (C * P);
    Eigen::MatrixXd next = A * Pf * A.transpose();
    next.diagonal().array() += sw2;
    return 0.5 * (next + next.transpose());
}

}  // namespace

Eigen::MatrixXd riccati_residual(const LinearSystem& system, const SensorSet& sensor_set, const Eigen::MatrixXd& P) {
    const double sw2 = system.sigma_w() * system.sigma_w();
    const double sv2 = system.sigma_v() * system.sigma_v();
    return riccati_map(system.A(), system.output_rows(sensor_set), sw2, sv2, P) - P;
}

SteadyStateFilter solve_steady_state(const LinearSystem& system, const SensorSet& sensor_set,
                                     const RiccatiOptions& options) {
    if (!is_observable(system, sensor_set))
        throw PreconditionError("solve_steady_state: (A, C_s) is not observable for s = {" + format_set(sensor_set) +
                                "}");
    const int n = system.n();
    const double sw2 = system.sigma_w() * system.sigma_w();
    const double sv2 = system.sigma_v() * system.sigma_v();

    SteadyStateFilter f;
    f.sensor_set = sensor_set;
    f.A = system.A();
    f.C = system.output_rows(sensor_set);

    Eigen::MatrixXd P = sw2 * Eigen::MatrixXd::Identity(n, n);
    bool converged = false;
    int it = 0;
    while (it < options.max_iterations) {
        ++it;
        Eigen::MatrixXd next = riccati_map(f.A, f.C, sw2, sv2, P);
        if (!next.allFinite()) throw ConvergenceError("solve_steady_state: Riccati iteration diverged");
        const double step = linalg::max_abs(next - P);
        P = std::move(next);
        if (step < options.tolerance * std::max(1.0, linalg::max_abs(P))) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw ConvergenceError("solve_steady_state: no convergence within " + std::to_string(options.max_iterations) +
                               " iterations");

    const Eigen::MatrixXd G = innovation_gain(P, f.C, sv2);
    f.P_pred = P;
    f.K_filt = G;
    f.L_pred = f.A * G;
    Eigen::MatrixXd Pf = P - G * (f.C * P);
    f.P_filt = 0.5 * (Pf + Pf.transpose());
    f.p_opt = f.P_pred.trace();
    f.f_opt = f.P_filt.trace();
    f.iterations = it;
    return f;
}

namespace {

void check_run_inputs(const SteadyStateFilter& filter, const Eigen::MatrixXd& outputs, const Eigen::VectorXd& x_hat0,
                      const char* what) {
    if (outputs.rows() != filter.C.rows())
        throw DimensionError(std::string(what) + ": outputs have " + std::to_string(outputs.rows()) +
                             " rows, sensor set has " + std::to_string(filter.C.rows()));
    if (x_hat0.size() != filter.n()) throw DimensionError(std::string(what) + ": initial estimate has wrong size");
}

}  // namespace

Eigen::MatrixXd run_prediction(const SteadyStateFilter& filter, const Eigen::MatrixXd& outputs,
                               const Eigen::VectorXd& x_hat0) {
    check_run_inputs(filter, outputs, x_hat0, "run_prediction");
    const Eigen::Index T = outputs.cols();
    Eigen::MatrixXd est(filter.n(), T);
    Eigen::VectorXd x = x_hat0;
    Eigen::VectorXd next(filter.n());
    Eigen::VectorXd innovation(outputs.rows());
    for (Eigen::Index t = 0; t < T; ++t) {
        est.col(t) = x;
        innovation = outputs.col(t);
        innovation.noalias() -= filter.C * x;
        next.noalias() = filter.A * x;
        next.noalias() += filter.L_pred * innovation;
        x.swap(next);
    }
    return est;
}

Eigen::MatrixXd run_filtering(const SteadyStateFilter& filter, const Eigen::MatrixXd& outputs,
                              const Eigen::VectorXd& x_hat0) {
    check_run_inputs(filter, outputs, x_hat0, "run_filtering");
    const Eigen::Index T = outputs.cols();
    Eigen::MatrixXd est(filter.n(), T);
    Eigen::VectorXd prior = x_hat0;
    Eigen::VectorXd post(filter.n());
    Eigen::VectorXd innovation(outputs.rows());
    for (Eigen::Index t = 0; t < T; ++t) {
        innovation = outputs.col(t);
        innovation.noalias() -= filter.C * prior;
        post = prior;
        post.noalias() += filter.K_filt * innovation;
        est.col(t) = post;
        prior.noalias() = filter.A * post;
    }
    return est;
}

Eigen::MatrixXd restrict_gain_columns(const SteadyStateFilter& filter, const SensorSet& subset) {
    Eigen::MatrixXd out(filter.n(), static_cast<Eigen::Index>(subset.size()));
    for (std::size_t i = 0; i < subset.size(); ++i) {
        const auto it = std::find(filter.sensor_set.begin(), filter.sensor_set.end(), subset[i]);
        if (it == filter.sensor_set.end())
            throw PreconditionError("restrict_gain_columns: sensor " + std::to_string(subset[i]) +
                                    " is not in the filter's sensor set");
        out.col(static_cast<Eigen::Index>(i)) = filter.K_filt.col(it - filter.sensor_set.begin());
    }
    return out;
}

}  // namespace sse
