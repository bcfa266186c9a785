#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "sse/adversary.hpp"
#include "sse/linear_system.hpp"

namespace sse {

/// One simulated run. Every matrix stores time along columns (column t is time t).
struct SimulationTrace {
    int horizon = 0;
    Eigen::MatrixXd states;            // n x T
    Eigen::MatrixXd clean_outputs;     // p x T, C x(t) + v(t)
    Eigen::MatrixXd attacked_outputs;  // p x T, clean + phi
    Eigen::MatrixXd process_noise;     // n x T, w(t)
    Eigen::MatrixXd sensor_noise;      // p x T, v(t)
    Eigen::MatrixXd attack_vectors;    // p x T, phi(t), zero outside kappa
    SensorSet attacked_set;
    std::uint64_t seed = 0;
};

/// |x_i(t)| beyond this aborts the run with OverflowError.
inline constexpr double kStateMagnitudeLimit = 1e15;

/// Simulates the plant for `horizon` steps from `initial_state` under `adversary`.
///
/// Each noise source draws from its own stream derived from `seed` (see rng.hpp).
/// At every step v(t) is drawn, the adversary is consulted with a view restricted by
/// its causality mode, and only then is w(t) drawn; the adversary can never observe
/// noise from the future.
SimulationTrace simulate(const LinearSystem& system, int horizon, const Eigen::VectorXd& initial_state,
                         const AttackPlan& adversary, std::uint64_t seed);

/// Mean of e'(t)e(t) over t = t1 .. t1 + N - 1, where `estimates` column j is the
/// estimate of x(t1 + j).
double windowed_mse(const Eigen::MatrixXd& states, const Eigen::MatrixXd& estimates, int t1);

}  // namespace sse
