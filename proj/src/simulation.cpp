#include "sse/simulation.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sse/errors.hpp"
#include "sse/rng.hpp"

namespace sse {

SimulationTrace simulate(const LinearSystem& system, int horizon, const Eigen::VectorXd& initial_state,
                         const AttackPlan& adversary, std::uint64_t seed) {
    const int n = system.n();
    const int p = system.p();
    if (horizon < 1) throw PreconditionError("simulate: horizon must be >= 1");
    if (initial_state.size() != n)
        throw DimensionError("simulate: initial state has " + std::to_string(initial_state.size()) +
                             " entries, system has n = " + std::to_string(n));
    adversary.validate(system, horizon);

    SimulationTrace tr;
    tr.horizon = horizon;
    tr.seed = seed;
    tr.attacked_set = adversary.attacked_set();
    tr.states = Eigen::MatrixXd::Zero(n, horizon);
    tr.clean_outputs = Eigen::MatrixXd::Zero(p, horizon);
    tr.attacked_outputs = Eigen::MatrixXd::Zero(p, horizon);
    tr.process_noise = Eigen::MatrixXd::Zero(n, horizon);
    tr.sensor_noise = Eigen::MatrixXd::Zero(p, horizon);
    tr.attack_vectors = Eigen::MatrixXd::Zero(p, horizon);

    GaussianStream process(derive_seed(seed, stream::process));
    std::vector<GaussianStream> sensors;
    sensors.reserve(p);
    for (int j = 0; j < p; ++j) sensors.emplace_back(derive_seed(seed, stream::sensor(j)));
    std::mt19937_64 adversary_rng(derive_seed(seed, stream::adversary));

    const auto& A = system.A();
    const auto& C = system.C();
    const double sw = system.sigma_w();
    const double sv = system.sigma_v();
    const auto& kappa = tr.attacked_set;

    tr.states.col(0) = initial_state;
    for (int t = 0; t < horizon; ++t) {
        auto x = tr.states.col(t);
        if (!x.allFinite() || (x.size() > 0 && x.cwiseAbs().maxCoeff() > kStateMagnitudeLimit))
            throw OverflowError("simulate: state magnitude exceeded 1e15 at t=" + std::to_string(t));

        for (int j = 0; j < p; ++j) tr.sensor_noise(j, t) = sv * sensors[j].next();
        tr.clean_outputs.col(t).noalias() = C * x;
        tr.clean_outputs.col(t) += tr.sensor_noise.col(t);

        const AdversaryView view(t, system, adversary.mode(), kappa, tr.attacked_outputs, tr.clean_outputs);
        const Eigen::VectorXd phi = adversary.corruption(view, adversary_rng);
        for (std::size_t i = 0; i < kappa.size(); ++i) tr.attack_vectors(kappa[i], t) = phi(static_cast<Eigen::Index>(i));
        tr.attacked_outputs.col(t) = tr.clean_outputs.col(t) + tr.attack_vectors.col(t);

        // w(t) is drawn only after phi(t) is fixed.
        for (int i = 0; i < n; ++i) tr.process_noise(i, t) = sw * process.next();
        if (t + 1 < horizon) {
            tr.states.col(t + 1).noalias() = A * x;
            tr.states.col(t + 1) += tr.process_noise.col(t);
        }
    }
    return tr;
}

double windowed_mse(const Eigen::MatrixXd& states, const Eigen::MatrixXd& estimates, int t1) {
    if (estimates.rows() != states.rows()) throw DimensionError("windowed_mse: state dimension mismatch");
    if (t1 < 0 || t1 + estimates.cols() > states.cols()) throw PreconditionError("windowed_mse: window outside trace");
    if (estimates.cols() == 0) throw PreconditionError("windowed_mse: empty window");
    const auto err = states.middleCols(t1, estimates.cols()) - estimates;
    return err.colwise().squaredNorm().mean();
}

}  // namespace sse
