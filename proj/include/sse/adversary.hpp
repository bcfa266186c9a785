#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <variant>

#include "sse/linear_system.hpp"

namespace sse {

/// Which causal-knowledge contract the adversary obeys.
///  - prediction: may use time-t information of every sensor (noise at t' > t stays hidden).
///  - filtering:  may not use any time-t information of good sensors.
enum class CausalityMode { prediction, filtering };

/// What a k-adversary is allowed to see when choosing phi(t).
///
/// The view wraps the simulator's output buffers but only exposes the slices the
/// causality mode permits: the attacked outputs y(0..t-1) of all sensors, the clean
/// outputs c_j'x(t') + v_j(t') of attacked sensors for t' <= t, and, in prediction
/// mode only, the current clean outputs of all sensors. Process noise and good-sensor
/// noise are never exposed directly.
class AdversaryView {
public:
    AdversaryView(int t, const LinearSystem& system, CausalityMode mode, const SensorSet& attacked_set,
                  const Eigen::MatrixXd& attacked_outputs, const Eigen::MatrixXd& clean_outputs);

    int time() const noexcept { return t_; }
    const LinearSystem& system() const noexcept { return *system_; }
    CausalityMode mode() const noexcept { return mode_; }
    const SensorSet& attacked_set() const noexcept { return *attacked_; }

    /// p x t matrix of y(0..t-1).
    Eigen::MatrixXd output_history() const;

    /// Clean outputs of the attacked sensors at the current time (k-vector, kappa order).
    Eigen::VectorXd attacked_clean() const;

    /// Clean outputs of the attacked sensors at an earlier time `when` <= t.
    Eigen::VectorXd attacked_clean_at(int when) const;

    /// Current clean outputs of all p sensors; empty in filtering mode.
    std::optional<Eigen::VectorXd> all_clean() const;

private:
    int t_;
    const LinearSystem* system_;
    CausalityMode mode_;
    const SensorSet* attacked_;
    const Eigen::MatrixXd* outputs_;
    const Eigen::MatrixXd* clean_;
};

/// phi(t) on kappa that makes every attacked output exactly zero.
Eigen::VectorXd zero_out_attack(const AdversaryView& view);

/// Replays the attacked sensors' own legitimate outputs from `delay` steps earlier;
/// zero corruption while t < delay. Throws PreconditionError if delay < 1.
Eigen::VectorXd replay_attack(const AdversaryView& view, int delay);

/// Constant offset; `bias` has one entry (broadcast) or one per attacked sensor.
Eigen::VectorXd bias_attack(const AdversaryView& view, const Eigen::VectorXd& bias);

/// phi_j(t) = table(j, t) for j in kappa. `table` is p x T.
Eigen::VectorXd scripted_attack(const AdversaryView& view, const Eigen::MatrixXd& table);

/// User strategy. Must be a deterministic function of the view and the supplied
/// adversary RNG; returns one entry per attacked sensor.
using CustomAdversary = std::function<Eigen::VectorXd(const AdversaryView&, std::mt19937_64&)>;

namespace strategy {
struct None {};
struct ZeroOut {};
struct Bias {
    Eigen::VectorXd value;
};
struct Replay {
    int delay = 1;
};
struct Scripted {
    Eigen::MatrixXd table;  // p x T
};
struct Custom {
    CustomAdversary fn;
    std::string name = "custom";
};
}  // namespace strategy

using AttackStrategy =
    std::variant<strategy::None, strategy::ZeroOut, strategy::Bias, strategy::Replay, strategy::Scripted, strategy::Custom>;

/// Static k-adversary: a fixed attacked set, a strategy, and a causality mode.
class AttackPlan {
public:
    AttackPlan() = default;
    AttackPlan(SensorSet attacked_set, AttackStrategy strategy, CausalityMode mode = CausalityMode::prediction);

    static AttackPlan none(CausalityMode mode = CausalityMode::prediction);

    const SensorSet& attacked_set() const noexcept { return attacked_; }
    const AttackStrategy& strategy() const noexcept { return strategy_; }
    CausalityMode mode() const noexcept { return mode_; }
    int k() const noexcept { return static_cast<int>(attacked_.size()); }
    std::string strategy_name() const;

    /// Checks indices against the plant and strategy parameters against the horizon.
    void validate(const LinearSystem& system, int horizon) const;

    /// Corruption on kappa (one entry per attacked sensor, kappa order).
    Eigen::VectorXd corruption(const AdversaryView& view, std::mt19937_64& rng) const;

private:
    SensorSet attacked_;
    AttackStrategy strategy_ = strategy::None{};
    CausalityMode mode_ = CausalityMode::prediction;
};

}  // namespace sse
