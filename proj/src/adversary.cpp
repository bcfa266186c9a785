#include "sse/adversary.hpp"

#include <string>

#include "sse/errors.hpp"

namespace sse {

AdversaryView::AdversaryView(int t, const LinearSystem& system, CausalityMode mode, const SensorSet& attacked_set,
                             const Eigen::MatrixXd& attacked_outputs, const Eigen::MatrixXd& clean_outputs)
    : t_(t), system_(&system), mode_(mode), attacked_(&attacked_set), outputs_(&attacked_outputs),
      clean_(&clean_outputs) {
    if (t < 0 || clean_outputs.cols() <= t || attacked_outputs.cols() < t)
        throw PreconditionError("AdversaryView: buffers do not cover time " + std::to_string(t));
    if (clean_outputs.rows() != system.p() || attacked_outputs.rows() != system.p())
        throw DimensionError("AdversaryView: output buffers must have p rows");
}

Eigen::MatrixXd AdversaryView::output_history() const { return outputs_->leftCols(t_); }

Eigen::VectorXd AdversaryView::attacked_clean() const { return attacked_clean_at(t_); }

Eigen::VectorXd AdversaryView::attacked_clean_at(int when) const {
    if (when < 0 || when > t_)
        throw PreconditionError("AdversaryView: time " + std::to_string(when) + " is not visible at t=" +
                                std::to_string(t_));
    Eigen::VectorXd out(attacked_->size());
    for (std::size_t i = 0; i < attacked_->size(); ++i) out(static_cast<Eigen::Index>(i)) = (*clean_)((*attacked_)[i], when);
    return out;
}

std::optional<Eigen::VectorXd> AdversaryView::all_clean() const {
    if (mode_ == CausalityMode::filtering) return std::nullopt;
    return Eigen::VectorXd(clean_->col(t_));
}

Eigen::VectorXd zero_out_attack(const AdversaryView& view) { return -view.attacked_clean(); }

Eigen::VectorXd replay_attack(const AdversaryView& view, int delay) {
    if (delay < 1) throw PreconditionError("replay_attack: delay must be >= 1");
    const auto k = static_cast<Eigen::Index>(view.attacked_set().size());
    if (view.time() < delay) return Eigen::VectorXd::Zero(k);
    return view.attacked_clean_at(view.time() - delay) - view.attacked_clean();
}

Eigen::VectorXd bias_attack(const AdversaryView& view, const Eigen::VectorXd& bias) {
    const auto k = static_cast<Eigen::Index>(view.attacked_set().size());
    if (bias.size() == 1) return Eigen::VectorXd::Constant(k, bias(0));
    if (bias.size() != k) throw DimensionError("bias_attack: bias must have 1 or k entries");
    return bias;
}

Eigen::VectorXd scripted_attack(const AdversaryView& view, const Eigen::MatrixXd& table) {
    if (table.rows() != view.system().p()) throw DimensionError("scripted_attack: table must have p rows");
    if (table.cols() <= view.time())
        throw PreconditionError("scripted_attack: table shorter than horizon (no column for t=" +
                                std::to_string(view.time()) + ")");
    const auto& kappa = view.attacked_set();
    Eigen::VectorXd out(kappa.size());
    for (std::size_t i = 0; i < kappa.size(); ++i) out(static_cast<Eigen::Index>(i)) = table(kappa[i], view.time());
    return out;
}

AttackPlan::AttackPlan(SensorSet attacked_set, AttackStrategy strategy, CausalityMode mode)
    : attacked_(std::move(attacked_set)), strategy_(std::move(strategy)), mode_(mode) {}

AttackPlan AttackPlan::none(CausalityMode mode) { return AttackPlan({}, strategy::None{}, mode); }

std::string AttackPlan::strategy_name() const {
    struct Namer {
        std::string operator()(const strategy::None&) const { return "none"; }
        std::string operator()(const strategy::ZeroOut&) const { return "zero_out"; }
        std::string operator()(const strategy::Bias&) const { return "bias"; }
        std::string operator()(const strategy::Replay&) const { return "replay"; }
        std::string operator()(const strategy::Scripted&) const { return "scripted"; }
        std::string operator()(const strategy::Custom& c) const { return c.name; }
    };
    return std::visit(Namer{}, strategy_);
}

void AttackPlan::validate(const LinearSystem& system, int horizon) const {
    validate_sensor_set(attacked_, system.p(), "AttackPlan");
    if (const auto* b = std::get_if<strategy::Bias>(&strategy_)) {
        if (b->value.size() != 1 && b->value.size() != k())
            throw DimensionError("AttackPlan: bias must have 1 or k entries");
    } else if (const auto* r = std::get_if<strategy::Replay>(&strategy_)) {
        if (r->delay < 1) throw PreconditionError("AttackPlan: replay delay must be >= 1");
    } else if (const auto* s = std::get_if<strategy::Scripted>(&strategy_)) {
        if (s->table.rows() != system.p()) throw DimensionError("AttackPlan: scripted table must have p rows");
        if (s->table.cols() < horizon)
            throw PreconditionError("AttackPlan: scripted table covers " + std::to_string(s->table.cols()) +
                                    " steps, horizon is " + std::to_string(horizon));
    } else if (const auto* c = std::get_if<strategy::Custom>(&strategy_)) {
        if (!c->fn) throw PreconditionError("AttackPlan: custom strategy has no callback");
    }
}

Eigen::VectorXd AttackPlan::corruption(const AdversaryView& view, std::mt19937_64& rng) const {
    const auto k = static_cast<Eigen::Index>(attacked_.size());
    if (k == 0) return Eigen::VectorXd(0);
    struct Emit {
        const AdversaryView& view;
        std::mt19937_64& rng;
        Eigen::Index k;
        Eigen::VectorXd operator()(const strategy::None&) const { return Eigen::VectorXd::Zero(k); }
        Eigen::VectorXd operator()(const strategy::ZeroOut&) const { return zero_out_attack(view); }
        Eigen::VectorXd operator()(const strategy::Bias& b) const { return bias_attack(view, b.value); }
        Eigen::VectorXd operator()(const strategy::Replay& r) const { return replay_attack(view, r.delay); }
        Eigen::VectorXd operator()(const strategy::Scripted& s) const { return scripted_attack(view, s.table); }
        Eigen::VectorXd operator()(const strategy::Custom& c) const { return c.fn(view, rng); }
    };
    Eigen::VectorXd phi = std::visit(Emit{view, rng, k}, strategy_);
    if (phi.size() != k)
        throw DimensionError("AttackPlan: strategy '" + strategy_name() + "' returned " + std::to_string(phi.size()) +
                             " entries for " + std::to_string(k) + " attacked sensors");
    return phi;
}

}  // namespace sse
