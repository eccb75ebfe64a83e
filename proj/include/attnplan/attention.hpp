#pragma once

#include <utility>
#include <vector>

#include "attnplan/common.hpp"
#include "attnplan/dbn.hpp"
#include "attnplan/mdp.hpp"

namespace attnplan {

/// A spotlight: the subset of state variables whose sensors stay active.
/// Keeping a sensor off while the mode is in use earns its per-step cost back,
/// accumulated here as `deactivation_reward`. Mode 0 attends everything.
class AttentionMode {
public:
    AttentionMode(int index, std::vector<int> attended, std::vector<double> sensor_costs);

    /// The always-on mode: index 0, every variable attended, zero reward.
    static AttentionMode null_mode(std::vector<double> sensor_costs);

    int index() const { return index_; }
    const std::vector<int>& attended() const { return attended_; }
    const std::vector<double>& sensor_costs() const { return sensor_costs_; }
    int num_variables() const { return static_cast<int>(sensor_costs_.size()); }
    double deactivation_reward() const { return deactivation_reward_; }
    bool is_null() const { return index_ == 0; }
    bool attends(int var) const;

    /// Observed tuple: the attended components of x, in index order.
    StateTuple project(const StateTuple& x) const;

private:
    int index_ = 0;
    std::vector<int> attended_;
    std::vector<double> sensor_costs_;
    double deactivation_reward_ = 0.0;
};

/// Ids of enumerated states that project onto the observed tuple. Throws
/// EmptyPreimage when no enumerated state does.
std::vector<int> preimage(const AttentionMode& mode, const StateTuple& observed,
                          const FactoredMdp& mdp);

/// Distribution over full states conditioned on an observed tuple, one row per
/// observed state. Rows are supported on the observed tuple's preimage and
/// normalized. Also fixes the observed-state enumeration: the projection image
/// of the MDP's states in first-appearance order.
class Disaggregation {
public:
    Disaggregation(AttentionMode mode,
                   std::vector<StateTuple> observed,
                   std::vector<std::vector<std::pair<int, double>>> weights,
                   const FactoredMdp& mdp);

    const AttentionMode& mode() const { return mode_; }
    int num_observed() const { return static_cast<int>(observed_.size()); }
    const std::vector<StateTuple>& observed_states() const { return observed_; }
    int observed_id(const StateTuple& observed) const;
    const std::vector<std::pair<int, double>>& weights(int observed_id) const {
        return weights_[observed_id];
    }

private:
    AttentionMode mode_;
    std::vector<StateTuple> observed_;
    std::unordered_map<StateTuple, int, TupleHash> ids_;
    std::vector<std::vector<std::pair<int, double>>> weights_;
};

/// Uniform weights over each observed tuple's preimage.
Disaggregation uniform_disaggregation(const AttentionMode& mode, const FactoredMdp& mdp);

/// MDP over observed tuples together with the mode it abstracts and, once
/// solved, the mode's subpolicy and value over observed states.
struct AttentionalMdp {
    AttentionMode mode;
    FactoredMdp model;
    Disaggregation disagg;
    Policy subpolicy;
    std::vector<double> value;
    bool solved = false;
    int sweeps = 0;
};

/// Marginalization build: transition and reward rows are disaggregation-
/// weighted sums over preimages of the original rows.
AttentionalMdp build_attentional_mdp(const FactoredMdp& mdp, const AttentionMode& mode,
                                     const Disaggregation& disagg);

/// Product build for parent-closed modes: the observed transition is the
/// product of the attended variables' conditional tables. The reward is still
/// marginalized through the disaggregation. Throws ModeNotParentClosed.
AttentionalMdp build_attentional_mdp_factored(const FactoredMdp& mdp, const DbnModel& dbn,
                                              const AttentionMode& mode,
                                              const Disaggregation& disagg);

/// Value-iterates the observed MDP and stores subpolicy and value.
AttentionalMdp solve_mode(AttentionalMdp am, double tol = kDefaultTol,
                          int max_iters = kDefaultMaxIters);

/// Pulls a subpolicy back to full states: the action at x is the subpolicy's
/// action at project(x).
Policy lift_policy(const AttentionalMdp& am, const FactoredMdp& mdp);

} // namespace attnplan
