#pragma once

#include <array>
#include <optional>
#include <vector>

#include "attnplan/attention.hpp"
#include "attnplan/mdp.hpp"

namespace attnplan {

/// How sensor savings accrue while a mode is sustained.
///
/// PerStep credits the mode's deactivation reward on every step of a sustain
/// phase. BoundaryAdjusted credits nothing on a phase's first step, where the
/// full state is observed with all sensors active, and the deactivation reward
/// on the remaining steps; a duration-1 sustain therefore saves nothing.
enum class InfoAccounting { PerStep, BoundaryAdjusted };

/// Commit to mode `mode` (1-based) for `duration` consecutive steps.
struct SustainAction {
    int mode = 1;
    int duration = 1;
    bool operator==(const SustainAction&) const = default;
};

/// Semi-MDP over the original states whose actions sustain a solved mode's
/// subpolicy for up to `max_sustain` steps. Stores the per-mode induced chains
/// plus, per (mode, duration): the truncated discounted goal reward and the
/// closed-form information reward. Multi-step kernels are materialized lazily;
/// the solvers use repeated chain applications instead.
class AttentionShiftMdp {
public:
    AttentionShiftMdp(const FactoredMdp& base, const std::vector<AttentionalMdp>& modes,
                      int max_sustain, InfoAccounting accounting = InfoAccounting::PerStep);

    int num_states() const { return base_->num_states(); }
    int num_modes() const { return static_cast<int>(chains_.size()); }
    int max_sustain() const { return max_sustain_; }
    double discount() const { return base_->discount(); }
    InfoAccounting accounting() const { return accounting_; }
    const FactoredMdp& base() const { return *base_; }

    /// Actions ordered by (mode ascending, duration ascending), so a first-hit
    /// argmax breaks ties toward the lowest mode, then the shortest duration.
    const std::vector<SustainAction>& actions() const { return actions_; }
    int action_index(const SustainAction& a) const;

    const InducedChain& chain(int mode) const { return chains_[mode - 1]; }
    const Policy& lifted_policy(int mode) const { return lifted_[mode - 1]; }
    double deactivation_reward(int mode) const { return deactivation_[mode - 1]; }

    const std::vector<double>& goal_reward(const SustainAction& a) const {
        return goal_reward_[a.mode - 1][a.duration - 1];
    }
    double info_reward(const SustainAction& a) const {
        return info_reward_[a.mode - 1][a.duration - 1];
    }

    /// duration-step kernel of the mode's chain, cached across calls.
    const SparseMatrix& kernel(const SustainAction& a) const;

    /// Grows the action set to a larger sustain bound in place.
    void extend(int new_max_sustain);

private:
    void append_durations(int up_to);

    const FactoredMdp* base_;
    int max_sustain_ = 0;
    InfoAccounting accounting_;
    std::vector<InducedChain> chains_;
    std::vector<Policy> lifted_;
    std::vector<double> deactivation_;
    std::vector<SustainAction> actions_;
    std::vector<std::vector<std::vector<double>>> goal_reward_; // [mode-1][duration-1]
    std::vector<std::vector<double>> info_reward_;              // [mode-1][duration-1]
    mutable std::vector<std::vector<std::optional<SparseMatrix>>> kernels_;
};

AttentionShiftMdp build_shift_mdp(const FactoredMdp& base, const std::vector<AttentionalMdp>& modes,
                                  int max_sustain, InfoAccounting accounting = InfoAccounting::PerStep);

struct ShiftSolution {
    std::vector<double> value;          // weighted objective
    std::vector<SustainAction> policy;  // per state
    std::vector<double> goal_value;     // discounted task reward under the policy
    std::vector<double> info_value;     // discounted sensor savings under the policy
    std::array<double, 2> weights{1.0, 0.0};
    int sweeps = 0;
    double residual = 0.0;
    int max_duration_used = 1;
};

/// Value iteration on the semi-MDP for the weighted objective
/// w[0] * goal + w[1] * info; per-action continuation discount is
/// discount^duration. `warm_start` seeds the iteration when given.
ShiftSolution solve_shift(const AttentionShiftMdp& sm, std::array<double, 2> weights,
                          double tol = kDefaultTol, int max_iters = kDefaultMaxIters,
                          const std::vector<double>* warm_start = nullptr);

/// Fixed points of the two undiscounted-weight objectives under a fixed shift
/// policy: goal and info components satisfying
/// X = reward_component(policy) + discount^duration * kernel(policy) X.
std::pair<std::vector<double>, std::vector<double>> evaluate_objectives(
    const AttentionShiftMdp& sm, const std::vector<SustainAction>& policy,
    double tol = kDefaultTol, int max_iters = kDefaultMaxIters);

struct SustainBoundResult {
    int optimal_bound = 1;              // first T whose successor adds at most 10*tol
    bool certified = false;             // false when the cap was hit first
    std::vector<ShiftSolution> solutions; // for T = 1..K in order
};

/// Grows the sustain bound one step at a time, warm-starting each solve with
/// the previous value function, until the value improvement falls to 10*tol or
/// the cap is reached.
SustainBoundResult sustain_bound_search(const FactoredMdp& base,
                                        const std::vector<AttentionalMdp>& modes,
                                        std::array<double, 2> weights, int max_bound,
                                        double tol = kDefaultTol,
                                        InfoAccounting accounting = InfoAccounting::PerStep);

struct ParetoPoint {
    std::array<double, 2> weights;
    double goal_at_start = 0.0;
    double info_at_start = 0.0;
    ShiftSolution solution;
};

/// Solves the same semi-MDP under each weight vector, warm-starting from the
/// previous solve.
std::vector<ParetoPoint> pareto_sweep(const FactoredMdp& base,
                                      const std::vector<AttentionalMdp>& modes, int max_sustain,
                                      const std::vector<std::array<double, 2>>& weight_list,
                                      double tol = kDefaultTol,
                                      InfoAccounting accounting = InfoAccounting::PerStep);

} // namespace attnplan
