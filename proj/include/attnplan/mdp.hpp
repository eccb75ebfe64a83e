#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "attnplan/common.hpp"
#include "attnplan/sparse.hpp"

namespace attnplan {

/// One component of a factored state. `value_labels`, when non-empty, gives a
/// printable name per domain value and is carried through to exports.
struct VariableSpec {
    std::string name;
    int domain_size = 0;
    std::vector<std::string> value_labels;
};

/// Assignment of one value per state variable, in variable order.
using StateTuple = std::vector<int>;

struct TupleHash {
    std::size_t operator()(const StateTuple& t) const {
        std::size_t h = 0x9e3779b97f4a7c15ull;
        for (int v : t) h = (h ^ static_cast<std::size_t>(v)) * 0x100000001b3ull;
        return h;
    }
};

/// Discounted MDP over an explicit enumeration of factored states.
///
/// Transitions are stored per action as sparse row-stochastic matrices over
/// state ids; rewards as a dense (state, action) table.
class FactoredMdp {
public:
    FactoredMdp() = default;
    FactoredMdp(std::vector<VariableSpec> variables,
                std::vector<StateTuple> states,
                std::vector<std::string> actions,
                std::vector<SparseMatrix> transitions,
                std::vector<double> reward,
                int initial_state,
                double discount);

    int num_states() const { return static_cast<int>(states_.size()); }
    int num_actions() const { return static_cast<int>(actions_.size()); }
    int num_variables() const { return static_cast<int>(variables_.size()); }

    const std::vector<VariableSpec>& variables() const { return variables_; }
    const std::vector<StateTuple>& states() const { return states_; }
    const StateTuple& state(int id) const { return states_[id]; }
    const std::vector<std::string>& actions() const { return actions_; }

    /// Id for a tuple, or -1 when the tuple is not part of the enumeration.
    int find_state_id(const StateTuple& t) const;
    /// Id for a tuple; throws std::out_of_range for unknown tuples.
    int state_id(const StateTuple& t) const;

    const SparseMatrix& transitions(int action) const { return transitions_[action]; }
    double reward(int state, int action) const {
        return reward_[static_cast<std::size_t>(state) * actions_.size() + action];
    }
    double max_abs_reward() const;

    int initial_state() const { return initial_state_; }
    double discount() const { return discount_; }

private:
    void validate() const;

    std::vector<VariableSpec> variables_;
    std::vector<StateTuple> states_;
    std::unordered_map<StateTuple, int, TupleHash> state_ids_;
    std::vector<std::string> actions_;
    std::vector<SparseMatrix> transitions_;
    std::vector<double> reward_; // row-major (state, action)
    int initial_state_ = 0;
    double discount_ = 1.0;
};

/// Per-state distributions over actions. Solvers only emit deterministic
/// policies, but evaluation and chain induction accept stochastic ones.
class Policy {
public:
    Policy() = default;

    static Policy deterministic(std::vector<int> chosen, int num_actions);
    static Policy from_distributions(std::vector<std::vector<double>> rows);

    int num_states() const { return static_cast<int>(rows_.size()); }
    int num_actions() const { return num_actions_; }
    bool is_deterministic() const { return !chosen_.empty(); }

    const std::vector<double>& distribution(int state) const { return rows_[state]; }

    /// Chosen action of a deterministic policy; throws otherwise.
    int action(int state) const;

private:
    std::vector<std::vector<double>> rows_;
    std::vector<int> chosen_; // empty unless deterministic
    int num_actions_ = 0;
};

/// Markov chain with per-state rewards obtained by fixing a policy.
struct InducedChain {
    SparseMatrix transition;
    std::vector<double> reward;
    double discount = 1.0;
};

struct ValueIterationResult {
    std::vector<double> value;
    Policy policy;
    int sweeps = 0;
    double residual = 0.0;
};

/// Exact value iteration to sup-norm Bellman residual <= tol. Greedy ties are
/// broken toward the lowest action index. Requires discount < 1.
ValueIterationResult value_iteration(const FactoredMdp& mdp, double tol = kDefaultTol,
                                     int max_iters = kDefaultMaxIters);

/// Iterative policy evaluation of the fixed point V = r_pi + discount * P_pi V.
std::vector<double> evaluate_policy(const FactoredMdp& mdp, const Policy& policy,
                                    double tol = kDefaultTol, int max_iters = kDefaultMaxIters);

/// Chain obtained by mixing transition rows and rewards under the policy.
InducedChain induce_chain(const FactoredMdp& mdp, const Policy& policy);

/// t-fold product of the chain's transition matrix (t >= 1).
SparseMatrix t_step_kernel(const InducedChain& chain, int t);

/// Expected discounted reward accumulated over the first t steps of the chain,
/// as a vector over start states.
std::vector<double> truncated_discounted_return(const InducedChain& chain, double discount, int t);

/// max_x |max_a [R(x,a) + discount * P V](x) - V(x)|, for tests and checks.
double bellman_residual(const FactoredMdp& mdp, const std::vector<double>& value);

/// Action values R(x,.) + discount * P V at one state.
std::vector<double> action_values(const FactoredMdp& mdp, const std::vector<double>& value, int state);

using TransitionExpander =
    std::function<std::vector<std::pair<StateTuple, double>>(const StateTuple&, int)>;
using RewardFn = std::function<double(const StateTuple&, int)>;

/// Breadth-first enumeration of the states reachable from `initial` under
/// `expand`, materialized as a FactoredMdp. Throws StateSpaceTooLarge when the
/// enumeration exceeds `max_states`.
FactoredMdp build_reachable_mdp(std::vector<VariableSpec> variables,
                                std::vector<std::string> actions,
                                const StateTuple& initial,
                                double discount,
                                const TransitionExpander& expand,
                                const RewardFn& reward,
                                std::size_t max_states = 500000);

} // namespace attnplan
