#include "attnplan/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace attnplan {

namespace {

void check_tol(double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
}

void check_solvable_discount(double discount) {
    if (discount == 1.0) throw DiscountOne("solver requires discount < 1");
    if (!(discount > 0.0 && discount < 1.0))
        throw std::invalid_argument("discount must lie in (0, 1)");
}

} // namespace

FactoredMdp::FactoredMdp(std::vector<VariableSpec> variables,
                         std::vector<StateTuple> states,
                         std::vector<std::string> actions,
                         std::vector<SparseMatrix> transitions,
                         std::vector<double> reward,
                         int initial_state,
                         double discount)
    : variables_(std::move(variables)),
      states_(std::move(states)),
      actions_(std::move(actions)),
      transitions_(std::move(transitions)),
      reward_(std::move(reward)),
      initial_state_(initial_state),
      discount_(discount) {
    state_ids_.reserve(states_.size());
    for (int i = 0; i < static_cast<int>(states_.size()); ++i) {
        if (!state_ids_.emplace(states_[i], i).second)
            throw ValidationError("duplicate state tuple in enumeration");
    }
    validate();
}

void FactoredMdp::validate() const {
    if (variables_.empty()) throw ValidationError("mdp needs at least one variable");
    if (states_.empty()) throw ValidationError("mdp needs at least one state");
    if (actions_.empty()) throw ValidationError("mdp needs at least one action");
    for (const auto& v : variables_) {
        if (v.domain_size < 1) throw ValidationError("variable domain must be non-empty");
        if (!v.value_labels.empty() && static_cast<int>(v.value_labels.size()) != v.domain_size)
            throw ValidationError("value labels must cover the whole domain");
    }
    for (const auto& t : states_) {
        if (static_cast<int>(t.size()) != num_variables())
            throw ValidationError("state tuple arity mismatch");
        for (int i = 0; i < num_variables(); ++i)
            if (t[i] < 0 || t[i] >= variables_[i].domain_size)
                throw ValidationError("state tuple value outside variable domain");
    }
    if (static_cast<int>(transitions_.size()) != num_actions())
        throw ValidationError("one transition matrix per action required");
    for (int a = 0; a < num_actions(); ++a) {
        const SparseMatrix& m = transitions_[a];
        if (m.rows() != num_states() || m.cols() != num_states())
            throw ValidationError("transition matrix shape mismatch");
        for (int s = 0; s < num_states(); ++s) {
            double sum = 0.0;
            for (double p : m.row_values(s)) {
                if (p < 0.0 || p > 1.0 + kStochasticTol)
                    throw ValidationError("transition probability outside [0, 1]");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kStochasticTol) {
                std::ostringstream msg;
                msg << "transition row not normalized: state " << s << ", action " << a
                    << ", sum " << sum;
                throw ValidationError(msg.str());
            }
        }
    }
    if (reward_.size() != states_.size() * actions_.size())
        throw ValidationError("reward table shape mismatch");
    for (double r : reward_)
        if (!std::isfinite(r)) throw ValidationError("reward must be finite");
    if (initial_state_ < 0 || initial_state_ >= num_states())
        throw ValidationError("initial state outside the enumeration");
    if (!(discount_ > 0.0 && discount_ <= 1.0))
        throw ValidationError("discount must lie in (0, 1]");
}

int FactoredMdp::find_state_id(const StateTuple& t) const {
    auto it = state_ids_.find(t);
    return it == state_ids_.end() ? -1 : it->second;
}

int FactoredMdp::state_id(const StateTuple& t) const {
    const int id = find_state_id(t);
    if (id < 0) throw std::out_of_range("state tuple not in enumeration");
    return id;
}

double FactoredMdp::max_abs_reward() const {
    double m = 0.0;
    for (double r : reward_) m = std::max(m, std::abs(r));
    return m;
}

Policy Policy::deterministic(std::vector<int> chosen, int num_actions) {
    Policy p;
    p.num_actions_ = num_actions;
    p.rows_.resize(chosen.size());
    for (std::size_t s = 0; s < chosen.size(); ++s) {
        if (chosen[s] < 0 || chosen[s] >= num_actions)
            throw ValidationError("policy action out of range");
        p.rows_[s].assign(num_actions, 0.0);
        p.rows_[s][chosen[s]] = 1.0;
    }
    p.chosen_ = std::move(chosen);
    return p;
}

Policy Policy::from_distributions(std::vector<std::vector<double>> rows) {
    Policy p;
    if (rows.empty()) throw ValidationError("policy needs at least one state");
    p.num_actions_ = static_cast<int>(rows.front().size());
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != p.num_actions_)
            throw ValidationError("policy rows must share one action set");
        double sum = 0.0;
        for (double w : row) {
            if (w < 0.0 || w > 1.0 + kStochasticTol)
                throw ValidationError("policy probability outside [0, 1]");
            sum += w;
        }
        if (std::abs(sum - 1.0) > kStochasticTol)
            throw ValidationError("policy row not normalized");
    }
    p.rows_ = std::move(rows);
    return p;
}

int Policy::action(int state) const {
    if (!is_deterministic())
        throw std::logic_error("action() requires a deterministic policy");
    return chosen_[state];
}

std::vector<double> action_values(const FactoredMdp& mdp, const std::vector<double>& value, int state) {
    std::vector<double> q(mdp.num_actions());
    for (int a = 0; a < mdp.num_actions(); ++a) {
        const auto cols = mdp.transitions(a).row_indices(state);
        const auto vals = mdp.transitions(a).row_values(state);
        double exp_next = 0.0;
        for (std::size_t i = 0; i < cols.size(); ++i) exp_next += vals[i] * value[cols[i]];
        q[a] = mdp.reward(state, a) + mdp.discount() * exp_next;
    }
    return q;
}

ValueIterationResult value_iteration(const FactoredMdp& mdp, double tol, int max_iters) {
    check_tol(tol);
    check_solvable_discount(mdp.discount());

    const int n = mdp.num_states();
    const double stop = sweep_threshold(tol, mdp.discount());
    std::vector<double> value(n, 0.0);
    std::vector<double> next(n, 0.0);
    int sweeps = 0;
    double delta = 0.0;
    bool converged = false;
    while (sweeps < max_iters) {
        delta = 0.0;
        for (int s = 0; s < n; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < mdp.num_actions(); ++a) {
                const auto cols = mdp.transitions(a).row_indices(s);
                const auto vals = mdp.transitions(a).row_values(s);
                double exp_next = 0.0;
                for (std::size_t i = 0; i < cols.size(); ++i) exp_next += vals[i] * value[cols[i]];
                best = std::max(best, mdp.reward(s, a) + mdp.discount() * exp_next);
            }
            next[s] = best;
            delta = std::max(delta, std::abs(best - value[s]));
        }
        value.swap(next);
        ++sweeps;
        if (delta <= stop) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NonConvergence("value iteration did not reach tolerance within iteration cap");

    ValueIterationResult result;
    result.sweeps = sweeps;
    // One more Bellman application on the returned iterate: measures the actual
    // residual and yields the greedy policy with lowest-index tie-breaking.
    std::vector<int> greedy(n, 0);
    double residual = 0.0;
    for (int s = 0; s < n; ++s) {
        const std::vector<double> q = action_values(mdp, value, s);
        int arg = 0;
        for (int a = 1; a < mdp.num_actions(); ++a)
            if (q[a] > q[arg]) arg = a;
        greedy[s] = arg;
        residual = std::max(residual, std::abs(q[arg] - value[s]));
    }
    result.value = std::move(value);
    result.policy = Policy::deterministic(std::move(greedy), mdp.num_actions());
    result.residual = residual;
    return result;
}

std::vector<double> evaluate_policy(const FactoredMdp& mdp, const Policy& policy,
                                    double tol, int max_iters) {
    check_tol(tol);
    check_solvable_discount(mdp.discount());
    if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
        throw ValidationError("policy shape does not match the mdp");

    const InducedChain chain = induce_chain(mdp, policy);
    const int n = mdp.num_states();
    const double stop = sweep_threshold(tol, mdp.discount());
    std::vector<double> value(n, 0.0);
    for (int iter = 0; iter < max_iters; ++iter) {
        std::vector<double> next = chain.transition.apply(value);
        double delta = 0.0;
        for (int s = 0; s < n; ++s) {
            next[s] = chain.reward[s] + mdp.discount() * next[s];
            delta = std::max(delta, std::abs(next[s] - value[s]));
        }
        value.swap(next);
        if (delta <= stop) return value;
    }
    throw NonConvergence("policy evaluation did not reach tolerance within iteration cap");
}

InducedChain induce_chain(const FactoredMdp& mdp, const Policy& policy) {
    if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
        throw ValidationError("policy shape does not match the mdp");
    const int n = mdp.num_states();
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    std::vector<double> reward(n, 0.0);
    for (int s = 0; s < n; ++s) {
        const auto& dist = policy.distribution(s);
        for (int a = 0; a < mdp.num_actions(); ++a) {
            const double w = dist[a];
            if (w == 0.0) continue;
            reward[s] += w * mdp.reward(s, a);
            const auto cols = mdp.transitions(a).row_indices(s);
            const auto vals = mdp.transitions(a).row_values(s);
            for (std::size_t i = 0; i < cols.size(); ++i)
                rows[s].emplace_back(cols[i], w * vals[i]);
        }
    }
    InducedChain chain;
    chain.transition = SparseMatrix::from_rows(std::move(rows), n);
    chain.reward = std::move(reward);
    chain.discount = mdp.discount();
    return chain;
}

SparseMatrix t_step_kernel(const InducedChain& chain, int t) {
    if (t < 1) throw std::invalid_argument("kernel horizon must be at least 1");
    SparseMatrix result = chain.transition;
    for (int i = 1; i < t; ++i) result = result.multiply(chain.transition);
    return result;
}

std::vector<double> truncated_discounted_return(const InducedChain& chain, double discount, int t) {
    if (t < 1) throw std::invalid_argument("return horizon must be at least 1");
    if (!(discount > 0.0 && discount <= 1.0))
        throw std::invalid_argument("discount must lie in (0, 1]");
    std::vector<double> g = chain.reward;
    for (int i = 1; i < t; ++i) {
        std::vector<double> propagated = chain.transition.apply(g);
        for (std::size_t s = 0; s < g.size(); ++s)
            g[s] = chain.reward[s] + discount * propagated[s];
    }
    return g;
}

double bellman_residual(const FactoredMdp& mdp, const std::vector<double>& value) {
    double residual = 0.0;
    for (int s = 0; s < mdp.num_states(); ++s) {
        const std::vector<double> q = action_values(mdp, value, s);
        residual = std::max(residual, std::abs(*std::max_element(q.begin(), q.end()) - value[s]));
    }
    return residual;
}

FactoredMdp build_reachable_mdp(std::vector<VariableSpec> variables,
                                std::vector<std::string> actions,
                                const StateTuple& initial,
                                double discount,
                                const TransitionExpander& expand,
                                const RewardFn& reward,
                                std::size_t max_states) {
    std::vector<StateTuple> states;
    std::unordered_map<StateTuple, int, TupleHash> ids;
    std::deque<int> frontier;

    auto intern = [&](const StateTuple& t) {
        auto [it, inserted] = ids.emplace(t, static_cast<int>(states.size()));
        if (inserted) {
            if (states.size() >= max_states)
                throw StateSpaceTooLarge("reachable state enumeration exceeds cap of " +
                                         std::to_string(max_states) + " states");
            states.push_back(t);
            frontier.push_back(it->second);
        }
        return it->second;
    };

    intern(initial);
    const int num_actions = static_cast<int>(actions.size());
    // Row lists grow while BFS discovers states; column ids are stable because
    // interning never reassigns them.
    std::vector<std::vector<std::vector<std::pair<int, double>>>> rows(num_actions);
    std::vector<std::vector<double>> rewards(num_actions);
    while (!frontier.empty()) {
        const int s = frontier.front();
        frontier.pop_front();
        const StateTuple tuple = states[s];
        for (int a = 0; a < num_actions; ++a) {
            auto successors = expand(tuple, a);
            std::vector<std::pair<int, double>> row;
            row.reserve(successors.size());
            for (auto& [next, p] : successors) {
                if (p == 0.0) continue;
                row.emplace_back(intern(next), p);
            }
            if (rows[a].size() <= static_cast<std::size_t>(s)) {
                rows[a].resize(s + 1);
                rewards[a].resize(s + 1, 0.0);
            }
            rows[a][s] = std::move(row);
            rewards[a][s] = reward(tuple, a);
        }
    }

    const int n = static_cast<int>(states.size());
    std::vector<SparseMatrix> transitions;
    transitions.reserve(num_actions);
    for (int a = 0; a < num_actions; ++a) {
        rows[a].resize(n);
        transitions.push_back(SparseMatrix::from_rows(std::move(rows[a]), n));
    }
    std::vector<double> reward_table(static_cast<std::size_t>(n) * num_actions, 0.0);
    for (int a = 0; a < num_actions; ++a) {
        rewards[a].resize(n, 0.0);
        for (int s = 0; s < n; ++s)
            reward_table[static_cast<std::size_t>(s) * num_actions + a] = rewards[a][s];
    }
    return FactoredMdp(std::move(variables), std::move(states), std::move(actions),
                       std::move(transitions), std::move(reward_table), 0, discount);
}

} // namespace attnplan
