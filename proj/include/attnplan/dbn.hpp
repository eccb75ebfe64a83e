#pragma once

#include <string>
#include <utility>
#include <vector>

#include "attnplan/common.hpp"
#include "attnplan/mdp.hpp"

namespace attnplan {

class AttentionMode;

/// Conditional distribution of one variable's next value. A variable may
/// depend on previous-slice parents (values read from the current state) and
/// on next-slice parents (values read from the next state, e.g. an agent's
/// capture status depends on where the robot lands). Contexts are indexed in
/// mixed radix, previous parents first, both in listed order.
struct ConditionalTable {
    std::vector<int> prev_parents;
    std::vector<int> next_parents;
    bool action_dependent = false;
    /// rows[a][context] -> sparse distribution over the variable's domain.
    /// Only rows[0] is used when the table is action independent.
    std::vector<std::vector<std::vector<std::pair<int, double>>>> rows;
};

/// Two-slice dynamic Bayesian network: the joint transition is the product of
/// per-variable conditional tables. Next-slice dependencies must be acyclic.
class DbnModel {
public:
    DbnModel() = default;
    DbnModel(std::vector<VariableSpec> variables,
             std::vector<std::string> actions,
             std::vector<ConditionalTable> tables);

    int num_variables() const { return static_cast<int>(variables_.size()); }
    int num_actions() const { return static_cast<int>(actions_.size()); }
    const std::vector<VariableSpec>& variables() const { return variables_; }
    const std::vector<std::string>& actions() const { return actions_; }
    const ConditionalTable& table(int var) const { return tables_[var]; }

    /// Variables ordered so every next-slice parent precedes its dependents.
    const std::vector<int>& sampling_order() const { return order_; }

    const std::vector<std::pair<int, double>>& row(int var, int action,
                                                   const StateTuple& prev,
                                                   const StateTuple& next_partial) const;

    /// Full-product expansion of P(. | x, a) as (tuple, probability) pairs.
    std::vector<std::pair<StateTuple, double>> expand(const StateTuple& x, int action) const;

    /// True when every attended variable's parents (both slices) are attended.
    bool parent_closed(const AttentionMode& mode) const;

    /// Product expansion restricted to the attended variables: distribution of
    /// the next observed tuple given the current one. Requires parent closure.
    std::vector<std::pair<StateTuple, double>> expand_projected(const StateTuple& observed,
                                                                int action,
                                                                const AttentionMode& mode) const;

private:
    int context_index(int var, const StateTuple& prev, const StateTuple& next) const;

    std::vector<VariableSpec> variables_;
    std::vector<std::string> actions_;
    std::vector<ConditionalTable> tables_;
    std::vector<int> order_;
};

} // namespace attnplan
