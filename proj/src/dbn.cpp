#include "attnplan/dbn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "attnplan/attention.hpp"

namespace attnplan {

DbnModel::DbnModel(std::vector<VariableSpec> variables,
                   std::vector<std::string> actions,
                   std::vector<ConditionalTable> tables)
    : variables_(std::move(variables)), actions_(std::move(actions)), tables_(std::move(tables)) {
    const int n = num_variables();
    if (n == 0) throw ValidationError("dbn needs at least one variable");
    if (actions_.empty()) throw ValidationError("dbn needs at least one action");
    if (static_cast<int>(tables_.size()) != n)
        throw ValidationError("one conditional table per variable required");

    for (int v = 0; v < n; ++v) {
        const ConditionalTable& t = tables_[v];
        std::size_t contexts = 1;
        for (int p : t.prev_parents) {
            if (p < 0 || p >= n) throw ValidationError("dbn parent index out of range");
            contexts *= variables_[p].domain_size;
        }
        for (int p : t.next_parents) {
            if (p < 0 || p >= n) throw ValidationError("dbn parent index out of range");
            contexts *= variables_[p].domain_size;
        }
        const std::size_t action_rows = t.action_dependent ? actions_.size() : 1;
        if (t.rows.size() != action_rows)
            throw ValidationError("dbn table has wrong number of action rows");
        for (const auto& per_action : t.rows) {
            if (per_action.size() != contexts)
                throw ValidationError("dbn table has wrong number of contexts");
            for (const auto& dist : per_action) {
                double sum = 0.0;
                for (const auto& [val, p] : dist) {
                    if (val < 0 || val >= variables_[v].domain_size)
                        throw ValidationError("dbn table value outside variable domain");
                    if (p < 0.0 || p > 1.0 + kStochasticTol)
                        throw ValidationError("dbn probability outside [0, 1]");
                    sum += p;
                }
                if (std::abs(sum - 1.0) > kStochasticTol)
                    throw ValidationError("dbn table row not normalized");
            }
        }
    }

    // Topological order over next-slice dependencies.
    std::vector<int> indegree(n, 0);
    std::vector<std::vector<int>> dependents(n);
    for (int v = 0; v < n; ++v)
        for (int p : tables_[v].next_parents) {
            dependents[p].push_back(v);
            ++indegree[v];
        }
    std::vector<int> ready;
    for (int v = 0; v < n; ++v)
        if (indegree[v] == 0) ready.push_back(v);
    while (!ready.empty()) {
        // Lowest index first keeps the expansion order deterministic.
        std::sort(ready.begin(), ready.end(), std::greater<int>());
        const int v = ready.back();
        ready.pop_back();
        order_.push_back(v);
        for (int d : dependents[v])
            if (--indegree[d] == 0) ready.push_back(d);
    }
    if (static_cast<int>(order_.size()) != n)
        throw ValidationError("dbn next-slice dependencies contain a cycle");
}

int DbnModel::context_index(int var, const StateTuple& prev, const StateTuple& next) const {
    const ConditionalTable& t = tables_[var];
    int idx = 0;
    for (int p : t.prev_parents) idx = idx * variables_[p].domain_size + prev[p];
    for (int p : t.next_parents) idx = idx * variables_[p].domain_size + next[p];
    return idx;
}

const std::vector<std::pair<int, double>>& DbnModel::row(int var, int action,
                                                         const StateTuple& prev,
                                                         const StateTuple& next_partial) const {
    const ConditionalTable& t = tables_[var];
    const auto& per_action = t.rows[t.action_dependent ? action : 0];
    return per_action[context_index(var, prev, next_partial)];
}

std::vector<std::pair<StateTuple, double>> DbnModel::expand(const StateTuple& x, int action) const {
    const int n = num_variables();
    std::vector<std::pair<StateTuple, double>> result;
    StateTuple next(n, 0);

    // Depth-first over the sampling order, multiplying branch probabilities.
    auto recurse = [&](auto&& self, std::size_t depth, double prob) -> void {
        if (depth == order_.size()) {
            result.emplace_back(next, prob);
            return;
        }
        const int v = order_[depth];
        for (const auto& [val, p] : row(v, action, x, next)) {
            if (p == 0.0) continue;
            next[v] = val;
            self(self, depth + 1, prob * p);
        }
    };
    recurse(recurse, 0, 1.0);
    return result;
}

bool DbnModel::parent_closed(const AttentionMode& mode) const {
    for (int v : mode.attended()) {
        for (int p : tables_[v].prev_parents)
            if (!mode.attends(p)) return false;
        for (int p : tables_[v].next_parents)
            if (!mode.attends(p)) return false;
    }
    return true;
}

std::vector<std::pair<StateTuple, double>> DbnModel::expand_projected(const StateTuple& observed,
                                                                      int action,
                                                                      const AttentionMode& mode) const {
    if (!parent_closed(mode))
        throw ModeNotParentClosed("attended variables depend on unattended parents");

    // Scatter the observed tuple into full-width scratch tuples; unattended
    // positions are never read thanks to parent closure.
    const int n = num_variables();
    StateTuple prev(n, 0);
    const auto& attended = mode.attended();
    for (std::size_t i = 0; i < attended.size(); ++i) prev[attended[i]] = observed[i];

    std::vector<int> attended_order;
    for (int v : order_)
        if (mode.attends(v)) attended_order.push_back(v);

    std::vector<std::pair<StateTuple, double>> result;
    StateTuple next(n, 0);
    auto recurse = [&](auto&& self, std::size_t depth, double prob) -> void {
        if (depth == attended_order.size()) {
            StateTuple projected(attended.size());
            for (std::size_t i = 0; i < attended.size(); ++i) projected[i] = next[attended[i]];
            result.emplace_back(std::move(projected), prob);
            return;
        }
        const int v = attended_order[depth];
        for (const auto& [val, p] : row(v, action, prev, next)) {
            if (p == 0.0) continue;
            next[v] = val;
            self(self, depth + 1, prob * p);
        }
    };
    recurse(recurse, 0, 1.0);
    return result;
}

} // namespace attnplan
