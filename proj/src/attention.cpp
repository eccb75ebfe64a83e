#include "attnplan/attention.hpp"

#include <algorithm>
#include <cmath>

namespace attnplan {

AttentionMode::AttentionMode(int index, std::vector<int> attended, std::vector<double> sensor_costs)
    : index_(index), attended_(std::move(attended)), sensor_costs_(std::move(sensor_costs)) {
    if (index_ < 0) throw ValidationError("mode index must be non-negative");
    if (attended_.empty()) throw ValidationError("mode must attend at least one variable");
    if (!std::is_sorted(attended_.begin(), attended_.end()) ||
        std::adjacent_find(attended_.begin(), attended_.end()) != attended_.end())
        throw ValidationError("attended variables must be sorted and unique");
    if (attended_.front() < 0 || attended_.back() >= num_variables())
        throw ValidationError("attended variable index out of range");
    for (double c : sensor_costs_)
        if (c < 0.0 || !std::isfinite(c)) throw ValidationError("sensor costs must be non-negative");
    if (index_ == 0 && static_cast<int>(attended_.size()) != num_variables())
        throw ValidationError("mode 0 must attend every variable");
    for (int j = 0; j < num_variables(); ++j)
        if (!attends(j)) deactivation_reward_ += sensor_costs_[j];
}

AttentionMode AttentionMode::null_mode(std::vector<double> sensor_costs) {
    std::vector<int> all(sensor_costs.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return AttentionMode(0, std::move(all), std::move(sensor_costs));
}

bool AttentionMode::attends(int var) const {
    return std::binary_search(attended_.begin(), attended_.end(), var);
}

StateTuple AttentionMode::project(const StateTuple& x) const {
    StateTuple y(attended_.size());
    for (std::size_t i = 0; i < attended_.size(); ++i) y[i] = x[attended_[i]];
    return y;
}

std::vector<int> preimage(const AttentionMode& mode, const StateTuple& observed,
                          const FactoredMdp& mdp) {
    std::vector<int> ids;
    for (int s = 0; s < mdp.num_states(); ++s)
        if (mode.project(mdp.state(s)) == observed) ids.push_back(s);
    if (ids.empty()) throw EmptyPreimage("observed tuple has no enumerated preimage");
    return ids;
}

Disaggregation::Disaggregation(AttentionMode mode,
                               std::vector<StateTuple> observed,
                               std::vector<std::vector<std::pair<int, double>>> weights,
                               const FactoredMdp& mdp)
    : mode_(std::move(mode)), observed_(std::move(observed)), weights_(std::move(weights)) {
    if (mode_.num_variables() != mdp.num_variables())
        throw ValidationError("mode arity does not match the mdp");
    if (observed_.size() != weights_.size())
        throw ValidationError("one weight row per observed state required");
    for (int y = 0; y < num_observed(); ++y) {
        if (!ids_.emplace(observed_[y], y).second)
            throw ValidationError("duplicate observed tuple");
        if (weights_[y].empty())
            throw EmptyPreimage("disaggregation row has empty support");
        double sum = 0.0;
        for (const auto& [s, w] : weights_[y]) {
            if (s < 0 || s >= mdp.num_states())
                throw ValidationError("disaggregation support outside the enumeration");
            if (w < 0.0 || w > 1.0 + kStochasticTol)
                throw ValidationError("disaggregation weight outside [0, 1]");
            if (mode_.project(mdp.state(s)) != observed_[y])
                throw ValidationError("disaggregation weight outside the preimage");
            sum += w;
        }
        if (std::abs(sum - 1.0) > kStochasticTol)
            throw ValidationError("disaggregation row not normalized");
    }
    // The enumeration must cover the projection image, or transition rows
    // built against it would lose mass.
    for (int s = 0; s < mdp.num_states(); ++s)
        if (ids_.find(mode_.project(mdp.state(s))) == ids_.end())
            throw ValidationError("observed enumeration misses part of the projection image");
}

int Disaggregation::observed_id(const StateTuple& observed) const {
    auto it = ids_.find(observed);
    if (it == ids_.end()) throw std::out_of_range("observed tuple not in enumeration");
    return it->second;
}

Disaggregation uniform_disaggregation(const AttentionMode& mode, const FactoredMdp& mdp) {
    std::vector<StateTuple> observed;
    std::unordered_map<StateTuple, int, TupleHash> ids;
    std::vector<std::vector<std::pair<int, double>>> members;
    for (int s = 0; s < mdp.num_states(); ++s) {
        StateTuple y = mode.project(mdp.state(s));
        auto [it, inserted] = ids.emplace(std::move(y), static_cast<int>(observed.size()));
        if (inserted) {
            observed.push_back(it->first);
            members.emplace_back();
        }
        members[it->second].emplace_back(s, 0.0);
    }
    for (auto& row : members) {
        const double w = 1.0 / static_cast<double>(row.size());
        for (auto& entry : row) entry.second = w;
    }
    return Disaggregation(mode, std::move(observed), std::move(members), mdp);
}

namespace {

std::vector<VariableSpec> attended_variables(const FactoredMdp& mdp, const AttentionMode& mode) {
    std::vector<VariableSpec> vars;
    vars.reserve(mode.attended().size());
    for (int v : mode.attended()) vars.push_back(mdp.variables()[v]);
    return vars;
}

AttentionalMdp assemble(const FactoredMdp& mdp, const AttentionMode& mode,
                        const Disaggregation& disagg,
                        std::vector<SparseMatrix> transitions,
                        std::vector<double> reward) {
    FactoredMdp model(attended_variables(mdp, mode), disagg.observed_states(), mdp.actions(),
                      std::move(transitions), std::move(reward),
                      disagg.observed_id(mode.project(mdp.state(mdp.initial_state()))),
                      mdp.discount());
    return AttentionalMdp{mode, std::move(model), disagg, Policy{}, {}, false, 0};
}

} // namespace

AttentionalMdp build_attentional_mdp(const FactoredMdp& mdp, const AttentionMode& mode,
                                     const Disaggregation& disagg) {
    if (mode.num_variables() != mdp.num_variables())
        throw ValidationError("mode arity does not match the mdp");
    if (disagg.mode().index() != mode.index() || disagg.mode().attended() != mode.attended())
        throw ValidationError("disaggregation was built for a different mode");

    const int ny = disagg.num_observed();
    const int na = mdp.num_actions();

    // Observed id of every full state, so marginalizing a transition row is a
    // single pass over its entries.
    std::vector<int> observed_of(mdp.num_states());
    for (int s = 0; s < mdp.num_states(); ++s)
        observed_of[s] = disagg.observed_id(mode.project(mdp.state(s)));

    std::vector<SparseMatrix> transitions;
    transitions.reserve(na);
    std::vector<double> reward(static_cast<std::size_t>(ny) * na, 0.0);
    for (int a = 0; a < na; ++a) {
        std::vector<std::vector<std::pair<int, double>>> rows(ny);
        for (int y = 0; y < ny; ++y) {
            std::vector<double> acc(ny, 0.0);
            std::vector<int> touched;
            double r = 0.0;
            for (const auto& [s, w] : disagg.weights(y)) {
                r += w * mdp.reward(s, a);
                const auto cols = mdp.transitions(a).row_indices(s);
                const auto vals = mdp.transitions(a).row_values(s);
                for (std::size_t i = 0; i < cols.size(); ++i) {
                    const int yn = observed_of[cols[i]];
                    if (acc[yn] == 0.0) touched.push_back(yn);
                    acc[yn] += w * vals[i];
                }
            }
            reward[static_cast<std::size_t>(y) * na + a] = r;
            for (int yn : touched) rows[y].emplace_back(yn, acc[yn]);
        }
        transitions.push_back(SparseMatrix::from_rows(std::move(rows), ny));
    }
    return assemble(mdp, mode, disagg, std::move(transitions), std::move(reward));
}

AttentionalMdp build_attentional_mdp_factored(const FactoredMdp& mdp, const DbnModel& dbn,
                                              const AttentionMode& mode,
                                              const Disaggregation& disagg) {
    if (mode.num_variables() != mdp.num_variables())
        throw ValidationError("mode arity does not match the mdp");
    if (dbn.num_variables() != mdp.num_variables() || dbn.num_actions() != mdp.num_actions())
        throw ValidationError("dbn shape does not match the mdp");
    if (!dbn.parent_closed(mode))
        throw ModeNotParentClosed("mode " + std::to_string(mode.index()) +
                                  " attends variables with unattended parents");

    const int ny = disagg.num_observed();
    const int na = mdp.num_actions();
    std::vector<SparseMatrix> transitions;
    transitions.reserve(na);
    std::vector<double> reward(static_cast<std::size_t>(ny) * na, 0.0);
    for (int a = 0; a < na; ++a) {
        std::vector<std::vector<std::pair<int, double>>> rows(ny);
        for (int y = 0; y < ny; ++y) {
            for (const auto& [tuple, p] : dbn.expand_projected(disagg.observed_states()[y], a, mode))
                rows[y].emplace_back(disagg.observed_id(tuple), p);
            double r = 0.0;
            for (const auto& [s, w] : disagg.weights(y)) r += w * mdp.reward(s, a);
            reward[static_cast<std::size_t>(y) * na + a] = r;
        }
        transitions.push_back(SparseMatrix::from_rows(std::move(rows), ny));
    }
    return assemble(mdp, mode, disagg, std::move(transitions), std::move(reward));
}

AttentionalMdp solve_mode(AttentionalMdp am, double tol, int max_iters) {
    ValueIterationResult res = value_iteration(am.model, tol, max_iters);
    am.subpolicy = std::move(res.policy);
    am.value = std::move(res.value);
    am.sweeps = res.sweeps;
    am.solved = true;
    return am;
}

Policy lift_policy(const AttentionalMdp& am, const FactoredMdp& mdp) {
    if (!am.solved) throw ValidationError("mode must be solved before lifting");
    std::vector<int> chosen(mdp.num_states());
    for (int s = 0; s < mdp.num_states(); ++s)
        chosen[s] = am.subpolicy.action(am.model.state_id(am.mode.project(mdp.state(s))));
    return Policy::deterministic(std::move(chosen), mdp.num_actions());
}

} // namespace attnplan
