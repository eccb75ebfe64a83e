#include "attnplan/shift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace attnplan {

namespace {

void check_weights(const std::array<double, 2>& w) {
    if (!(w[0] > 0.0) || !(w[1] > 0.0) || std::abs(w[0] + w[1] - 1.0) > 1e-9)
        throw ValidationError("objective weights must be positive and sum to 1");
}

double geometric_sum(double discount, int first, int last) {
    // sum_{j=first..last} discount^(j-1), empty when last < first
    if (last < first) return 0.0;
    return (std::pow(discount, first - 1) - std::pow(discount, last)) / (1.0 - discount);
}

} // namespace

AttentionShiftMdp::AttentionShiftMdp(const FactoredMdp& base,
                                     const std::vector<AttentionalMdp>& modes, int max_sustain,
                                     InfoAccounting accounting)
    : base_(&base), accounting_(accounting) {
    if (modes.empty()) throw ValidationError("at least one attention mode required");
    if (max_sustain < 1) throw ValidationError("sustain bound must be at least 1");
    if (base.discount() == 1.0) throw DiscountOne("attention-shift planning requires discount < 1");
    for (const auto& am : modes) {
        if (!am.solved) throw ValidationError("modes must be solved before shift planning");
        if (am.mode.is_null())
            throw ValidationError("the always-on mode does not take part in shift planning");
        if (am.mode.num_variables() != base.num_variables())
            throw ValidationError("mode arity does not match the base mdp");
        lifted_.push_back(lift_policy(am, base));
        chains_.push_back(induce_chain(base, lifted_.back()));
        deactivation_.push_back(am.mode.deactivation_reward());
    }
    goal_reward_.resize(num_modes());
    info_reward_.resize(num_modes());
    kernels_.resize(num_modes());
    extend(max_sustain);
}

void AttentionShiftMdp::append_durations(int up_to) {
    const double gamma = discount();
    for (int k = 0; k < num_modes(); ++k) {
        auto& per_mode = goal_reward_[k];
        while (static_cast<int>(per_mode.size()) < up_to) {
            if (per_mode.empty()) {
                per_mode.push_back(chains_[k].reward);
            } else {
                std::vector<double> g = chains_[k].transition.apply(per_mode.back());
                for (std::size_t s = 0; s < g.size(); ++s)
                    g[s] = chains_[k].reward[s] + gamma * g[s];
                per_mode.push_back(std::move(g));
            }
        }
        auto& per_mode_info = info_reward_[k];
        while (static_cast<int>(per_mode_info.size()) < up_to) {
            const int t = static_cast<int>(per_mode_info.size()) + 1;
            const int first = accounting_ == InfoAccounting::PerStep ? 1 : 2;
            per_mode_info.push_back(deactivation_[k] * geometric_sum(gamma, first, t));
        }
        kernels_[k].resize(up_to);
    }
}

void AttentionShiftMdp::extend(int new_max_sustain) {
    if (new_max_sustain < max_sustain_)
        throw ValidationError("sustain bound can only grow");
    append_durations(new_max_sustain);
    actions_.clear();
    for (int k = 1; k <= num_modes(); ++k)
        for (int t = 1; t <= new_max_sustain; ++t) actions_.push_back(SustainAction{k, t});
    max_sustain_ = new_max_sustain;
}

int AttentionShiftMdp::action_index(const SustainAction& a) const {
    if (a.mode < 1 || a.mode > num_modes() || a.duration < 1 || a.duration > max_sustain_)
        throw std::out_of_range("sustain action outside the action set");
    return (a.mode - 1) * max_sustain_ + (a.duration - 1);
}

const SparseMatrix& AttentionShiftMdp::kernel(const SustainAction& a) const {
    action_index(a); // range check
    auto& slot = kernels_[a.mode - 1][a.duration - 1];
    if (!slot) {
        if (a.duration == 1) {
            slot = chains_[a.mode - 1].transition;
        } else {
            slot = kernel(SustainAction{a.mode, a.duration - 1})
                       .multiply(chains_[a.mode - 1].transition);
        }
    }
    return *slot;
}

AttentionShiftMdp build_shift_mdp(const FactoredMdp& base, const std::vector<AttentionalMdp>& modes,
                                  int max_sustain, InfoAccounting accounting) {
    return AttentionShiftMdp(base, modes, max_sustain, accounting);
}

ShiftSolution solve_shift(const AttentionShiftMdp& sm, std::array<double, 2> weights, double tol,
                          int max_iters, const std::vector<double>* warm_start) {
    check_weights(weights);
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

    const int n = sm.num_states();
    const int m = sm.num_modes();
    const int T = sm.max_sustain();
    const double gamma = sm.discount();

    std::vector<double> value(n, 0.0);
    if (warm_start) {
        if (static_cast<int>(warm_start->size()) != n)
            throw ValidationError("warm start size does not match the state space");
        value = *warm_start;
    }

    // Per-action discount factors gamma^t.
    std::vector<double> gamma_pow(T + 1, 1.0);
    for (int t = 1; t <= T; ++t) gamma_pow[t] = gamma_pow[t - 1] * gamma;

    const double stop = sweep_threshold(tol, gamma);
    std::vector<double> next(n);
    std::vector<double> propagated;
    int sweeps = 0;
    bool converged = false;
    while (sweeps < max_iters) {
        std::fill(next.begin(), next.end(), -std::numeric_limits<double>::infinity());
        for (int k = 1; k <= m; ++k) {
            propagated = value;
            for (int t = 1; t <= T; ++t) {
                // propagated = chain^t * value after this application
                propagated = sm.chain(k).transition.apply(propagated);
                const std::vector<double>& g = sm.goal_reward(SustainAction{k, t});
                const double info = sm.info_reward(SustainAction{k, t});
                const double base = weights[1] * info;
                for (int s = 0; s < n; ++s) {
                    const double q = weights[0] * g[s] + base + gamma_pow[t] * propagated[s];
                    if (q > next[s]) next[s] = q;
                }
            }
        }
        double delta = 0.0;
        for (int s = 0; s < n; ++s) delta = std::max(delta, std::abs(next[s] - value[s]));
        value.swap(next);
        ++sweeps;
        if (delta <= stop) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NonConvergence("shift value iteration did not reach tolerance within iteration cap");

    // Greedy extraction on the returned iterate. Actions whose backups agree
    // to within twice the tolerance count as tied: the iterate itself is only
    // accurate to tol, and approaching the fixed point from below inflates
    // longer commitments by up to gamma^t times that error. Among ties the
    // ordering wins: lowest mode, then shortest duration.
    ShiftSolution sol;
    sol.weights = weights;
    sol.sweeps = sweeps;
    sol.policy.assign(n, SustainAction{1, 1});
    const std::size_t num_actions = sm.actions().size();
    std::vector<double> q(static_cast<std::size_t>(n) * num_actions);
    std::size_t col = 0;
    for (int k = 1; k <= m; ++k) {
        propagated = value;
        for (int t = 1; t <= T; ++t, ++col) {
            propagated = sm.chain(k).transition.apply(propagated);
            const std::vector<double>& g = sm.goal_reward(SustainAction{k, t});
            const double base = weights[1] * sm.info_reward(SustainAction{k, t});
            for (int s = 0; s < n; ++s)
                q[s * num_actions + col] = weights[0] * g[s] + base + gamma_pow[t] * propagated[s];
        }
    }
    const double tie_window = 2.0 * tol;
    double residual = 0.0;
    for (int s = 0; s < n; ++s) {
        const double* row = q.data() + static_cast<std::size_t>(s) * num_actions;
        double best = row[0];
        for (std::size_t a = 1; a < num_actions; ++a) best = std::max(best, row[a]);
        std::size_t pick = 0;
        while (row[pick] < best - tie_window) ++pick;
        sol.policy[s] = sm.actions()[pick];
        residual = std::max(residual, std::abs(best - value[s]));
        sol.max_duration_used = std::max(sol.max_duration_used, sol.policy[s].duration);
    }
    sol.value = std::move(value);
    sol.residual = residual;
    auto [goal, info] = evaluate_objectives(sm, sol.policy, tol, max_iters);
    sol.goal_value = std::move(goal);
    sol.info_value = std::move(info);
    return sol;
}

std::pair<std::vector<double>, std::vector<double>> evaluate_objectives(
    const AttentionShiftMdp& sm, const std::vector<SustainAction>& policy, double tol,
    int max_iters) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const int n = sm.num_states();
    if (static_cast<int>(policy.size()) != n)
        throw ValidationError("policy size does not match the state space");
    for (const auto& a : policy) sm.action_index(a); // range checks

    // States grouped by chosen action share the t-fold chain application.
    std::vector<std::vector<int>> groups(static_cast<std::size_t>(sm.num_modes()) * sm.max_sustain());
    for (int s = 0; s < n; ++s) groups[sm.action_index(policy[s])].push_back(s);

    const double gamma = sm.discount();
    const double stop = sweep_threshold(tol, gamma);
    auto solve_component = [&](auto&& reward_at) {
        std::vector<double> x(n, 0.0);
        for (int iter = 0; iter < max_iters; ++iter) {
            std::vector<double> next(n, 0.0);
            for (const auto& action : sm.actions()) {
                const auto& members = groups[sm.action_index(action)];
                if (members.empty()) continue;
                std::vector<double> propagated = x;
                for (int t = 0; t < action.duration; ++t)
                    propagated = sm.chain(action.mode).transition.apply(propagated);
                const double scale = std::pow(gamma, action.duration);
                for (int s : members) next[s] = reward_at(s, action) + scale * propagated[s];
            }
            double delta = 0.0;
            for (int s = 0; s < n; ++s) delta = std::max(delta, std::abs(next[s] - x[s]));
            x.swap(next);
            if (delta <= stop) return x;
        }
        throw NonConvergence("objective decomposition did not reach tolerance within iteration cap");
    };

    auto goal = solve_component(
        [&](int s, const SustainAction& a) { return sm.goal_reward(a)[s]; });
    auto info = solve_component(
        [&](int s, const SustainAction& a) { (void)s; return sm.info_reward(a); });
    return {std::move(goal), std::move(info)};
}

SustainBoundResult sustain_bound_search(const FactoredMdp& base,
                                        const std::vector<AttentionalMdp>& modes,
                                        std::array<double, 2> weights, int max_bound, double tol,
                                        InfoAccounting accounting) {
    check_weights(weights);
    if (max_bound < 1) throw ValidationError("sustain bound cap must be at least 1");

    SustainBoundResult result;
    AttentionShiftMdp sm(base, modes, 1, accounting);
    result.solutions.push_back(solve_shift(sm, weights, tol));
    for (int next_bound = 2; next_bound <= max_bound; ++next_bound) {
        sm.extend(next_bound);
        const std::vector<double>& previous = result.solutions.back().value;
        ShiftSolution sol = solve_shift(sm, weights, tol, kDefaultMaxIters, &previous);
        double gap = 0.0;
        for (std::size_t s = 0; s < previous.size(); ++s)
            gap = std::max(gap, std::abs(sol.value[s] - previous[s]));
        result.solutions.push_back(std::move(sol));
        if (gap <= 10.0 * tol) {
            result.optimal_bound = next_bound - 1;
            result.certified = true;
            return result;
        }
    }
    // Cap reached without the gap closing: the reported bound is a lower bound.
    result.optimal_bound = max_bound;
    result.certified = false;
    return result;
}

std::vector<ParetoPoint> pareto_sweep(const FactoredMdp& base,
                                      const std::vector<AttentionalMdp>& modes, int max_sustain,
                                      const std::vector<std::array<double, 2>>& weight_list,
                                      double tol, InfoAccounting accounting) {
    if (weight_list.empty()) throw ValidationError("weight list must be non-empty");
    for (const auto& w : weight_list) check_weights(w);

    AttentionShiftMdp sm(base, modes, max_sustain, accounting);
    std::vector<ParetoPoint> points;
    points.reserve(weight_list.size());
    const std::vector<double>* warm = nullptr;
    for (const auto& w : weight_list) {
        ShiftSolution sol = solve_shift(sm, w, tol, kDefaultMaxIters, warm);
        ParetoPoint point;
        point.weights = w;
        point.goal_at_start = sol.goal_value[base.initial_state()];
        point.info_at_start = sol.info_value[base.initial_state()];
        point.solution = std::move(sol);
        points.push_back(std::move(point));
        warm = &points.back().solution.value;
    }
    return points;
}

} // namespace attnplan
