#include "attnplan/rollout.hpp"

#include <cmath>

namespace attnplan {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

int sample_index(const std::vector<std::pair<int, double>>& dist, double u) {
    double acc = 0.0;
    for (const auto& [value, p] : dist) {
        acc += p;
        if (u < acc) return value;
    }
    return dist.back().first;
}

} // namespace

double DrawSource::uniform(std::uint32_t element) const {
    std::uint64_t h = splitmix64(seed_ ^ 0x6c62272e07bb0142ull);
    h = splitmix64(h ^ rollout_);
    h = splitmix64(h ^ time_);
    h = splitmix64(h ^ element);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::pair<int, double> JointRowSampler::step(int state, int action, const DrawSource& draws) const {
    const auto cols = mdp_->transitions(action).row_indices(state);
    const auto vals = mdp_->transitions(action).row_values(state);
    const double u = draws.uniform(0);
    double acc = 0.0;
    int next = cols.empty() ? state : cols.back();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        acc += vals[i];
        if (u < acc) {
            next = cols[i];
            break;
        }
    }
    return {next, mdp_->reward(state, action)};
}

std::pair<int, double> PursuitSampler::step(int state, int action, const DrawSource& draws) const {
    const CompiledWorld& w = *world_;
    const StateTuple& x = w.mdp.state(state);
    if (w.all_captured(x)) {
        // Completed: no rewards remain either way; with absorbing completion
        // the state also stops changing.
        if (w.spec.absorb_on_completion) return {state, 0.0};
        StateTuple next = x;
        next[0] = sample_index(w.robot_move(action, x[0]), draws.uniform(robot_element()));
        return {w.mdp.state_id(next), 0.0};
    }

    StateTuple next = x;
    next[0] = sample_index(w.robot_move(action, x[0]), draws.uniform(robot_element()));
    double reward = w.penalty_at(next[0], x[0]);
    const int n_agents = static_cast<int>(w.spec.agents.size());
    for (int i = 0; i < n_agents; ++i) {
        if (x[1 + i] == w.captured_value()) continue;
        const int target =
            sample_index(w.agent_move(i, x[1 + i]), draws.uniform(agent_element(i)));
        if (w.capture_possible(next[0], target) &&
            draws.uniform(capture_element(i)) < w.spec.capture_prob) {
            next[1 + i] = w.captured_value();
            reward += w.spec.capture_reward;
        } else {
            next[1 + i] = target;
        }
    }
    return {w.mdp.state_id(next), reward};
}

bool is_absorbing(const FactoredMdp& mdp, int state) {
    for (int a = 0; a < mdp.num_actions(); ++a) {
        if (mdp.reward(state, a) != 0.0) return false;
        const auto cols = mdp.transitions(a).row_indices(state);
        if (cols.size() != 1 || cols[0] != state) return false;
    }
    return true;
}

TrajectoryLog rollout(const WorldSampler& sampler, const std::vector<AttentionalMdp>& modes,
                      const ShiftSolution& solution, int horizon, std::uint64_t seed,
                      std::uint64_t rollout_index, InfoAccounting accounting, int start_state) {
    const FactoredMdp& mdp = sampler.model();
    if (horizon < 1) throw ValidationError("rollout horizon must be at least 1");
    if (start_state >= mdp.num_states()) throw ValidationError("rollout start state out of range");
    if (static_cast<int>(solution.policy.size()) != mdp.num_states())
        throw ValidationError("shift policy does not cover the state space");
    if (modes.empty()) throw ValidationError("at least one attention mode required");

    // Dense per-mode action lookup over full states.
    std::vector<std::vector<int>> lifted(modes.size());
    std::vector<double> savings(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (!modes[k].solved) throw ValidationError("modes must be solved before rollouts");
        Policy p = lift_policy(modes[k], mdp);
        lifted[k].resize(mdp.num_states());
        for (int s = 0; s < mdp.num_states(); ++s) lifted[k][s] = p.action(s);
        savings[k] = modes[k].mode.deactivation_reward();
    }

    TrajectoryLog log;
    log.seed = seed;
    int state = start_state < 0 ? mdp.initial_state() : start_state;
    int time = 0;
    while (time < horizon) {
        const SustainAction phase = solution.policy[state];
        for (int j = 1; j <= phase.duration && time < horizon; ++j) {
            StepRecord rec;
            rec.time = time;
            rec.state = state;
            rec.mode = phase.mode;
            rec.phase_step = j;
            rec.full_obs = j == 1;
            rec.action = lifted[phase.mode - 1][state];
            rec.info_reward =
                (accounting == InfoAccounting::BoundaryAdjusted && j == 1) ? 0.0
                                                                           : savings[phase.mode - 1];
            auto [next, reward] = sampler.step(state, rec.action, DrawSource(seed, rollout_index, time));
            rec.reward = reward;
            log.steps.push_back(rec);
            state = next;
            ++time;
        }
    }
    log.final_state = state;
    log.reached_absorbing = is_absorbing(mdp, state);
    return log;
}

ReturnsReport estimate_returns(const WorldSampler& sampler,
                               const std::vector<AttentionalMdp>& modes,
                               const ShiftSolution& solution, int rollouts, int horizon,
                               std::uint64_t seed, InfoAccounting accounting) {
    if (rollouts < 1) throw ValidationError("need at least one rollout");
    const FactoredMdp& mdp = sampler.model();
    const double gamma = mdp.discount();

    double goal_sum = 0.0, goal_sq = 0.0, info_sum = 0.0, info_sq = 0.0;
    for (int r = 0; r < rollouts; ++r) {
        const TrajectoryLog log = rollout(sampler, modes, solution, horizon, seed, r, accounting);
        double g = 0.0, i = 0.0, scale = 1.0;
        for (const StepRecord& rec : log.steps) {
            g += scale * rec.reward;
            i += scale * rec.info_reward;
            scale *= gamma;
        }
        goal_sum += g;
        goal_sq += g * g;
        info_sum += i;
        info_sq += i * i;
    }

    const double n = static_cast<double>(rollouts);
    double max_saving = 0.0;
    for (const auto& am : modes)
        max_saving = std::max(max_saving, am.mode.deactivation_reward());
    const double tail = gamma < 1.0
                            ? std::pow(gamma, horizon) *
                                  std::max(mdp.max_abs_reward(), max_saving) / (1.0 - gamma)
                            : 0.0;

    auto estimate = [&](double sum, double sq) {
        ReturnEstimate e;
        e.mean = sum / n;
        const double var = std::max(0.0, sq / n - e.mean * e.mean);
        e.std_error = std::sqrt(var / n);
        e.ci = 3.0 * e.std_error + tail;
        return e;
    };
    ReturnsReport report;
    report.goal = estimate(goal_sum, goal_sq);
    report.info = estimate(info_sum, info_sq);
    report.tail_bound = tail;
    report.rollouts = rollouts;
    report.horizon = horizon;
    report.seed = seed;
    return report;
}

} // namespace attnplan
