#pragma once

#include <cstdint>
#include <vector>

#include "attnplan/gridworld.hpp"
#include "attnplan/shift.hpp"

namespace attnplan {

/// Uniform draws addressed by (seed, rollout, time, element). Each stochastic
/// element of the world reads its own stream, so perturbing one variable's
/// trajectory never shifts the randomness another one sees, and reruns with
/// the same seed are bit-identical.
class DrawSource {
public:
    DrawSource(std::uint64_t seed, std::uint64_t rollout, std::uint64_t time)
        : seed_(seed), rollout_(rollout), time_(time) {}

    /// Uniform in [0, 1), pure in all four coordinates.
    double uniform(std::uint32_t element) const;

private:
    std::uint64_t seed_;
    std::uint64_t rollout_;
    std::uint64_t time_;
};

/// Samples one world step and the reward realized along with it.
class WorldSampler {
public:
    virtual ~WorldSampler() = default;
    virtual std::pair<int, double> step(int state, int action, const DrawSource& draws) const = 0;
    virtual const FactoredMdp& model() const = 0;
};

/// Samples from the joint transition row; the realized reward is the table
/// reward of (state, action).
class JointRowSampler : public WorldSampler {
public:
    explicit JointRowSampler(const FactoredMdp& mdp) : mdp_(&mdp) {}
    std::pair<int, double> step(int state, int action, const DrawSource& draws) const override;
    const FactoredMdp& model() const override { return *mdp_; }

private:
    const FactoredMdp* mdp_;
};

/// Samples a pursuit world element by element: the robot's slip, each agent's
/// move and each agent's capture coin consume separate streams. The realized
/// reward counts the captures that actually happened plus the penalty of the
/// cell the robot lands on.
class PursuitSampler : public WorldSampler {
public:
    explicit PursuitSampler(const CompiledWorld& world) : world_(&world) {}
    std::pair<int, double> step(int state, int action, const DrawSource& draws) const override;
    const FactoredMdp& model() const override { return world_->mdp; }

    /// Stream ids, exposed for counterfactual tests.
    static std::uint32_t robot_element() { return 0; }
    static std::uint32_t agent_element(int agent) { return 1 + agent; }
    static std::uint32_t capture_element(int agent) { return 1001 + agent; }

private:
    const CompiledWorld* world_;
};

struct StepRecord {
    int time = 0;
    int state = 0;       // state id at the start of the step
    int mode = 0;        // sustained mode
    int phase_step = 0;  // position within the sustain phase, starting at 1
    int action = 0;      // base action taken
    double reward = 0.0;
    double info_reward = 0.0;
    bool full_obs = false; // all sensors on: exactly at phase starts
};

struct TrajectoryLog {
    std::vector<StepRecord> steps;
    int final_state = 0;
    bool reached_absorbing = false;
    std::uint64_t seed = 0;
};

/// Executes the shift policy: at each decision point reads (mode, duration)
/// at the current full state, then follows that mode's subpolicy, which sees
/// only the projected state, for the committed number of steps. Runs to the
/// horizon; once the trajectory enters a state whose every action self-loops
/// with zero reward the remaining records are that state repeating, and
/// `reached_absorbing` is set.
TrajectoryLog rollout(const WorldSampler& sampler, const std::vector<AttentionalMdp>& modes,
                      const ShiftSolution& solution, int horizon, std::uint64_t seed,
                      std::uint64_t rollout_index = 0,
                      InfoAccounting accounting = InfoAccounting::PerStep,
                      int start_state = -1);

struct ReturnEstimate {
    double mean = 0.0;
    double std_error = 0.0; // standard error of the mean
    double ci = 0.0;        // 3 * std_error + truncation tail bound
};

struct ReturnsReport {
    ReturnEstimate goal;
    ReturnEstimate info;
    double tail_bound = 0.0;
    int rollouts = 0;
    int horizon = 0;
    std::uint64_t seed = 0;
};

/// Sample means of the discounted realized rewards and sensor savings over
/// independent rollouts. The reported CI adds the discount tail bound
/// discount^horizon * max_payout / (1 - discount) to three standard errors.
ReturnsReport estimate_returns(const WorldSampler& sampler,
                               const std::vector<AttentionalMdp>& modes,
                               const ShiftSolution& solution, int rollouts, int horizon,
                               std::uint64_t seed,
                               InfoAccounting accounting = InfoAccounting::PerStep);

/// True when every action at the state loops back with probability 1 and
/// zero reward.
bool is_absorbing(const FactoredMdp& mdp, int state);

} // namespace attnplan
