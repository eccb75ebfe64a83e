#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "attnplan/attention.hpp"
#include "attnplan/dbn.hpp"
#include "attnplan/mdp.hpp"

namespace attnplan {

struct Cell {
    int x = 0;
    int y = 0;
    bool operator==(const Cell&) const = default;
};

struct PenaltySpec {
    Cell cell;
    double reward = -20.0;
};

struct AgentSpec {
    Cell start;
    std::string dynamics = "uniform-neighbor"; // or "stationary"
};

/// Declarative description of a pursuit world: a robot with slip dynamics
/// chasing stochastic agents on a walled grid, with per-variable sensor costs
/// and a list of attention modes over [robot, agent 1, ..., agent n].
struct GridworldSpec {
    int width = 0;
    int height = 0;
    std::vector<Cell> walls;
    std::vector<PenaltySpec> penalties;
    Cell robot_start;
    double slip_main = 0.7;
    double slip_side = 0.15;
    std::vector<AgentSpec> agents;
    double capture_epsilon = 0.0;
    double capture_prob = 1.0;
    double capture_reward = 100.0;
    std::vector<double> sensor_costs;              // default: all zero
    std::vector<std::vector<int>> attention_modes; // default: [[0, i]] per agent i
    double discount = 0.95;
    /// Charge cell penalties only when the robot arrives from another cell.
    bool penalty_on_entry_only = false;
    /// Replace every all-captured state's dynamics by a zero-reward self-loop.
    /// When false the set is still closed and earns no reward, but the
    /// transition stays an exact product of the per-variable tables.
    bool absorb_on_completion = true;

    void validate() const; // throws ValidationError naming the field
};

/// Parses the JSON document described in the README. Throws ParseError on
/// malformed JSON and ValidationError on schema violations.
GridworldSpec load_spec(const std::string& json_text);
GridworldSpec load_spec_file(const std::filesystem::path& path);

/// Everything derived from a GridworldSpec: the joint MDP over reachable
/// states, the per-variable transition tables, and the attention modes.
class CompiledWorld {
public:
    GridworldSpec spec;
    FactoredMdp mdp;
    DbnModel dbn;
    std::vector<AttentionMode> modes; // indices 1..m, as listed in the spec

    int num_cells() const { return static_cast<int>(cells_.size()); }
    Cell cell(int index) const { return cells_[index]; }
    /// Index of a free cell, -1 for walls and out-of-range coordinates.
    int cell_index(Cell c) const;
    /// Domain value agents take once captured.
    int captured_value() const { return num_cells(); }

    bool all_captured(const StateTuple& t) const;
    double penalty_at(int cell_index, int previous_cell_index) const;
    bool capture_possible(int robot_cell, int agent_cell) const;

    /// Movement-only distributions, before the capture composition.
    const std::vector<std::pair<int, double>>& robot_move(int action, int cell) const {
        return robot_move_[action][cell];
    }
    const std::vector<std::pair<int, double>>& agent_move(int agent, int cell) const {
        return agent_move_[agent][cell];
    }

    AttentionMode null_mode() const { return AttentionMode::null_mode(spec.sensor_costs); }

private:
    friend CompiledWorld compile(const GridworldSpec&, std::size_t);
    std::vector<Cell> cells_;
    std::vector<int> cell_lookup_; // width*height grid, -1 for walls
    std::vector<double> penalty_;  // per free cell
    std::vector<std::vector<std::vector<std::pair<int, double>>>> robot_move_; // [action][cell]
    std::vector<std::vector<std::vector<std::pair<int, double>>>> agent_move_; // [agent][cell]
};

/// Compiles the spec. Throws StateSpaceTooLarge when the reachable state
/// enumeration exceeds `max_states`.
CompiledWorld compile(const GridworldSpec& spec, std::size_t max_states = 500000);

/// Action names shared by every compiled world.
inline const std::vector<std::string>& gridworld_actions() {
    static const std::vector<std::string> names{"N", "S", "E", "W"};
    return names;
}

} // namespace attnplan
