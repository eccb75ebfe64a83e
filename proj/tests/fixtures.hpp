#pragma once

// Small models shared by several suites.

#include <string>
#include <vector>

#include "attnplan/attention.hpp"
#include "attnplan/dbn.hpp"
#include "attnplan/gridworld.hpp"
#include "attnplan/mdp.hpp"

namespace fixtures {

using namespace attnplan;

// Two independent binary variables evolving side by side: X' depends on X
// only, Y' on Y only, and the reward reads X alone. Every marginal quantity
// of this model is known in closed form.
struct TwinChain {
    DbnModel dbn;
    FactoredMdp mdp;
    static constexpr double PX[2][2] = {{0.9, 0.1}, {0.2, 0.8}};
    static constexpr double PY[2][2] = {{0.5, 0.5}, {0.3, 0.7}};

    TwinChain() {
        std::vector<VariableSpec> vars{{"x", 2, {}}, {"y", 2, {}}};
        std::vector<ConditionalTable> tables(2);
        tables[0].prev_parents = {0};
        tables[0].rows = {{{{0, PX[0][0]}, {1, PX[0][1]}}, {{0, PX[1][0]}, {1, PX[1][1]}}}};
        tables[1].prev_parents = {1};
        tables[1].rows = {{{{0, PY[0][0]}, {1, PY[0][1]}}, {{0, PY[1][0]}, {1, PY[1][1]}}}};
        dbn = DbnModel(vars, {"go"}, tables);
        auto expand = [this](const StateTuple& s, int a) { return dbn.expand(s, a); };
        auto reward = [](const StateTuple& s, int) { return static_cast<double>(s[0]); };
        mdp = build_reachable_mdp(vars, {"go"}, {0, 0}, 0.9, expand, reward);
    }
};

// 3x3 world with a deterministic robot and one stationary agent.
inline GridworldSpec stationary_world() {
    GridworldSpec spec;
    spec.width = 3;
    spec.height = 3;
    spec.robot_start = {0, 0};
    spec.slip_main = 1.0;
    spec.slip_side = 0.0;
    spec.agents = {{{2, 1}, "stationary"}};
    spec.sensor_costs = {0.0, 5.0};
    spec.attention_modes = {{0, 1}};
    spec.discount = 0.95;
    return spec;
}

inline std::vector<double> dense_row(const SparseMatrix& m, int row) {
    std::vector<double> out(m.cols(), 0.0);
    auto idx = m.row_indices(row);
    auto val = m.row_values(row);
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] += val[i];
    return out;
}

inline std::string config_path(const std::string& name) {
    return std::string(ATTNPLAN_CONFIG_DIR) + "/" + name + ".json";
}

// Marginalized and solved attentional model for one mode.
inline AttentionalMdp solved_mode(const FactoredMdp& mdp, const AttentionMode& mode,
                                  double tol = 1e-6) {
    return solve_mode(build_attentional_mdp(mdp, mode, uniform_disaggregation(mode, mdp)), tol);
}

// All of a compiled world's modes, solved.
inline std::vector<AttentionalMdp> solved_modes(const CompiledWorld& world, double tol = 1e-6) {
    std::vector<AttentionalMdp> out;
    for (const AttentionMode& mode : world.modes) out.push_back(solved_mode(world.mdp, mode, tol));
    return out;
}

} // namespace fixtures
