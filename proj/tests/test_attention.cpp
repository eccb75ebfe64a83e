#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "attnplan/attention.hpp"
#include "attnplan/gridworld.hpp"
#include "fixtures.hpp"

using namespace attnplan;

using fixtures::TwinChain;
using fixtures::dense_row;
using fixtures::stationary_world;

TEST_CASE("projection and deactivation bookkeeping") {
    const AttentionMode mode(1, {0, 2}, {1.0, 2.0, 4.0});
    CHECK(mode.project({7, 8, 9}) == StateTuple{7, 9});
    CHECK(mode.attends(0));
    CHECK(!mode.attends(1));
    CHECK(mode.deactivation_reward() == 2.0);

    const AttentionMode null = AttentionMode::null_mode({1.0, 2.0, 4.0});
    CHECK(null.index() == 0);
    CHECK(null.is_null());
    CHECK(null.deactivation_reward() == 0.0);
    CHECK(null.project({7, 8, 9}) == StateTuple{7, 8, 9});

    CHECK_THROWS_AS(AttentionMode(1, {2, 0}, {1.0, 2.0, 4.0}), ValidationError);
    CHECK_THROWS_AS(AttentionMode(1, {}, {1.0}), ValidationError);
    CHECK_THROWS_AS(AttentionMode(1, {0, 0}, {1.0, 2.0}), ValidationError);
}

TEST_CASE("preimage enumerates matching states and rejects unseen tuples") {
    const TwinChain twin;
    const AttentionMode mode(1, {0}, {1.0, 1.0});
    const std::vector<int> pre = preimage(mode, {0}, twin.mdp);
    REQUIRE(pre.size() == 2);
    for (int id : pre) CHECK(twin.mdp.state(id)[0] == 0);
    CHECK_THROWS_AS(preimage(mode, {5}, twin.mdp), EmptyPreimage);
}

TEST_CASE("uniform disaggregation spreads mass over the preimage") {
    const TwinChain twin;
    const AttentionMode mode(1, {1}, {1.0, 1.0});
    const Disaggregation d = uniform_disaggregation(mode, twin.mdp);
    REQUIRE(d.num_observed() == 2);
    for (int o = 0; o < d.num_observed(); ++o) {
        double total = 0.0;
        for (const auto& [state, w] : d.weights(o)) {
            CHECK(w == 0.5);
            CHECK(twin.mdp.state(state)[1] == d.observed_states()[o][0]);
            total += w;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("marginalized abstraction of an independent variable is its own chain") {
    const TwinChain twin;

    const AttentionMode mx(1, {0}, {1.0, 1.0});
    const AttentionalMdp ax = build_attentional_mdp(twin.mdp, mx, uniform_disaggregation(mx, twin.mdp));
    REQUIRE(ax.model.num_states() == 2);
    for (int x = 0; x < 2; ++x) {
        const int row = ax.disagg.observed_id({x});
        const std::vector<double> got = dense_row(ax.model.transitions(0), row);
        for (int nx = 0; nx < 2; ++nx)
            CHECK(std::abs(got[ax.disagg.observed_id({nx})] - TwinChain::PX[x][nx]) <= 1e-12);
        CHECK(std::abs(ax.model.reward(row, 0) - x) <= 1e-12);
    }

    const AttentionMode my(2, {1}, {1.0, 1.0});
    const AttentionalMdp ay = build_attentional_mdp(twin.mdp, my, uniform_disaggregation(my, twin.mdp));
    for (int y = 0; y < 2; ++y) {
        const int row = ay.disagg.observed_id({y});
        const std::vector<double> got = dense_row(ay.model.transitions(0), row);
        for (int ny = 0; ny < 2; ++ny)
            CHECK(std::abs(got[ay.disagg.observed_id({ny})] - TwinChain::PY[y][ny]) <= 1e-12);
        // Reward averages X over the preimage: (0 + 1) / 2.
        CHECK(std::abs(ay.model.reward(row, 0) - 0.5) <= 1e-12);
    }
}

TEST_CASE("factored and marginalized builds agree on parent-closed modes") {
    const TwinChain twin;
    for (int var = 0; var < 2; ++var) {
        const AttentionMode mode(var + 1, {var}, {1.0, 1.0});
        const Disaggregation d = uniform_disaggregation(mode, twin.mdp);
        const AttentionalMdp marg = build_attentional_mdp(twin.mdp, mode, d);
        const AttentionalMdp fact = build_attentional_mdp_factored(twin.mdp, twin.dbn, mode, d);
        REQUIRE(marg.model.num_states() == fact.model.num_states());
        for (int s = 0; s < marg.model.num_states(); ++s) {
            const std::vector<double> a = dense_row(marg.model.transitions(0), s);
            const std::vector<double> b = dense_row(fact.model.transitions(0), s);
            for (std::size_t c = 0; c < a.size(); ++c) CHECK(std::abs(a[c] - b[c]) <= 1e-8);
            CHECK(std::abs(marg.model.reward(s, 0) - fact.model.reward(s, 0)) <= 1e-12);
        }
    }
}

TEST_CASE("factored build refuses modes whose parents are unattended") {
    // Couple Y to X so that attending Y alone no longer closes the model.
    std::vector<VariableSpec> vars{{"x", 2, {}}, {"y", 2, {}}};
    std::vector<ConditionalTable> tables(2);
    tables[0].prev_parents = {0};
    tables[0].rows = {{{{0, 0.9}, {1, 0.1}}, {{0, 0.2}, {1, 0.8}}}};
    tables[1].prev_parents = {0, 1};
    tables[1].rows = {{{{0, 1.0}}, {{1, 1.0}}, {{0, 0.5}, {1, 0.5}}, {{1, 1.0}}}};
    const DbnModel dbn(vars, {"go"}, tables);
    auto expand = [&](const StateTuple& s, int a) { return dbn.expand(s, a); };
    auto reward = [](const StateTuple&, int) { return 0.0; };
    const FactoredMdp mdp = build_reachable_mdp(vars, {"go"}, {0, 0}, 0.9, expand, reward);

    const AttentionMode on_y(1, {1}, {1.0, 1.0});
    CHECK(!dbn.parent_closed(on_y));
    CHECK_THROWS_AS(
        build_attentional_mdp_factored(mdp, dbn, on_y, uniform_disaggregation(on_y, mdp)),
        ModeNotParentClosed);

    const AttentionMode on_x(2, {0}, {1.0, 1.0});
    CHECK(dbn.parent_closed(on_x));
}

TEST_CASE("null mode reproduces the original problem exactly") {
    const CompiledWorld world = compile(stationary_world());
    const AttentionMode null = world.null_mode();
    const AttentionalMdp a0 =
        solve_mode(build_attentional_mdp(world.mdp, null, uniform_disaggregation(null, world.mdp)));

    REQUIRE(a0.model.num_states() == world.mdp.num_states());
    for (int s = 0; s < world.mdp.num_states(); ++s) {
        // Identity projection keeps the enumeration order.
        CHECK(a0.model.state(s) == world.mdp.state(s));
        for (int act = 0; act < world.mdp.num_actions(); ++act) {
            const std::vector<double> lhs = dense_row(a0.model.transitions(act), s);
            const std::vector<double> rhs = dense_row(world.mdp.transitions(act), s);
            for (std::size_t c = 0; c < lhs.size(); ++c) CHECK(lhs[c] == rhs[c]);
            CHECK(a0.model.reward(s, act) == world.mdp.reward(s, act));
        }
    }

    const ValueIterationResult full = value_iteration(world.mdp);
    for (int s = 0; s < world.mdp.num_states(); ++s)
        CHECK(std::abs(a0.value[s] - full.value[s]) <= 2e-6);
}

TEST_CASE("aggregated transition rows stay stochastic") {
    const GridworldSpec spec = load_spec_file(fixtures::config_path("mini-3x3"));
    const CompiledWorld world = compile(spec);
    for (const AttentionMode& mode : world.modes) {
        const AttentionalMdp am =
            build_attentional_mdp(world.mdp, mode, uniform_disaggregation(mode, world.mdp));
        for (int a = 0; a < am.model.num_actions(); ++a)
            for (int s = 0; s < am.model.num_states(); ++s)
                CHECK(std::abs(am.model.transitions(a).row_sum(s) - 1.0) <= 1e-8);
    }
}

TEST_CASE("lifted subpolicies ignore unattended variables") {
    const GridworldSpec spec = load_spec_file(fixtures::config_path("mini-3x3"));
    const CompiledWorld world = compile(spec);
    const AttentionMode& mode = world.modes[0]; // robot and agent 1
    const AttentionalMdp am =
        solve_mode(build_attentional_mdp(world.mdp, mode, uniform_disaggregation(mode, world.mdp)));
    const Policy lifted = lift_policy(am, world.mdp);

    std::unordered_map<StateTuple, int, TupleHash> seen;
    for (int s = 0; s < world.mdp.num_states(); ++s) {
        const StateTuple obs = mode.project(world.mdp.state(s));
        auto [it, fresh] = seen.emplace(obs, lifted.action(s));
        if (!fresh) CHECK(it->second == lifted.action(s));
    }
}

TEST_CASE("subpolicy closes in on an adjacent stationary target") {
    // Deterministic robot, stationary agent: capturing now always beats any
    // detour, so next to the agent the subpolicy must step onto it.
    const CompiledWorld world = compile(stationary_world());
    const AttentionMode& mode = world.modes[0];
    const AttentionalMdp am =
        solve_mode(build_attentional_mdp(world.mdp, mode, uniform_disaggregation(mode, world.mdp)));

    const int dx[4] = {0, 0, 1, -1};
    const int dy[4] = {1, -1, 0, 0};
    int checked = 0;
    for (int s = 0; s < am.model.num_states(); ++s) {
        const StateTuple& obs = am.model.state(s);
        if (obs[1] == world.captured_value()) continue;
        const Cell robot = world.cell(obs[0]);
        const Cell agent = world.cell(obs[1]);
        const int dist = std::abs(robot.x - agent.x) + std::abs(robot.y - agent.y);
        if (dist != 1) continue;
        const int a = am.subpolicy.action(s);
        CHECK(robot.x + dx[a] == agent.x);
        CHECK(robot.y + dy[a] == agent.y);
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("disaggregation rows must cover the projection image and normalize") {
    const TwinChain twin;
    const AttentionMode mode(1, {0}, {1.0, 1.0});

    // Missing observed tuple.
    CHECK_THROWS_AS(Disaggregation(mode, {{0}}, {{{0, 1.0}}}, twin.mdp), ValidationError);

    // Weight on a state outside the observed tuple's preimage.
    const int alien = twin.mdp.state_id({1, 0});
    CHECK_THROWS_AS(
        Disaggregation(mode, {{0}, {1}}, {{{alien, 1.0}}, {{alien, 1.0}}}, twin.mdp),
        ValidationError);

    // Unnormalized row.
    const int member = twin.mdp.state_id({0, 0});
    CHECK_THROWS_AS(
        Disaggregation(mode, {{0}, {1}}, {{{member, 0.5}}, {{alien, 1.0}}}, twin.mdp),
        ValidationError);
}
