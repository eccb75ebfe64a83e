#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "attnplan/mdp.hpp"
#include "oracles.hpp"

using namespace attnplan;

namespace {

double max_row_diff(const SparseMatrix& a, const SparseMatrix& b) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    double worst = 0.0;
    for (int r = 0; r < a.rows(); ++r) {
        std::vector<double> dense(a.cols(), 0.0);
        auto ai = a.row_indices(r);
        auto av = a.row_values(r);
        for (std::size_t i = 0; i < ai.size(); ++i) dense[ai[i]] += av[i];
        auto bi = b.row_indices(r);
        auto bv = b.row_values(r);
        for (std::size_t i = 0; i < bi.size(); ++i) dense[bi[i]] -= bv[i];
        for (double d : dense) worst = std::max(worst, std::abs(d));
    }
    return worst;
}

oracles::Chain chain_under(const oracles::DenseMdp& m, const std::vector<int>& pi) {
    oracles::Chain c;
    for (int s = 0; s < m.states(); ++s) {
        c.P.push_back(m.P[pi[s]][s]);
        c.r.push_back(m.R[s][pi[s]]);
    }
    return c;
}

} // namespace

TEST_CASE("value iteration solves the deterministic corridor") {
    const oracles::DenseMdp dense = oracles::corridor_mdp();
    const FactoredMdp mdp = oracles::make_mdp(dense, 0, {"left", "right"});
    const ValueIterationResult res = value_iteration(mdp, 1e-6);

    // Two deterministic steps to the right end, payout 100 on arrival.
    CHECK(std::abs(res.value[0] - 90.25) <= 1e-6);
    CHECK(std::abs(res.value[1] - 95.0) <= 1e-6);
    CHECK(std::abs(res.value[2] - 100.0) <= 1e-6);
    CHECK(std::abs(res.value[3]) <= 1e-6);
    CHECK(res.policy.action(0) == 1);
    CHECK(res.policy.action(1) == 1);
    CHECK(res.residual <= 1e-6);

    const std::vector<double> best = oracles::enumerate_optimal(dense);
    for (int s = 0; s < 4; ++s) CHECK(std::abs(res.value[s] - best[s]) <= 2e-6);
}

TEST_CASE("value iteration fixed point of a single absorbing state") {
    oracles::DenseMdp dense;
    dense.gamma = 0.9;
    dense.P = {{{1.0}}};
    dense.R = {{1.0}};
    const FactoredMdp mdp = oracles::make_mdp(dense, 0);
    const ValueIterationResult res = value_iteration(mdp);
    CHECK(std::abs(res.value[0] - 10.0) <= 1e-5);
}

TEST_CASE("greedy ties break toward the lowest action index") {
    // Both actions identical everywhere; from the right end of the corridor
    // they are identical as well.
    const oracles::DenseMdp dense = oracles::corridor_mdp();
    const FactoredMdp mdp = oracles::make_mdp(dense, 0);
    const ValueIterationResult res = value_iteration(mdp);
    CHECK(res.policy.action(2) == 0);
    CHECK(res.policy.action(3) == 0);

    oracles::DenseMdp twin;
    twin.gamma = 0.5;
    twin.P = {{{1.0}}, {{1.0}}, {{1.0}}};
    twin.R = {{2.0, 2.0, 2.0}};
    const ValueIterationResult tied = value_iteration(oracles::make_mdp(twin, 0));
    CHECK(tied.policy.action(0) == 0);
}

TEST_CASE("policy evaluation agrees with value iteration at the optimum") {
    const oracles::DenseMdp dense = oracles::random_mdp(3);
    const FactoredMdp mdp = oracles::make_mdp(dense, 0);
    const ValueIterationResult res = value_iteration(mdp, 1e-8);
    const std::vector<double> evaluated = evaluate_policy(mdp, res.policy, 1e-8);
    for (int s = 0; s < mdp.num_states(); ++s)
        CHECK(std::abs(evaluated[s] - res.value[s]) <= 2e-6);
}

TEST_CASE("value iteration matches exhaustive policy enumeration") {
    for (std::uint64_t seed : {3ull, 11ull, 29ull}) {
        const oracles::DenseMdp dense = oracles::random_mdp(seed);
        const FactoredMdp mdp = oracles::make_mdp(dense, 0);
        const ValueIterationResult res = value_iteration(mdp, 1e-6);
        const std::vector<double> best = oracles::enumerate_optimal(dense);
        for (int s = 0; s < mdp.num_states(); ++s) CHECK(std::abs(res.value[s] - best[s]) <= 2e-6);
    }
}

TEST_CASE("induced chain mixes rows under a stochastic policy") {
    const oracles::DenseMdp dense = oracles::random_mdp(17);
    const FactoredMdp mdp = oracles::make_mdp(dense, 0);
    std::vector<std::vector<double>> rows(mdp.num_states(),
                                          std::vector<double>{0.5, 0.25, 0.25});
    const Policy mixed = Policy::from_distributions(rows);
    const InducedChain chain = induce_chain(mdp, mixed);
    for (int s = 0; s < mdp.num_states(); ++s) {
        std::vector<double> expected(mdp.num_states(), 0.0);
        double reward = 0.0;
        for (int a = 0; a < 3; ++a) {
            for (int t = 0; t < mdp.num_states(); ++t)
                expected[t] += rows[s][a] * dense.P[a][s][t];
            reward += rows[s][a] * dense.R[s][a];
        }
        auto idx = chain.transition.row_indices(s);
        auto val = chain.transition.row_values(s);
        std::vector<double> got(mdp.num_states(), 0.0);
        for (std::size_t i = 0; i < idx.size(); ++i) got[idx[i]] = val[i];
        for (int t = 0; t < mdp.num_states(); ++t) CHECK(std::abs(got[t] - expected[t]) <= 1e-12);
        CHECK(std::abs(chain.reward[s] - reward) <= 1e-12);
    }
}

TEST_CASE("multi-step kernels compose") {
    const oracles::DenseMdp dense = oracles::random_mdp(7);
    const FactoredMdp mdp = oracles::make_mdp(dense, 0);
    const ValueIterationResult res = value_iteration(mdp);
    const InducedChain chain = induce_chain(mdp, res.policy);

    CHECK(max_row_diff(t_step_kernel(chain, 1), chain.transition) == 0.0);
    const SparseMatrix five = t_step_kernel(chain, 5);
    const SparseMatrix composed = t_step_kernel(chain, 2).multiply(t_step_kernel(chain, 3));
    CHECK(max_row_diff(five, composed) <= 1e-8);
    for (int r = 0; r < five.rows(); ++r) CHECK(std::abs(five.row_sum(r) - 1.0) <= 1e-8);
}

TEST_CASE("t-step kernel matches sampled occupancy") {
    const oracles::DenseMdp dense = oracles::random_mdp(23);
    std::vector<int> pi(dense.states(), 1);
    const oracles::Chain reference = chain_under(dense, pi);

    const FactoredMdp mdp = oracles::make_mdp(dense, 0);
    const InducedChain chain = induce_chain(mdp, Policy::deterministic(pi, 3));
    const SparseMatrix k3 = t_step_kernel(chain, 3);

    const std::vector<double> sampled = oracles::mc_t_step_distribution(reference, 0, 3, 200000, 99);
    std::vector<double> exact(dense.states(), 0.0);
    auto idx = k3.row_indices(0);
    auto val = k3.row_values(0);
    for (std::size_t i = 0; i < idx.size(); ++i) exact[idx[i]] = val[i];
    for (int t = 0; t < dense.states(); ++t) CHECK(std::abs(exact[t] - sampled[t]) <= 0.006);
}

TEST_CASE("truncated discounted return matches simulation") {
    // Deterministic corridor, three steps.
    const oracles::DenseMdp corridor = oracles::corridor_mdp();
    std::vector<int> right(corridor.states(), 1);
    const FactoredMdp mdp = oracles::make_mdp(corridor, 0);
    const InducedChain chain = induce_chain(mdp, Policy::deterministic(right, 2));
    const std::vector<double> g3 = truncated_discounted_return(chain, corridor.gamma, 3);
    CHECK(std::abs(g3[0] - 90.25) <= 1e-12);

    const auto est = oracles::mc_truncated_return(chain_under(corridor, right), 0, corridor.gamma,
                                                  3, 1000000, 4);
    CHECK(std::abs(g3[0] - est.mean) <= 3.0 * est.std_error + 1e-9);

    // Stochastic chain.
    const oracles::DenseMdp dense = oracles::random_mdp(5);
    std::vector<int> pi(dense.states(), 2);
    const FactoredMdp mdp2 = oracles::make_mdp(dense, 0);
    const InducedChain chain2 = induce_chain(mdp2, Policy::deterministic(pi, 3));
    const std::vector<double> g4 = truncated_discounted_return(chain2, dense.gamma, 4);
    const auto est2 =
        oracles::mc_truncated_return(chain_under(dense, pi), 0, dense.gamma, 4, 300000, 12);
    CHECK(std::abs(g4[0] - est2.mean) <= 3.0 * est2.std_error + 1e-9);
}

TEST_CASE("bellman residual and action values are consistent") {
    const oracles::DenseMdp dense = oracles::random_mdp(31);
    const FactoredMdp mdp = oracles::make_mdp(dense, 0);
    const ValueIterationResult res = value_iteration(mdp, 1e-9);
    CHECK(bellman_residual(mdp, res.value) <= 1e-9);
    for (int s = 0; s < mdp.num_states(); ++s) {
        const std::vector<double> q = action_values(mdp, res.value, s);
        const double best = *std::max_element(q.begin(), q.end());
        CHECK(std::abs(best - res.value[s]) <= 1e-9);
        CHECK(q[res.policy.action(s)] == best);
    }
}

TEST_CASE("undiscounted problems are rejected") {
    oracles::DenseMdp dense = oracles::corridor_mdp();
    dense.gamma = 1.0;
    const FactoredMdp mdp = oracles::make_mdp(dense, 0);
    CHECK_THROWS_AS(value_iteration(mdp), DiscountOne);
}

TEST_CASE("exhausting the sweep budget raises") {
    const oracles::DenseMdp dense = oracles::random_mdp(9);
    const FactoredMdp mdp = oracles::make_mdp(dense, 0);
    CHECK_THROWS_AS(value_iteration(mdp, 1e-12, 3), NonConvergence);
}

TEST_CASE("reachable enumeration visits states breadth-first and enforces the cap") {
    const std::vector<VariableSpec> vars{{"s", 10, {}}};
    auto expand = [](const StateTuple& x, int) -> std::vector<std::pair<StateTuple, double>> {
        if (x[0] >= 9) return {{x, 1.0}};
        return {{{x[0] + 1}, 1.0}};
    };
    auto reward = [](const StateTuple& x, int) { return x[0] == 9 ? 1.0 : 0.0; };

    const FactoredMdp mdp = build_reachable_mdp(vars, {"step"}, {0}, 0.9, expand, reward);
    CHECK(mdp.num_states() == 10);
    CHECK(mdp.initial_state() == mdp.state_id({0}));
    CHECK(mdp.find_state_id({4}) >= 0);
    CHECK(mdp.find_state_id({11}) == -1);
    for (int s = 0; s < 10; ++s) CHECK(std::abs(mdp.transitions(0).row_sum(s) - 1.0) <= 1e-12);

    CHECK_THROWS_AS(build_reachable_mdp(vars, {"step"}, {0}, 0.9, expand, reward, 3),
                    StateSpaceTooLarge);
}
