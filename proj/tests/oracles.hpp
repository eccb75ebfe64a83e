#pragma once

// Reference computations used to pin expected values. Everything here works on
// plain dense tables, evaluates policies by direct linear solves, and samples
// with the standard mt19937_64 engine. None of it touches the library solvers,
// so agreement between the two is evidence rather than tautology.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "attnplan/mdp.hpp"

namespace oracles {

// Dense MDP tables: P[a][s][s'] and R[s][a].
struct DenseMdp {
    std::vector<std::vector<std::vector<double>>> P;
    std::vector<std::vector<double>> R;
    double gamma = 0.95;

    int states() const { return static_cast<int>(R.size()); }
    int actions() const { return static_cast<int>(P.size()); }
};

// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        if (std::abs(a[col][col]) < 1e-14) throw std::runtime_error("singular system");
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

// Exact value of a deterministic policy: (I - gamma P_pi) V = r_pi.
inline std::vector<double> evaluate(const DenseMdp& m, const std::vector<int>& pi) {
    const int n = m.states();
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n);
    for (int s = 0; s < n; ++s) {
        for (int t = 0; t < n; ++t) a[s][t] = -m.gamma * m.P[pi[s]][s][t];
        a[s][s] += 1.0;
        b[s] = m.R[s][pi[s]];
    }
    return solve_linear(std::move(a), std::move(b));
}

// Element-wise best value over every deterministic policy. A single policy
// attains the maximum at all states simultaneously, so this is the optimal
// value function.
inline std::vector<double> enumerate_optimal(const DenseMdp& m) {
    const int n = m.states();
    const int na = m.actions();
    std::vector<int> pi(n, 0);
    std::vector<double> best(n, -1e300);
    while (true) {
        const std::vector<double> v = evaluate(m, pi);
        for (int s = 0; s < n; ++s) best[s] = std::max(best[s], v[s]);
        int pos = 0;
        while (pos < n && ++pi[pos] == na) pi[pos++] = 0;
        if (pos == n) break;
    }
    return best;
}

// Markov chain with per-state rewards.
struct Chain {
    std::vector<std::vector<double>> P;
    std::vector<double> r;
};

inline int walk_step(const std::vector<double>& row, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double cut = u(rng);
    for (std::size_t t = 0; t < row.size(); ++t) {
        cut -= row[t];
        if (cut < 0.0) return static_cast<int>(t);
    }
    return static_cast<int>(row.size()) - 1;
}

// Sampled distribution of the chain state after exactly t steps.
inline std::vector<double> mc_t_step_distribution(const Chain& c, int start, int t, int samples,
                                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> freq(c.P.size(), 0.0);
    for (int i = 0; i < samples; ++i) {
        int s = start;
        for (int step = 0; step < t; ++step) s = walk_step(c.P[s], rng);
        freq[s] += 1.0;
    }
    for (double& f : freq) f /= samples;
    return freq;
}

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

// Sampled truncated discounted return sum_{j=0}^{t-1} gamma^j r(s_j).
inline McEstimate mc_truncated_return(const Chain& c, int start, double gamma, int t, int samples,
                                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < samples; ++i) {
        int s = start;
        double total = 0.0;
        double scale = 1.0;
        for (int step = 0; step < t; ++step) {
            total += scale * c.r[s];
            scale *= gamma;
            s = walk_step(c.P[s], rng);
        }
        sum += total;
        sum_sq += total * total;
    }
    McEstimate est;
    est.mean = sum / samples;
    const double var = std::max(0.0, sum_sq / samples - est.mean * est.mean);
    est.std_error = std::sqrt(var / samples);
    return est;
}

// Dense copy of a library model, for feeding compiled fixtures to the oracle.
inline DenseMdp densify(const attnplan::FactoredMdp& mdp) {
    DenseMdp m;
    m.gamma = mdp.discount();
    const int n = mdp.num_states();
    const int na = mdp.num_actions();
    m.P.assign(na, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
    m.R.assign(n, std::vector<double>(na, 0.0));
    for (int a = 0; a < na; ++a) {
        const attnplan::SparseMatrix& t = mdp.transitions(a);
        for (int s = 0; s < n; ++s) {
            auto idx = t.row_indices(s);
            auto val = t.row_values(s);
            for (std::size_t i = 0; i < idx.size(); ++i) m.P[a][s][idx[i]] = val[i];
            m.R[s][a] = mdp.reward(s, a);
        }
    }
    return m;
}

// Library MDP over a single enumerated variable, built from dense tables.
inline attnplan::FactoredMdp make_mdp(const DenseMdp& m, int initial,
                                      std::vector<std::string> action_names = {}) {
    using namespace attnplan;
    const int n = m.states();
    const int na = m.actions();
    if (action_names.empty())
        for (int a = 0; a < na; ++a) action_names.push_back("a" + std::to_string(a));
    std::vector<VariableSpec> vars{{"s", n, {}}};
    std::vector<StateTuple> states;
    for (int s = 0; s < n; ++s) states.push_back({s});
    std::vector<SparseMatrix> transitions;
    for (int a = 0; a < na; ++a) {
        std::vector<std::vector<std::pair<int, double>>> rows(n);
        for (int s = 0; s < n; ++s)
            for (int t = 0; t < n; ++t)
                if (m.P[a][s][t] != 0.0) rows[s].emplace_back(t, m.P[a][s][t]);
        transitions.push_back(SparseMatrix::from_rows(std::move(rows), n));
    }
    std::vector<double> reward(static_cast<std::size_t>(n) * na);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < na; ++a) reward[static_cast<std::size_t>(s) * na + a] = m.R[s][a];
    return FactoredMdp(std::move(vars), std::move(states), std::move(action_names),
                       std::move(transitions), std::move(reward), initial, m.gamma);
}

// Shared fixtures.

// 3-cell corridor with a terminal sink: actions {left, right}, moving is
// deterministic and clamped, any action from the right end pays 100 and falls
// into the sink.
inline DenseMdp corridor_mdp(double gamma = 0.95) {
    DenseMdp m;
    m.gamma = gamma;
    const int n = 4; // 0 left, 1 middle, 2 right, 3 sink
    m.P.assign(2, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
    m.R.assign(n, std::vector<double>(2, 0.0));
    auto clamp = [](int s) { return s < 0 ? 0 : (s > 2 ? 2 : s); };
    for (int s = 0; s < 3; ++s) {
        m.P[0][s][clamp(s - 1)] = 1.0;
        m.P[1][s][clamp(s + 1)] = 1.0;
    }
    for (int a = 0; a < 2; ++a) {
        m.P[a][2] = {0.0, 0.0, 0.0, 1.0};
        m.P[a][3] = {0.0, 0.0, 0.0, 1.0};
        m.R[2][a] = 100.0;
    }
    return m;
}

// 5-state, 3-action MDP with pseudo-random stochastic rows; deterministic
// construction from the seed.
inline DenseMdp random_mdp(std::uint64_t seed, double gamma = 0.9) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    DenseMdp m;
    m.gamma = gamma;
    const int n = 5;
    const int na = 3;
    m.P.assign(na, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
    m.R.assign(n, std::vector<double>(na, 0.0));
    for (int a = 0; a < na; ++a)
        for (int s = 0; s < n; ++s) {
            double total = 0.0;
            for (int t = 0; t < n; ++t) {
                m.P[a][s][t] = u(rng);
                total += m.P[a][s][t];
            }
            for (int t = 0; t < n; ++t) m.P[a][s][t] /= total;
            m.R[s][a] = 10.0 * u(rng) - 3.0;
        }
    return m;
}

} // namespace oracles
