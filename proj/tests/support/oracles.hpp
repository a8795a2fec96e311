#pragma once

// Independent reference implementations used only by the test suites. None
// of these share code paths with the library algorithms they check.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "epispread/graph.hpp"
#include "epispread/rng.hpp"

namespace epispread::oracle {

using Matrix = std::vector<std::vector<int>>;

inline Matrix adjacency_matrix(const Graph& g) {
    const auto n = g.node_count();
    Matrix a(n, std::vector<int>(n, 0));
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v : g.neighbors(u)) a[u][v] = 1;
    return a;
}

// |{w != u : (A^2)[u][w] > 0}|
inline std::size_t second_neighbors_bruteforce(const Matrix& a, std::size_t u) {
    const auto n = a.size();
    std::size_t count = 0;
    for (std::size_t w = 0; w < n; ++w) {
        if (w == u) continue;
        bool reachable = false;
        for (std::size_t v = 0; v < n && !reachable; ++v) reachable = a[u][v] && a[v][w];
        count += reachable ? 1 : 0;
    }
    return count;
}

// Exact law of (peak infected, first peak iteration) for synchronous SIR with
// gamma = 1: every infected node is infectious for exactly one iteration and
// flips one independent beta-coin per susceptible neighbour. All coin outcomes
// are enumerated explicitly. Graphs up to ~10 nodes.
inline std::map<std::pair<int, int>, double> exact_peak_law_gamma1(const Matrix& a, int seed, double beta) {
    const int n = static_cast<int>(a.size());
    struct State {
        unsigned susceptible, infected;
        int peak, peak_time, t;
        double p;
    };
    std::map<std::pair<int, int>, double> law;
    std::vector<State> stack{{((1u << n) - 1) & ~(1u << seed), 1u << seed, 1, 0, 0, 1.0}};
    while (!stack.empty()) {
        const State s = stack.back();
        stack.pop_back();
        if (s.infected == 0) {
            law[{s.peak, s.peak_time}] += s.p;
            continue;
        }
        std::vector<std::pair<int, int>> coins;
        for (int i = 0; i < n; ++i)
            if (s.infected >> i & 1u)
                for (int v = 0; v < n; ++v)
                    if ((s.susceptible >> v & 1u) && a[i][v]) coins.emplace_back(i, v);
        const auto m = coins.size();
        for (std::uint64_t outcome = 0; outcome < (1ULL << m); ++outcome) {
            double p = s.p;
            unsigned newly = 0;
            for (std::size_t c = 0; c < m; ++c) {
                const bool hit = outcome >> c & 1ULL;
                p *= hit ? beta : 1.0 - beta;
                if (hit) newly |= 1u << coins[c].second;
            }
            if (p == 0.0) continue;
            const int count = std::popcount(newly);
            State next{s.susceptible & ~newly, newly, s.peak, s.peak_time, s.t + 1, p};
            if (count > next.peak) {
                next.peak = count;
                next.peak_time = next.t;
            }
            stack.push_back(next);
        }
    }
    return law;
}

// Plain synchronous SIR, one coin per (infected, susceptible neighbour) pair
// and one recovery coin per previously infected node each iteration.
struct NaiveRun {
    std::size_t peak = 0;
    std::uint64_t peak_time = 0;
};

inline NaiveRun naive_sir(const Graph& g, NodeId seed, double beta, double gamma, Rng& rng,
                          std::uint64_t cap = 100000) {
    enum : char { S, I, R };
    std::vector<char> state(g.node_count(), S);
    state[seed] = I;
    std::size_t infected = 1;
    NaiveRun run{1, 0};
    for (std::uint64_t t = 1; t <= cap && infected > 0; ++t) {
        std::vector<char> next = state;
        for (NodeId u = 0; u < g.node_count(); ++u) {
            if (state[u] != I) continue;
            for (NodeId v : g.neighbors(u))
                if (state[v] == S && uniform01(rng) < beta) next[v] = I;
            if (uniform01(rng) < gamma) next[u] = R;
        }
        state.swap(next);
        infected = 0;
        for (char c : state) infected += c == I ? 1 : 0;
        if (infected > run.peak) {
            run.peak = infected;
            run.peak_time = t;
        }
    }
    return run;
}

// Dense Gaussian elimination with partial pivoting; solves M x = b.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> m, std::vector<double> b) {
    const auto n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        std::swap(m[col], m[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= m[i][c] * x[c];
        x[i] = s / m[i][i];
    }
    return x;
}

// PageRank as the solution of (I - d P^T) x = (1 - d)/n + d * dangling/n,
// with dangling columns replaced by the uniform distribution.
inline std::vector<double> pagerank_dense(const Matrix& a, double d) {
    const auto n = a.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    for (std::size_t u = 0; u < n; ++u) {
        int deg = 0;
        for (int x : a[u]) deg += x;
        for (std::size_t v = 0; v < n; ++v) {
            const double p = deg == 0 ? 1.0 / static_cast<double>(n) : a[u][v] / static_cast<double>(deg);
            m[v][u] -= d * p;
        }
    }
    return solve_dense(m, std::vector<double>(n, (1.0 - d) / static_cast<double>(n)));
}

}  // namespace epispread::oracle
