#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epispread/centrality.hpp"
#include "epispread/error.hpp"
#include "epispread/generators.hpp"
#include "oracles.hpp"

using namespace epispread;

namespace {

Graph from_pairs(std::uint32_t n, std::vector<std::pair<NodeId, NodeId>> edges) {
    return Graph::from_edges(n, edges);
}

double max_residual(const Graph& g, const IterativeResult& r) {
    double worst = 0.0;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        double ax = 0.0;
        for (auto v : g.neighbors(u)) ax += r.values[v];
        worst = std::max(worst, std::abs(ax - r.eigenvalue * r.values[u]));
    }
    return worst;
}

// Expected mean visited degree of walks from u: E[sum of degrees] / E[steps],
// from powers of the dense transition matrix.
double expected_walk_degree(const oracle::Matrix& a, std::size_t u, std::uint32_t mean_length, bool fixed) {
    const auto n = a.size();
    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) deg[i] = std::accumulate(a[i].begin(), a[i].end(), 0.0);
    if (deg[u] == 0.0) return 0.0;
    const std::uint32_t max_len = fixed ? mean_length : 2 * mean_length - 1;
    // prefix[t] = sum_{s=1..t} E[deg at step s]
    std::vector<double> dist(n, 0.0), prefix(max_len + 1, 0.0);
    dist[u] = 1.0;
    for (std::uint32_t t = 1; t <= max_len; ++t) {
        std::vector<double> next(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            if (dist[i] > 0.0)
                for (std::size_t j = 0; j < n; ++j)
                    if (a[i][j]) next[j] += dist[i] / deg[i];
        dist = next;
        double e = 0.0;
        for (std::size_t j = 0; j < n; ++j) e += dist[j] * deg[j];
        prefix[t] = prefix[t - 1] + e;
    }
    if (fixed) return prefix[max_len] / max_len;
    double total = 0.0, steps = 0.0;
    for (std::uint32_t len = 1; len <= max_len; ++len) {
        total += prefix[len];
        steps += len;
    }
    return total / steps;
}

}  // namespace

TEST_CASE("degree centrality") {
    const auto g = generators::star(4);
    const auto d = degree_centrality(g);
    CHECK(d[0] == 4.0);
    for (int i = 1; i <= 4; ++i) CHECK(d[i] == 1.0);
}

TEST_CASE("eigenvector centrality on small graphs") {
    SUBCASE("triangle") {
        const auto r = eigenvector_centrality(generators::complete(3));
        CHECK(r.converged);
        for (double x : r.values) CHECK(x == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-6));
        CHECK(r.eigenvalue == doctest::Approx(2.0).epsilon(1e-6));
    }
    SUBCASE("path of three is bipartite") {
        const auto r = eigenvector_centrality(generators::path(3));
        CHECK(r.converged);
        CHECK(r.values[1] / r.values[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
        CHECK(r.values[0] == doctest::Approx(r.values[2]).epsilon(1e-9));
    }
    SUBCASE("star") {
        const auto r = eigenvector_centrality(generators::star(5));
        CHECK(r.converged);
        CHECK(r.values[0] / r.values[1] == doctest::Approx(std::sqrt(5.0)).epsilon(1e-5));
    }
    SUBCASE("long path needs more than a handful of iterations") {
        const auto r = eigenvector_centrality(generators::path(300), 1e-6, 5);
        CHECK_FALSE(r.converged);
        CHECK(r.iterations == 5);
    }
}

TEST_CASE("eigenvector residual is small on random graphs") {
    for (std::uint64_t s = 0; s < 30; ++s) {
        const auto g = s % 2 ? generators::erdos_renyi(40, 0.1, s) : generators::preferential_attachment(60, 120, s);
        const auto r = eigenvector_centrality(g);
        CHECK(r.converged);
        CHECK(max_residual(g, r) < 1e-5);
    }
}

TEST_CASE("eigenvector centrality agrees with a dense eigensolver") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto g = generators::preferential_attachment(30, 60, 100 + s);
        const auto a = oracle::adjacency_matrix(g);
        Eigen::MatrixXd m(30, 30);
        for (int i = 0; i < 30; ++i)
            for (int j = 0; j < 30; ++j) m(i, j) = a[i][j];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        Eigen::VectorXd v = es.eigenvectors().col(29);
        if (v.sum() < 0) v = -v;
        const auto r = eigenvector_centrality(g, 1e-10, 100000);
        REQUIRE(r.converged);
        CHECK(r.eigenvalue == doctest::Approx(es.eigenvalues()(29)).epsilon(1e-8));
        for (int i = 0; i < 30; ++i) CHECK(r.values[i] == doctest::Approx(v(i)).epsilon(1e-6));
    }
}

TEST_CASE("pagerank") {
    SUBCASE("triangle is uniform") {
        const auto r = pagerank(generators::complete(3));
        for (double x : r.values) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    }
    SUBCASE("isolated nodes share mass") {
        const auto r = pagerank(generators::empty(2));
        CHECK(r.values[0] == doctest::Approx(0.5));
        CHECK(r.values[1] == doctest::Approx(0.5));
    }
    SUBCASE("star closed form") {
        // centre c, leaf l with k leaves: c = (1-d)/(k+1) + d*k*l, l = (1-d)/(k+1) + d*c/k
        const double d = 0.85;
        const int k = 6;
        const double base = (1 - d) / (k + 1);
        const double c = (base + d * k * base) / (1 - d * d);
        const auto r = pagerank(generators::star(k), d, 1e-12, 10000);
        CHECK(r.values[0] == doctest::Approx(c).epsilon(1e-9));
    }
    SUBCASE("matches a dense linear solve and sums to one") {
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto g = generators::erdos_renyi(30, 0.08, s);
            const auto r = pagerank(g, 0.85, 1e-12, 10000);
            const auto ref = oracle::pagerank_dense(oracle::adjacency_matrix(g), 0.85);
            double sum = 0.0;
            for (std::size_t i = 0; i < 30; ++i) {
                CHECK(r.values[i] == doctest::Approx(ref[i]).epsilon(1e-8));
                sum += r.values[i];
            }
            CHECK(std::abs(sum - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("average out degree") {
    WalkConfig cfg;
    cfg.rng_seed = 9;
    SUBCASE("complete graph") {
        for (double x : average_out_degree(generators::complete(3), cfg)) CHECK(x == 2.0);
    }
    SUBCASE("isolated node is zero") {
        const auto v = average_out_degree(from_pairs(3, {{0, 1}}), cfg);
        CHECK(v[2] == 0.0);
        CHECK(v[0] == 1.0);
    }
    SUBCASE("single step from the star centre sees only leaves") {
        cfg.mean_length = 1;
        CHECK(average_out_degree(generators::star(7), cfg)[0] == 1.0);
    }
    SUBCASE("regular graphs give the degree exactly") {
        for (std::uint32_t d : {2u, 3u, 4u}) {
            const auto v = average_out_degree(generators::random_regular(40, d, d), cfg);
            for (double x : v) CHECK(x == static_cast<double>(d));
        }
    }
    SUBCASE("invalid configs") {
        cfg.walks_per_node = 0;
        CHECK_THROWS_AS(average_out_degree(generators::path(3), cfg), ConfigError);
        cfg.walks_per_node = 10;
        cfg.mean_length = 0;
        CHECK_THROWS_AS(average_out_degree(generators::path(3), cfg), ConfigError);
    }
}

TEST_CASE("average out degree converges to the walk expectation") {
    const auto g = generators::preferential_attachment(30, 55, 4);
    const auto a = oracle::adjacency_matrix(g);
    for (bool fixed : {true, false}) {
        WalkConfig cfg;
        cfg.walks_per_node = 40000;
        cfg.length_mode = fixed ? WalkLength::Fixed : WalkLength::Uniform;
        cfg.rng_seed = 17;
        const auto v = average_out_degree(g, cfg, 2);
        for (std::size_t u = 0; u < 30; ++u) {
            const double want = expected_walk_degree(a, u, cfg.mean_length, fixed);
            CHECK(v[u] == doctest::Approx(want).epsilon(0.03));
        }
    }
}

TEST_CASE("second neighbour column matches the brute force count") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto g = generators::erdos_renyi(30, 0.1, 50 + s);
        const auto a = oracle::adjacency_matrix(g);
        const auto col = second_neighbor_column(g, 3);
        for (std::size_t u = 0; u < 30; ++u)
            CHECK(col[u] == static_cast<double>(oracle::second_neighbors_bruteforce(a, u)));
    }
}

TEST_CASE("min-max normalisation") {
    std::vector<double> v{2.0, 4.0, 3.0};
    CHECK(min_max_normalize(v));
    CHECK(v == std::vector<double>{0.0, 1.0, 0.5});
    std::vector<double> c{5.0, 5.0};
    CHECK_FALSE(min_max_normalize(c));
    CHECK(c == std::vector<double>{0.0, 0.0});
}

TEST_CASE("feature build") {
    WalkConfig cfg;
    SUBCASE("triangle is constant in every column") {
        const auto fb = build_features(generators::complete(3), cfg);
        CHECK(fb.matrix.cols() == 5);
        CHECK(fb.warnings.size() == 5);
        for (const auto& col : fb.matrix.columns)
            for (double x : col) CHECK(x == 0.0);
    }
    SUBCASE("star degree column") {
        const auto fb = build_features(generators::star(4), cfg);
        const auto& deg = fb.matrix.columns[*fb.matrix.find("degree")];
        CHECK(deg[0] == 1.0);
        for (int i = 1; i <= 4; ++i) CHECK(deg[i] == 0.0);
        CHECK(fb.matrix.raw_max[*fb.matrix.find("degree")] == 4.0);
        CHECK(fb.matrix.raw_min[*fb.matrix.find("degree")] == 1.0);
    }
    SUBCASE("path eigenvector column") {
        const auto fb = build_features(generators::path(3), cfg);
        const auto& ev = fb.matrix.columns[*fb.matrix.find("eigenvector")];
        CHECK(ev[1] == doctest::Approx(1.0));
        CHECK(ev[0] == doctest::Approx(0.0));
        CHECK(ev[2] == doctest::Approx(0.0));
    }
    SUBCASE("columns in range and order") {
        const auto fb = build_features(generators::preferential_attachment(200, 500, 3), cfg);
        for (std::size_t c = 0; c < 5; ++c) CHECK(fb.matrix.names[c] == kCentralityColumns[c]);
        for (const auto& col : fb.matrix.columns)
            for (double x : col) CHECK((x >= 0.0 && x <= 1.0));
    }
    SUBCASE("thread count does not change the result") {
        const auto g = generators::preferential_attachment(300, 900, 8);
        const auto one = build_features(g, cfg, 1);
        for (unsigned t : {2u, 5u}) CHECK(build_features(g, cfg, t).matrix.columns == one.matrix.columns);
    }
}

TEST_CASE("random features") {
    const auto m = random_features(3, 64, 1);
    CHECK(m.rows() == 3);
    CHECK(m.cols() == 64);
    CHECK(m.names.front() == "rand_0");
    CHECK(m.names.back() == "rand_63");
    CHECK(random_features(3, 64, 1).columns == m.columns);
    CHECK(random_features(3, 64, 2).columns != m.columns);

    const auto big = random_features(1000000, 1, 5);
    double sum = 0.0;
    for (double x : big.columns[0]) {
        CHECK_FALSE((x < 0.0 || x >= 1.0));
        sum += x;
    }
    CHECK(std::abs(sum / 1e6 - 0.5) < 0.002);
    CHECK_THROWS_AS(random_features(0, 64, 1), EmptyInputError);
}
