#include "epispread/centrality.hpp"

#include <algorithm>
#include <cmath>

#include "epispread/error.hpp"
#include "epispread/parallel.hpp"
#include "epispread/rng.hpp"

namespace epispread {

namespace {

void multiply_adjacency(const Graph& g, const std::vector<double>& x, std::vector<double>& out) {
    const auto n = g.node_count();
    for (NodeId u = 0; u < n; ++u) {
        double s = 0.0;
        for (NodeId v : g.neighbors(u)) s += x[v];
        out[u] = s;
    }
}

}  // namespace

std::vector<double> degree_centrality(const Graph& g) {
    std::vector<double> d(g.node_count());
    for (NodeId u = 0; u < g.node_count(); ++u) d[u] = static_cast<double>(g.degree(u));
    return d;
}

IterativeResult eigenvector_centrality(const Graph& g, double tol, std::size_t max_iter) {
    const auto n = g.node_count();
    IterativeResult res;
    if (n == 0) {
        res.converged = true;
        return res;
    }
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> ax(n), next(n);
    for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
        multiply_adjacency(g, x, ax);
        double lambda = 0.0;
        for (std::size_t i = 0; i < n; ++i) lambda += x[i] * ax[i];
        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(ax[i] - lambda * x[i]));

        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = ax[i] + x[i];
            norm += next[i] * next[i];
        }
        norm = std::sqrt(norm);
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] /= norm;
            diff = std::max(diff, std::abs(next[i] - x[i]));
        }
        res.eigenvalue = lambda;
        if (diff < tol && residual < tol) {
            res.converged = true;
            break;
        }
        x.swap(next);
    }
    res.iterations = std::min(res.iterations, max_iter);
    res.values = std::move(x);
    return res;
}

IterativeResult pagerank(const Graph& g, double damping, double tol, std::size_t max_iter) {
    const auto n = g.node_count();
    IterativeResult res;
    if (n == 0) {
        res.converged = true;
        return res;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> x(n, inv_n), share(n), next(n);
    for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
        double dangling = 0.0;
        for (NodeId u = 0; u < n; ++u) {
            const auto d = g.degree(u);
            if (d == 0) {
                dangling += x[u];
                share[u] = 0.0;
            } else {
                share[u] = x[u] / static_cast<double>(d);
            }
        }
        const double base = (1.0 - damping) * inv_n + damping * dangling * inv_n;
        double change = 0.0;
        for (NodeId v = 0; v < n; ++v) {
            double s = 0.0;
            for (NodeId u : g.neighbors(v)) s += share[u];
            next[v] = base + damping * s;
            change += std::abs(next[v] - x[v]);
        }
        x.swap(next);
        if (change < tol) {
            res.converged = true;
            break;
        }
    }
    res.iterations = std::min(res.iterations, max_iter);
    res.values = std::move(x);
    return res;
}

void WalkConfig::validate() const {
    if (walks_per_node < 1) throw ConfigError("walks per node must be at least 1");
    if (mean_length < 1) throw ConfigError("mean walk length must be at least 1");
}

std::vector<double> average_out_degree(const Graph& g, const WalkConfig& cfg, unsigned threads) {
    cfg.validate();
    const auto n = g.node_count();
    std::vector<double> out(n, 0.0);
    const std::uint64_t span = 2ULL * cfg.mean_length - 1;
    parallel_for(n, threads, [&](std::size_t start) {
        const auto u = static_cast<NodeId>(start);
        if (g.degree(u) == 0) return;
        Rng rng(derive_seed(cfg.rng_seed, 0xa0d, u));
        double total = 0.0;
        std::size_t visited = 0;
        for (std::uint32_t w = 0; w < cfg.walks_per_node; ++w) {
            const std::uint64_t length =
                cfg.length_mode == WalkLength::Fixed ? cfg.mean_length : 1 + uniform_index(rng, span);
            NodeId cur = u;
            for (std::uint64_t step = 0; step < length; ++step) {
                const auto nbrs = g.neighbors(cur);
                if (nbrs.empty()) break;
                cur = nbrs[uniform_index(rng, nbrs.size())];
                total += static_cast<double>(g.degree(cur));
                ++visited;
            }
        }
        out[u] = visited == 0 ? 0.0 : total / static_cast<double>(visited);
    });
    return out;
}

std::vector<double> second_neighbor_column(const Graph& g, unsigned threads) {
    std::vector<double> out(g.node_count());
    parallel_for(g.node_count(), threads, [&](std::size_t u) {
        out[u] = static_cast<double>(second_neighbor_count(g, static_cast<NodeId>(u)));
    });
    return out;
}

bool min_max_normalize(std::vector<double>& column) {
    if (column.empty()) return false;
    const auto [mn, mx] = std::minmax_element(column.begin(), column.end());
    const double lo = *mn, hi = *mx;
    if (!(hi > lo)) {
        std::fill(column.begin(), column.end(), 0.0);
        return false;
    }
    const double range = hi - lo;
    for (auto& v : column) v = (v - lo) / range;
    return true;
}

FeatureBuild build_features(const Graph& g, const WalkConfig& cfg, unsigned threads) {
    cfg.validate();
    if (g.node_count() == 0) throw EmptyInputError("cannot build features for an empty graph");
    FeatureBuild out;

    auto eig = eigenvector_centrality(g);
    if (!eig.converged) {
        out.converged = false;
        out.warnings.push_back("eigenvector centrality did not converge in " +
                               std::to_string(eig.iterations) + " iterations");
    }
    auto pr = pagerank(g);
    if (!pr.converged) {
        out.converged = false;
        out.warnings.push_back("pagerank did not converge in " + std::to_string(pr.iterations) +
                               " iterations");
    }

    auto& m = out.matrix;
    m.add_column("degree", degree_centrality(g));
    m.add_column("eigenvector", std::move(eig.values));
    m.add_column("pagerank", std::move(pr.values));
    m.add_column("avg_out_degree", average_out_degree(g, cfg, threads));
    m.add_column("second_neighbors", second_neighbor_column(g, threads));
    for (std::size_t c = 0; c < m.cols(); ++c) {
        if (!min_max_normalize(m.columns[c]))
            out.warnings.push_back("column '" + m.names[c] + "' is constant; normalised to zero");
    }
    return out;
}

FeatureMatrix random_features(std::size_t node_count, std::size_t dims, std::uint64_t rng_seed) {
    if (node_count == 0) throw EmptyInputError("random features need at least one node");
    FeatureMatrix m;
    Rng rng(derive_seed(rng_seed, 0x7a5d));
    std::vector<std::vector<double>> cols(dims, std::vector<double>(node_count));
    for (std::size_t r = 0; r < node_count; ++r)
        for (std::size_t c = 0; c < dims; ++c) cols[c][r] = uniform01(rng);
    for (std::size_t c = 0; c < dims; ++c) m.add_column("rand_" + std::to_string(c), std::move(cols[c]));
    return m;
}

}  // namespace epispread
