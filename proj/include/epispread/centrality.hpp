#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epispread/feature_matrix.hpp"
#include "epispread/graph.hpp"

namespace epispread {

inline constexpr const char* kCentralityColumns[] = {
    "degree", "eigenvector", "pagerank", "avg_out_degree", "second_neighbors"};

struct IterativeResult {
    std::vector<double> values;
    std::size_t iterations = 0;
    bool converged = false;
    double eigenvalue = 0.0;  // Rayleigh quotient; eigenvector centrality only
};

std::vector<double> degree_centrality(const Graph& g);

// Power iteration on A + I from the uniform vector, L2-normalised each
// step. The identity shift leaves the eigenvectors unchanged but makes the
// dominant one strictly dominant on bipartite graphs, where plain power
// iteration oscillates. Stops once successive iterates differ by less than
// `tol` in max-norm and the residual |Ax - lambda x|_inf is below `tol`.
IterativeResult eigenvector_centrality(const Graph& g, double tol = 1e-6, std::size_t max_iter = 1000);

// Damped PageRank on the undirected graph. Mass of degree-0 nodes is spread
// uniformly, so the result always sums to one.
IterativeResult pagerank(const Graph& g, double damping = 0.85, double tol = 1e-6,
                         std::size_t max_iter = 200);

enum class WalkLength { Uniform, Fixed };

struct WalkConfig {
    std::uint32_t walks_per_node = 10;
    std::uint32_t mean_length = 5;
    WalkLength length_mode = WalkLength::Uniform;  // Uniform draws from {1, ..., 2*mean-1}
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// Mean degree of the nodes visited by random walks from each node, start
// position excluded. Zero for isolated nodes.
std::vector<double> average_out_degree(const Graph& g, const WalkConfig& cfg, unsigned threads = 1);

std::vector<double> second_neighbor_column(const Graph& g, unsigned threads = 1);

// In-place min-max scaling to [0, 1]. Returns false, leaving all zeros,
// when the column is constant.
bool min_max_normalize(std::vector<double>& column);

struct FeatureBuild {
    FeatureMatrix matrix;
    std::vector<std::string> warnings;
    bool converged = true;  // false if either iterative centrality hit its cap
};

FeatureBuild build_features(const Graph& g, const WalkConfig& cfg, unsigned threads = 1);

// node_count x dims matrix of Unif[0, 1) values named rand_0..rand_{dims-1}.
FeatureMatrix random_features(std::size_t node_count, std::size_t dims, std::uint64_t rng_seed);

}  // namespace epispread
