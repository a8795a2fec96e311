#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "epispread/feature_matrix.hpp"
#include "epispread/gbt.hpp"
#include "epispread/graph.hpp"
#include "epispread/sir.hpp"

namespace epispread {

double rmse(std::span<const double> pred, std::span<const double> truth);

// Fits on (train_x, train_y) and predicts test_x.
struct Learner {
    std::string name;
    std::function<std::vector<double>(const FeatureMatrix&, std::span<const double>, const FeatureMatrix&)>
        fit_predict;
};

Learner gbt_learner(const GbtConfig& cfg, std::string name = "caboost");
Learner mean_learner();

// Seeded shuffle of 0..n-1 cut into k contiguous folds whose sizes differ by
// at most one.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::uint32_t k, std::uint64_t seed);

struct CvResult {
    std::vector<double> fold_rmse;
    double mean = 0.0;
    double std = 0.0;  // population standard deviation across folds
};

CvResult cross_validate(const FeatureMatrix& features, std::span<const double> targets, const Learner& learner,
                        std::uint32_t k, std::uint64_t seed, unsigned threads = 1);

enum class TargetKind { Peak, Time };
const char* to_string(TargetKind kind);
TargetKind target_kind_from_string(const std::string& s);

struct CvOptions {
    std::uint32_t k = 5;
    std::uint64_t seed = 0;
    GbtConfig gbt;
    unsigned threads = 1;
};

struct CvEntry {
    TargetKind target;
    std::string learner;
    CvResult result;
};

struct CvReport {
    std::string network;
    std::vector<CvEntry> entries;  // ordered peak/time x caboost/random
    std::uint32_t k = 5;
    std::uint64_t seed = 0;
    SimulationError simulation_error;
    std::size_t nodes = 0;

    const CvEntry& at(TargetKind target, const std::string& learner) const;
};

CvReport cv_report(const std::string& network, const FeatureMatrix& centrality, const FeatureMatrix& random,
                   std::span<const double> peak, std::span<const double> time,
                   const SimulationError& sim_error, const CvOptions& options);

struct TransferNetwork {
    std::string name;
    FeatureMatrix features;  // normalised on this network
    std::vector<double> peak;
    std::vector<double> time;

    const std::vector<double>& target(TargetKind kind) const { return kind == TargetKind::Peak ? peak : time; }
};

// values[row][col]: row = training network, col = test network. Diagonal
// holds the k-fold CV RMSE of the network; off-diagonal cells hold the RMSE
// of the row model on every node of the column network divided by that
// column's diagonal.
struct TransferMatrix {
    TargetKind target = TargetKind::Peak;
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> raw_rmse;
};

TransferMatrix transfer_evaluate(std::span<const TransferNetwork> networks, TargetKind target,
                                 const CvOptions& options);

// Counts of values in `bins` equal-width bins over [0, 1]; values outside
// are clamped to the end bins.
std::vector<std::size_t> histogram(std::span<const double> values, std::size_t bins = 100);

std::vector<std::size_t> largest_component_nodes(const Graph& g);

struct ComponentView {
    std::vector<std::size_t> nodes;
    std::vector<std::string> labels;
    FeatureMatrix features;
    std::vector<double> peak;
    std::vector<double> time;
    double time_norm = 1.0;       // whole-network constant
    std::size_t network_nodes = 0; // whole-network node count
};

// Restricts targets and features to the largest connected component,
// keeping the whole-network normalisation constants.
ComponentView component_filter(const Graph& g, const TargetTable& targets, const FeatureMatrix& features);

}  // namespace epispread
