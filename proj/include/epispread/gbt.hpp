#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "epispread/feature_matrix.hpp"

namespace epispread {

struct GbtConfig {
    std::uint32_t n_trees = 100;
    double learning_rate = 0.3;
    std::uint32_t max_depth = 6;
    double lambda_l2 = 1.0;
    double min_child_weight = 1.0;
    double gamma_split = 0.0;  // minimum gain required to split
    double subsample = 1.0;
    std::uint64_t rng_seed = 0;

    void validate() const;
    bool operator==(const GbtConfig&) const = default;
};

struct TreeNode {
    // Internal nodes: feature >= 0, rows with value < threshold go left.
    std::int32_t feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    // Leaves
    double weight = 0.0;
    // Sum of hessians of the training rows that reached this node.
    double cover = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

// Flat binary tree, root at index 0.
struct Tree {
    std::vector<TreeNode> nodes;

    // Index of the leaf reached by a row, given a feature accessor.
    template <typename Get>
    std::size_t leaf_index(Get&& value_of) const {
        std::size_t at = 0;
        while (!nodes[at].is_leaf()) {
            const auto& node = nodes[at];
            at = static_cast<std::size_t>(value_of(static_cast<std::size_t>(node.feature)) < node.threshold
                                              ? node.left
                                              : node.right);
        }
        return at;
    }

    bool operator==(const Tree&) const = default;
};

struct TrainingMeta {
    std::size_t n_samples = 0;
    double final_train_rmse = 0.0;
    std::vector<double> train_rmse_per_tree;

    bool operator==(const TrainingMeta&) const = default;
};

class GbtModel {
public:
    double base_score = 0.0;
    std::vector<Tree> trees;
    std::vector<std::string> feature_names;
    GbtConfig config;
    TrainingMeta training;

    // Raw output, not clamped. Columns are matched by name; extra columns
    // are ignored. Throws SchemaError naming the first missing column.
    std::vector<double> predict(const FeatureMatrix& features) const;

    // Total split gain per entry of feature_names.
    std::vector<double> feature_importance() const;

    std::string to_json() const;
    static GbtModel from_json(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static GbtModel load(const std::filesystem::path& path);

    bool operator==(const GbtModel&) const = default;
};

inline constexpr int kGbtSchemaVersion = 1;

// Second-order gradient boosting with squared loss and exact greedy splits.
// Candidate thresholds are midpoints between consecutive distinct values.
// Ties in gain go to the lowest feature index, then the lowest threshold.
GbtModel train_gbt(const FeatureMatrix& features, std::span<const double> targets, const GbtConfig& cfg);

}  // namespace epispread
