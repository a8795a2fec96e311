#include "epispread/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "epispread/error.hpp"
#include "epispread/rng.hpp"

namespace epispread {

using nlohmann::json;

void GbtConfig::validate() const {
    if (n_trees < 1) throw ConfigError("n_trees must be at least 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ConfigError("learning_rate must lie in (0, 1]");
    if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
    if (!(lambda_l2 >= 0.0)) throw ConfigError("lambda must be non-negative");
    if (!(min_child_weight >= 0.0)) throw ConfigError("min_child_weight must be non-negative");
    if (!(gamma_split >= 0.0)) throw ConfigError("gamma_split must be non-negative");
    if (!(subsample > 0.0 && subsample <= 1.0)) throw ConfigError("subsample must lie in (0, 1]");
}

namespace {

struct Split {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

struct Scan {
    double g_left = 0.0;
    double h_left = 0.0;
    double last = 0.0;
    bool has_last = false;
};

double midpoint(double a, double b) {
    const double m = a + (b - a) / 2.0;
    return m > a ? m : b;
}

double leaf_weight(double g, double h, double lambda) { return -g / (h + lambda); }

double score(double g, double h, double lambda) { return g * g / (h + lambda); }

// Mean computed as an offset from the first element so that constant
// input yields that constant exactly.
double exact_mean(std::span<const double> y) {
    double offset = 0.0;
    for (double v : y) offset += v - y.front();
    return y.front() + offset / static_cast<double>(y.size());
}

double rmse_of(const std::vector<double>& pred, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (pred[i] - y[i]) * (pred[i] - y[i]);
    return std::sqrt(s / static_cast<double>(y.size()));
}

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& x, const std::vector<std::vector<std::size_t>>& sorted,
                const GbtConfig& cfg)
        : x_(x), sorted_(sorted), cfg_(cfg) {}

    Tree build(const std::vector<double>& grad, const std::vector<double>& hess,
               const std::vector<bool>& in_bag) {
        const auto n = grad.size();
        Tree tree;
        node_of_.assign(n, -1);
        TreeNode root;
        double g = 0.0, h = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_bag[i]) continue;
            node_of_[i] = 0;
            g += grad[i];
            h += hess[i];
        }
        root.cover = h;
        tree.nodes.push_back(root);
        sums_.assign(1, {g, h});

        std::vector<std::int32_t> frontier{0};
        for (std::uint32_t depth = 0; depth < cfg_.max_depth && !frontier.empty(); ++depth) {
            auto splits = find_splits(tree, frontier, grad, hess);
            std::vector<std::int32_t> next;
            for (std::size_t s = 0; s < frontier.size(); ++s) {
                if (!splits[s].found) continue;
                const auto id = frontier[s];
                const auto left = static_cast<std::int32_t>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                sums_.resize(tree.nodes.size(), {0.0, 0.0});
                auto& node = tree.nodes[static_cast<std::size_t>(id)];
                node.feature = static_cast<std::int32_t>(splits[s].feature);
                node.threshold = splits[s].threshold;
                node.gain = splits[s].gain;
                node.left = left;
                node.right = left + 1;
                next.push_back(left);
                next.push_back(left + 1);
            }
            // Route rows of split nodes to their children.
            for (std::size_t i = 0; i < n; ++i) {
                const auto id = node_of_[i];
                if (id < 0) continue;
                const auto& node = tree.nodes[static_cast<std::size_t>(id)];
                if (node.is_leaf()) continue;
                const auto child = x_.columns[static_cast<std::size_t>(node.feature)][i] < node.threshold
                                       ? node.left
                                       : node.right;
                node_of_[i] = child;
                sums_[static_cast<std::size_t>(child)].first += grad[i];
                sums_[static_cast<std::size_t>(child)].second += hess[i];
            }
            for (auto id : next) tree.nodes[static_cast<std::size_t>(id)].cover = sums_[static_cast<std::size_t>(id)].second;
            frontier = std::move(next);
        }
        for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
            auto& node = tree.nodes[id];
            if (node.is_leaf()) node.weight = leaf_weight(sums_[id].first, sums_[id].second, cfg_.lambda_l2);
        }
        return tree;
    }

private:
    std::vector<Split> find_splits(const Tree& tree, const std::vector<std::int32_t>& frontier,
                                   const std::vector<double>& grad, const std::vector<double>& hess) {
        std::vector<int> slot_of(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < frontier.size(); ++s) slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
        std::vector<Split> best(frontier.size());
        std::vector<Scan> scan(frontier.size());
        const double lambda = cfg_.lambda_l2;

        for (std::size_t f = 0; f < x_.cols(); ++f) {
            std::fill(scan.begin(), scan.end(), Scan{});
            const auto& col = x_.columns[f];
            for (std::size_t i : sorted_[f]) {
                const auto id = node_of_[i];
                if (id < 0) continue;
                const int slot = slot_of[static_cast<std::size_t>(id)];
                if (slot < 0) continue;
                auto& st = scan[static_cast<std::size_t>(slot)];
                const double v = col[i];
                if (st.has_last && v > st.last) {
                    const auto [g, h] = sums_[static_cast<std::size_t>(id)];
                    const double gr = g - st.g_left;
                    const double hr = h - st.h_left;
                    if (st.h_left >= cfg_.min_child_weight && hr >= cfg_.min_child_weight) {
                        const double gain = 0.5 * (score(st.g_left, st.h_left, lambda) + score(gr, hr, lambda) -
                                                   score(g, h, lambda)) -
                                            cfg_.gamma_split;
                        auto& b = best[static_cast<std::size_t>(slot)];
                        if (gain > 0.0 && (!b.found || gain > b.gain)) {
                            b = {true, f, midpoint(st.last, v), gain};
                        }
                    }
                }
                st.g_left += grad[i];
                st.h_left += hess[i];
                st.last = v;
                st.has_last = true;
            }
        }
        return best;
    }

    const FeatureMatrix& x_;
    const std::vector<std::vector<std::size_t>>& sorted_;
    const GbtConfig& cfg_;
    std::vector<std::int32_t> node_of_;
    std::vector<std::pair<double, double>> sums_;
};

}  // namespace

GbtModel train_gbt(const FeatureMatrix& features, std::span<const double> targets, const GbtConfig& cfg) {
    cfg.validate();
    const auto n = targets.size();
    if (n == 0 || features.cols() == 0) throw Error("training needs at least one sample and one feature");
    if (features.rows() != n)
        throw SchemaError("feature rows (" + std::to_string(features.rows()) + ") do not match targets (" +
                          std::to_string(n) + ")");
    for (double y : targets)
        if (!std::isfinite(y)) throw Error("targets contain NaN or infinite values");
    for (std::size_t c = 0; c < features.cols(); ++c)
        for (double v : features.columns[c])
            if (!std::isfinite(v)) throw Error("feature '" + features.names[c] + "' contains NaN or infinite values");

    std::vector<std::vector<std::size_t>> sorted(features.cols());
    for (std::size_t c = 0; c < features.cols(); ++c) {
        auto& order = sorted[c];
        order.resize(n);
        std::iota(order.begin(), order.end(), 0);
        const auto& col = features.columns[c];
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
    }

    GbtModel model;
    model.config = cfg;
    model.feature_names = features.names;
    model.base_score = exact_mean(targets);
    model.training.n_samples = n;

    std::vector<double> pred(n, model.base_score), grad(n), hess(n, 1.0);
    std::vector<bool> in_bag(n, true);
    Rng rng(derive_seed(cfg.rng_seed, 0x6b7));
    TreeBuilder builder(features, sorted, cfg);

    for (std::uint32_t t = 0; t < cfg.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) grad[i] = pred[i] - targets[i];
        if (cfg.subsample < 1.0)
            for (std::size_t i = 0; i < n; ++i) in_bag[i] = uniform01(rng) < cfg.subsample;
        auto tree = builder.build(grad, hess, in_bag);
        for (std::size_t i = 0; i < n; ++i) {
            const auto leaf = tree.leaf_index([&](std::size_t f) { return features.columns[f][i]; });
            pred[i] += cfg.learning_rate * tree.nodes[leaf].weight;
        }
        model.trees.push_back(std::move(tree));
        model.training.train_rmse_per_tree.push_back(rmse_of(pred, targets));
    }
    model.training.final_train_rmse = model.training.train_rmse_per_tree.back();
    return model;
}

std::vector<double> GbtModel::predict(const FeatureMatrix& features) const {
    std::vector<const std::vector<double>*> cols;
    cols.reserve(feature_names.size());
    for (const auto& name : feature_names) {
        const auto idx = features.find(name);
        if (!idx) throw SchemaError("missing feature column '" + name + "'");
        cols.push_back(&features.columns[*idx]);
    }
    const auto n = features.rows();
    std::vector<double> out(n, base_score);
    for (const auto& tree : trees) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto leaf = tree.leaf_index([&](std::size_t f) { return (*cols[f])[i]; });
            out[i] += config.learning_rate * tree.nodes[leaf].weight;
        }
    }
    return out;
}

std::vector<double> GbtModel::feature_importance() const {
    std::vector<double> gain(feature_names.size(), 0.0);
    for (const auto& tree : trees)
        for (const auto& node : tree.nodes)
            if (!node.is_leaf()) gain[static_cast<std::size_t>(node.feature)] += node.gain;
    return gain;
}

namespace {

json node_to_json(const Tree& tree, std::size_t id, const std::vector<std::string>& names) {
    const auto& node = tree.nodes[id];
    if (node.is_leaf()) return {{"leaf", node.weight}, {"cover", node.cover}};
    return {{"feature", names.at(static_cast<std::size_t>(node.feature))},
            {"threshold", node.threshold},
            {"gain", node.gain},
            {"cover", node.cover},
            {"left", node_to_json(tree, static_cast<std::size_t>(node.left), names)},
            {"right", node_to_json(tree, static_cast<std::size_t>(node.right), names)}};
}

// Rebuilds nodes in the same breadth-first layout the trainer produces.
Tree tree_from_json(const json& root, const std::vector<std::string>& names) {
    Tree tree;
    std::vector<const json*> queue{&root};
    tree.nodes.emplace_back();
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const json& j = *queue[head];
        TreeNode node;
        node.cover = j.value("cover", 0.0);
        if (j.contains("leaf")) {
            node.weight = j.at("leaf").get<double>();
        } else {
            const auto name = j.at("feature").get<std::string>();
            const auto it = std::find(names.begin(), names.end(), name);
            if (it == names.end()) throw SchemaError("tree references unknown feature '" + name + "'");
            node.feature = static_cast<std::int32_t>(it - names.begin());
            node.threshold = j.at("threshold").get<double>();
            node.gain = j.at("gain").get<double>();
            node.left = static_cast<std::int32_t>(tree.nodes.size());
            node.right = node.left + 1;
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            queue.push_back(&j.at("left"));
            queue.push_back(&j.at("right"));
        }
        tree.nodes[head] = node;
    }
    return tree;
}

}  // namespace

std::string GbtModel::to_json() const {
    json trees_json = json::array();
    for (const auto& tree : trees) trees_json.push_back(node_to_json(tree, 0, feature_names));
    json j = {
        {"schema_version", kGbtSchemaVersion},
        {"model", "gbt_regressor"},
        {"objective", "squared_error"},
        {"config",
         {{"n_trees", config.n_trees},
          {"learning_rate", config.learning_rate},
          {"max_depth", config.max_depth},
          {"lambda_l2", config.lambda_l2},
          {"min_child_weight", config.min_child_weight},
          {"gamma_split", config.gamma_split},
          {"subsample", config.subsample},
          {"rng_seed", config.rng_seed}}},
        {"feature_names", feature_names},
        {"base_score", base_score},
        {"training",
         {{"n_samples", training.n_samples},
          {"final_train_rmse", training.final_train_rmse},
          {"train_rmse_per_tree", training.train_rmse_per_tree}}},
        {"trees", std::move(trees_json)},
    };
    return j.dump(1) + "\n";
}

GbtModel GbtModel::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != kGbtSchemaVersion)
            throw SchemaError("unsupported model schema version " + std::to_string(version));
        GbtModel m;
        const auto& c = j.at("config");
        m.config.n_trees = c.at("n_trees").get<std::uint32_t>();
        m.config.learning_rate = c.at("learning_rate").get<double>();
        m.config.max_depth = c.at("max_depth").get<std::uint32_t>();
        m.config.lambda_l2 = c.at("lambda_l2").get<double>();
        m.config.min_child_weight = c.at("min_child_weight").get<double>();
        m.config.gamma_split = c.at("gamma_split").get<double>();
        m.config.subsample = c.at("subsample").get<double>();
        m.config.rng_seed = c.at("rng_seed").get<std::uint64_t>();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        m.base_score = j.at("base_score").get<double>();
        const auto& t = j.at("training");
        m.training.n_samples = t.at("n_samples").get<std::size_t>();
        m.training.final_train_rmse = t.at("final_train_rmse").get<double>();
        m.training.train_rmse_per_tree = t.value("train_rmse_per_tree", std::vector<double>{});
        for (const auto& tj : j.at("trees")) m.trees.push_back(tree_from_json(tj, m.feature_names));
        return m;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed model file: ") + e.what());
    }
}

void GbtModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model file '" + path.string() + "'");
    out << to_json();
}

GbtModel GbtModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace epispread
