#include "epispread/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epispread/error.hpp"
#include "epispread/parallel.hpp"
#include "epispread/rng.hpp"

namespace epispread {

double rmse(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size())
        throw Error("rmse: length mismatch (" + std::to_string(pred.size()) + " vs " +
                    std::to_string(truth.size()) + ")");
    if (pred.empty()) throw Error("rmse: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(pred.size()));
}

Learner gbt_learner(const GbtConfig& cfg, std::string name) {
    return {std::move(name), [cfg](const FeatureMatrix& x, std::span<const double> y, const FeatureMatrix& test) {
                return train_gbt(x, y, cfg).predict(test);
            }};
}

Learner mean_learner() {
    return {"training_mean", [](const FeatureMatrix&, std::span<const double> y, const FeatureMatrix& test) {
                const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
                return std::vector<double>(test.rows(), mean);
            }};
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::uint32_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (n < k) throw Error("cannot split " + std::to_string(n) + " nodes into " + std::to_string(k) + " folds");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, 0xf01d));
    shuffle(order, rng);
    std::vector<std::vector<std::size_t>> folds(k);
    for (std::uint32_t f = 0; f < k; ++f) {
        const auto begin = n * f / k;
        const auto end = n * (f + 1) / k;
        folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                        order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return folds;
}

CvResult cross_validate(const FeatureMatrix& features, std::span<const double> targets, const Learner& learner,
                        std::uint32_t k, std::uint64_t seed, unsigned threads) {
    const auto n = targets.size();
    if (features.rows() != n) throw SchemaError("feature rows do not match targets");
    const auto folds = make_folds(n, k, seed);
    CvResult res;
    res.fold_rmse.resize(k);
    parallel_for(k, threads, [&](std::size_t f) {
        std::vector<char> held(n, 0);
        for (auto i : folds[f]) held[i] = 1;
        std::vector<std::size_t> train_rows;
        train_rows.reserve(n - folds[f].size());
        for (std::size_t i = 0; i < n; ++i)
            if (!held[i]) train_rows.push_back(i);
        if (train_rows.empty() || folds[f].empty()) throw Error("degenerate cross-validation fold");
        std::vector<double> train_y, test_y;
        for (auto i : train_rows) train_y.push_back(targets[i]);
        for (auto i : folds[f]) test_y.push_back(targets[i]);
        const auto pred = learner.fit_predict(features.select_rows(train_rows), train_y,
                                              features.select_rows(folds[f]));
        res.fold_rmse[f] = rmse(pred, test_y);
    });
    res.mean = std::accumulate(res.fold_rmse.begin(), res.fold_rmse.end(), 0.0) / static_cast<double>(k);
    double var = 0.0;
    for (double r : res.fold_rmse) var += (r - res.mean) * (r - res.mean);
    res.std = std::sqrt(var / static_cast<double>(k));
    return res;
}

const char* to_string(TargetKind kind) { return kind == TargetKind::Peak ? "peak" : "time"; }

TargetKind target_kind_from_string(const std::string& s) {
    if (s == "peak") return TargetKind::Peak;
    if (s == "time") return TargetKind::Time;
    throw ConfigError("unknown target kind '" + s + "' (expected peak or time)");
}

const CvEntry& CvReport::at(TargetKind target, const std::string& learner) const {
    for (const auto& e : entries)
        if (e.target == target && e.learner == learner) return e;
    throw Error("no cross-validation entry for " + std::string(to_string(target)) + "/" + learner);
}

CvReport cv_report(const std::string& network, const FeatureMatrix& centrality, const FeatureMatrix& random,
                   std::span<const double> peak, std::span<const double> time,
                   const SimulationError& sim_error, const CvOptions& options) {
    CvReport report;
    report.network = network;
    report.k = options.k;
    report.seed = options.seed;
    report.simulation_error = sim_error;
    report.nodes = peak.size();
    const auto caboost = gbt_learner(options.gbt, "caboost");
    const auto baseline = gbt_learner(options.gbt, "random");
    for (auto kind : {TargetKind::Peak, TargetKind::Time}) {
        const auto y = kind == TargetKind::Peak ? peak : time;
        report.entries.push_back({kind, "caboost", cross_validate(centrality, y, caboost, options.k, options.seed, options.threads)});
        report.entries.push_back({kind, "random", cross_validate(random, y, baseline, options.k, options.seed, options.threads)});
    }
    return report;
}

TransferMatrix transfer_evaluate(std::span<const TransferNetwork> networks, TargetKind target,
                                 const CvOptions& options) {
    const auto m = networks.size();
    if (m < 2) throw ConfigError("transfer evaluation needs at least two networks");
    for (const auto& net : networks) {
        if (net.features.rows() != net.target(target).size())
            throw SchemaError("network '" + net.name + "': feature rows do not match targets");
        auto a = net.features.names, b = networks[0].features.names;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b)
            throw SchemaError("network '" + net.name + "' has a different feature schema than '" +
                              networks[0].name + "'");
    }

    TransferMatrix out;
    out.target = target;
    out.values.assign(m, std::vector<double>(m, 0.0));
    out.raw_rmse.assign(m, std::vector<double>(m, 0.0));
    for (const auto& net : networks) out.names.push_back(net.name);

    const auto learner = gbt_learner(options.gbt, "caboost");
    std::vector<double> baseline(m);
    std::vector<GbtModel> models(m);
    for (std::size_t i = 0; i < m; ++i) {
        baseline[i] = cross_validate(networks[i].features, networks[i].target(target), learner, options.k,
                                     options.seed, options.threads)
                          .mean;
    }
    parallel_for(m, options.threads, [&](std::size_t i) {
        models[i] = train_gbt(networks[i].features, networks[i].target(target), options.gbt);
    });
    parallel_for(m * m, options.threads, [&](std::size_t cell) {
        const auto row = cell / m, col = cell % m;
        if (row == col) {
            out.values[row][col] = baseline[row];
            out.raw_rmse[row][col] = baseline[row];
            return;
        }
        const auto pred = models[row].predict(networks[col].features);
        const double e = rmse(pred, networks[col].target(target));
        out.raw_rmse[row][col] = e;
        out.values[row][col] = e / baseline[col];
    });
    return out;
}

std::vector<std::size_t> histogram(std::span<const double> values, std::size_t bins) {
    std::vector<std::size_t> counts(bins, 0);
    const auto nb = static_cast<double>(bins);
    for (double v : values) {
        double b = std::floor(v * nb);
        b = std::clamp(b, 0.0, nb - 1.0);
        auto bin = static_cast<std::size_t>(b);
        // Bin edges are bin / bins; correct for rounding in v * bins.
        if (bin + 1 < bins && v >= static_cast<double>(bin + 1) / nb) ++bin;
        if (bin > 0 && v < static_cast<double>(bin) / nb) --bin;
        ++counts[bin];
    }
    return counts;
}

std::vector<std::size_t> largest_component_nodes(const Graph& g) {
    const auto& comps = g.components();
    if (comps.sizes.empty()) return {};
    const auto best = static_cast<std::uint32_t>(
        std::max_element(comps.sizes.begin(), comps.sizes.end()) - comps.sizes.begin());
    std::vector<std::size_t> nodes;
    nodes.reserve(comps.sizes[best]);
    for (std::size_t u = 0; u < g.node_count(); ++u)
        if (comps.label[u] == best) nodes.push_back(u);
    return nodes;
}

ComponentView component_filter(const Graph& g, const TargetTable& targets, const FeatureMatrix& features) {
    if (targets.peak.size() != g.node_count() || features.rows() != g.node_count())
        throw SchemaError("targets and features must cover every node of the graph");
    ComponentView view;
    view.nodes = largest_component_nodes(g);
    view.features = features.select_rows(view.nodes);
    view.time_norm = targets.time_norm;
    view.network_nodes = targets.node_count;
    for (auto u : view.nodes) {
        view.labels.push_back(g.label(static_cast<NodeId>(u)));
        view.peak.push_back(targets.peak[u]);
        view.time.push_back(targets.time[u]);
    }
    return view;
}

}  // namespace epispread
