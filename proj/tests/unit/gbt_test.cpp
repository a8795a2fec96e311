#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>

#include "epispread/error.hpp"
#include "epispread/gbt.hpp"
#include "epispread/rng.hpp"

using namespace epispread;

namespace {

FeatureMatrix matrix(std::vector<std::vector<double>> cols) {
    FeatureMatrix m;
    for (std::size_t c = 0; c < cols.size(); ++c) m.add_column("f" + std::to_string(c), std::move(cols[c]));
    return m;
}

double rmse_of(const std::vector<double>& p, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (p[i] - y[i]) * (p[i] - y[i]);
    return std::sqrt(s / y.size());
}

struct SplitRef {
    bool found = false;
    std::size_t feature = 0;
    std::vector<bool> goes_left;
    double lo = 0.0, hi = 0.0;  // threshold must fall in (lo, hi]
    double gain = 0.0;
};

// Tries every feature and every gap between distinct values.
SplitRef best_split_bruteforce(const std::vector<std::vector<double>>& x, const std::vector<double>& grad,
                               double lambda, double mcw) {
    SplitRef best;
    const auto n = grad.size();
    const double g = std::accumulate(grad.begin(), grad.end(), 0.0);
    const double h = static_cast<double>(n);
    for (std::size_t f = 0; f < x.size(); ++f) {
        auto values = x[f];
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            double gl = 0.0, hl = 0.0;
            std::vector<bool> left(n);
            for (std::size_t i = 0; i < n; ++i) {
                left[i] = x[f][i] <= values[k];
                if (left[i]) gl += grad[i], hl += 1.0;
            }
            const double gr = g - gl, hr = h - hl;
            if (hl < mcw || hr < mcw) continue;
            const double gain =
                0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda));
            if (gain > 0.0 && (!best.found || gain > best.gain))
                best = {true, f, left, values[k], values[k + 1], gain};
        }
    }
    return best;
}

}  // namespace

TEST_CASE("constant targets are reproduced exactly") {
    const auto x = matrix({{0.1, 0.5, 0.9, 0.3}});
    for (double c : {0.0, 0.37, 1.0, -2.5}) {
        const std::vector<double> y(4, c);
        const auto m = train_gbt(x, y, GbtConfig{});
        for (double p : m.predict(x)) CHECK(p == c);
        CHECK(m.training.final_train_rmse == 0.0);
    }
}

TEST_CASE("single sample") {
    const auto x = matrix({{0.4}});
    const std::vector<double> y{0.8};
    const auto m = train_gbt(x, y, GbtConfig{});
    CHECK(m.predict(x)[0] == 0.8);
}

TEST_CASE("identity target is fitted") {
    std::vector<double> xs(50), y(50);
    for (int i = 0; i < 50; ++i) xs[i] = y[i] = i / 49.0;
    const auto x = matrix({xs});
    GbtConfig cfg;
    cfg.n_trees = 200;
    cfg.max_depth = 6;
    cfg.lambda_l2 = 0.0;
    cfg.min_child_weight = 0.0;
    const auto m = train_gbt(x, y, cfg);
    CHECK(rmse_of(m.predict(x), y) < 1e-4);
}

TEST_CASE("two-point recursion with regularisation") {
    // With one row per leaf the residual shrinks by 1 - lr * 1 / (1 + lambda)
    // every round.
    const auto x = matrix({{0.0, 1.0}});
    const std::vector<double> y{0.0, 1.0};
    GbtConfig cfg;
    cfg.n_trees = 12;
    cfg.learning_rate = 0.3;
    cfg.lambda_l2 = 1.0;
    const auto m = train_gbt(x, y, cfg);
    double r = 0.5;
    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        r *= 1.0 - cfg.learning_rate * 1.0 / (1.0 + cfg.lambda_l2);
        CHECK(m.training.train_rmse_per_tree[t] == doctest::Approx(r).epsilon(1e-12));
    }
}

TEST_CASE("training rmse never increases and leaves hold the regularised mean gradient") {
    Rng rng(3);
    std::vector<double> a(120), b(120), y(120);
    for (int i = 0; i < 120; ++i) {
        a[i] = uniform01(rng);
        b[i] = uniform01(rng);
        y[i] = std::sin(6 * a[i]) + 0.3 * b[i];
    }
    const auto x = matrix({a, b});
    GbtConfig cfg;
    cfg.n_trees = 30;
    cfg.max_depth = 3;
    const auto m = train_gbt(x, y, cfg);
    const auto& per = m.training.train_rmse_per_tree;
    REQUIRE(per.size() == 30);
    for (std::size_t t = 1; t < per.size(); ++t) CHECK(per[t] <= per[t - 1] + 1e-12);
    CHECK(m.training.final_train_rmse == per.back());
    CHECK(m.training.final_train_rmse == doctest::Approx(rmse_of(m.predict(x), y)).epsilon(1e-12));

    std::vector<double> pred(120, m.base_score);
    for (const auto& tree : m.trees) {
        std::vector<double> g(tree.nodes.size(), 0.0), h(tree.nodes.size(), 0.0);
        std::vector<std::size_t> leaf(120);
        for (std::size_t i = 0; i < 120; ++i) {
            leaf[i] = tree.leaf_index([&](std::size_t f) { return x.columns[f][i]; });
            g[leaf[i]] += pred[i] - y[i];
            h[leaf[i]] += 1.0;
        }
        for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
            if (!tree.nodes[k].is_leaf()) continue;
            CHECK(tree.nodes[k].cover == h[k]);
            CHECK(tree.nodes[k].weight == doctest::Approx(-g[k] / (h[k] + cfg.lambda_l2)).epsilon(1e-9));
        }
        for (std::size_t i = 0; i < 120; ++i) pred[i] += cfg.learning_rate * tree.nodes[leaf[i]].weight;
    }
}

TEST_CASE("depth-one splits match exhaustive search") {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 19);
        const std::size_t feats = 1 + uniform_index(rng, 3);
        std::vector<std::vector<double>> x(feats, std::vector<double>(n));
        for (auto& col : x)
            for (auto& v : col) v = static_cast<double>(uniform_index(rng, 5)) / 4.0;  // many ties
        if (feats > 1 && trial % 3 == 0) x[1] = x[0];                              // duplicate feature
        // Integer targets whose mean is an integer keep every gradient exact.
        std::vector<double> y(n);
        for (auto& v : y) v = static_cast<double>(uniform_index(rng, 7));
        const double sum = std::accumulate(y.begin(), y.end(), 0.0);
        y.back() -= std::fmod(sum, static_cast<double>(n));
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;

        GbtConfig cfg;
        cfg.n_trees = 1;
        cfg.max_depth = 1;
        cfg.lambda_l2 = static_cast<double>(trial % 3);
        cfg.min_child_weight = trial % 4 == 0 ? 2.0 : 1.0;
        const auto m = train_gbt(matrix(x), y, cfg);
        CHECK(m.base_score == mean);

        std::vector<double> grad(n);
        for (std::size_t i = 0; i < n; ++i) grad[i] = mean - y[i];
        const auto ref = best_split_bruteforce(x, grad, cfg.lambda_l2, cfg.min_child_weight);
        const auto& root = m.trees[0].nodes[0];
        REQUIRE(root.is_leaf() == !ref.found);
        if (!ref.found) continue;
        CHECK(static_cast<std::size_t>(root.feature) == ref.feature);
        CHECK(root.threshold > ref.lo);
        CHECK(root.threshold <= ref.hi);
        CHECK(root.gain == doctest::Approx(ref.gain).epsilon(1e-12));
        for (std::size_t i = 0; i < n; ++i) CHECK((x[ref.feature][i] < root.threshold) == ref.goes_left[i]);
    }
}

TEST_CASE("gamma and min child weight block splits") {
    const auto x = matrix({{0.0, 1.0}});
    const std::vector<double> y{0.0, 1.0};
    GbtConfig cfg;
    cfg.n_trees = 1;
    cfg.gamma_split = 10.0;
    CHECK(train_gbt(x, y, cfg).trees[0].nodes.size() == 1);
    cfg.gamma_split = 0.0;
    cfg.min_child_weight = 2.0;
    CHECK(train_gbt(x, y, cfg).trees[0].nodes.size() == 1);
}

TEST_CASE("serialisation round trip") {
    Rng rng(5);
    std::vector<double> a(80), b(80), y(80);
    for (int i = 0; i < 80; ++i) {
        a[i] = uniform01(rng);
        b[i] = uniform01(rng);
        y[i] = a[i] * b[i] + 0.1 * std::cos(9 * a[i]);
    }
    const auto x = matrix({a, b});
    GbtConfig cfg;
    cfg.n_trees = 25;
    const auto m = train_gbt(x, y, cfg);

    const auto back = GbtModel::from_json(m.to_json());
    CHECK(back == m);
    CHECK(back.predict(x) == m.predict(x));

    const auto path = std::filesystem::temp_directory_path() / "epispread_gbt_roundtrip.json";
    m.save(path);
    CHECK(GbtModel::load(path) == m);
    std::filesystem::remove(path);

    FeatureMatrix swapped;
    swapped.add_column("extra", std::vector<double>(80, 0.5));
    swapped.add_column("f1", b);
    swapped.add_column("f0", a);
    CHECK(m.predict(swapped) == m.predict(x));

    FeatureMatrix missing;
    missing.add_column("f0", a);
    CHECK_THROWS_WITH_AS(m.predict(missing), doctest::Contains("f1"), SchemaError);

    CHECK_THROWS_AS(GbtModel::from_json("{\"schema_version\": 99}"), SchemaError);
    CHECK_THROWS_AS(GbtModel::from_json("not json"), Error);
}

TEST_CASE("informative feature carries the importance") {
    int wins = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng(s);
        std::vector<double> sig(150), noise(150), y(150);
        for (int i = 0; i < 150; ++i) {
            sig[i] = uniform01(rng);
            noise[i] = uniform01(rng);
            y[i] = sig[i] * sig[i] + 0.05 * uniform01(rng);
        }
        GbtConfig cfg;
        cfg.n_trees = 20;
        const auto imp = train_gbt(matrix({noise, sig}), y, cfg).feature_importance();
        if (imp[1] > imp[0]) ++wins;
    }
    CHECK(wins == 20);
}

TEST_CASE("determinism and subsampling") {
    Rng rng(8);
    std::vector<double> a(60), y(60);
    for (int i = 0; i < 60; ++i) {
        a[i] = uniform01(rng);
        y[i] = a[i] > 0.5 ? 1.0 : 0.0;
    }
    const auto x = matrix({a});
    GbtConfig cfg;
    cfg.subsample = 0.5;
    cfg.rng_seed = 3;
    const auto m1 = train_gbt(x, y, cfg);
    CHECK(train_gbt(x, y, cfg) == m1);
    cfg.rng_seed = 4;
    CHECK_FALSE(train_gbt(x, y, cfg) == m1);
    cfg.subsample = 1.0;
    const auto full_a = train_gbt(x, y, cfg);
    cfg.rng_seed = 99;
    CHECK(train_gbt(x, y, cfg).trees == full_a.trees);
}

TEST_CASE("invalid input") {
    const auto x = matrix({{0.1, 0.2}});
    CHECK_THROWS_AS(train_gbt(x, std::vector<double>{0.1}, GbtConfig{}), SchemaError);
    CHECK_THROWS_AS(train_gbt(x, std::vector<double>{0.1, std::nan("")}, GbtConfig{}), Error);
    const auto bad = matrix({{0.1, std::numeric_limits<double>::quiet_NaN()}});
    CHECK_THROWS_AS(train_gbt(bad, std::vector<double>{0.1, 0.2}, GbtConfig{}), Error);
    GbtConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(train_gbt(x, std::vector<double>{0.1, 0.2}, cfg), ConfigError);
    cfg = {};
    cfg.n_trees = 0;
    CHECK_THROWS_AS(train_gbt(x, std::vector<double>{0.1, 0.2}, cfg), ConfigError);
}
