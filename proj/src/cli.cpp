#include "epispread/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "epispread/error.hpp"
#include "epispread/evaluation.hpp"
#include "epispread/graph.hpp"
#include "epispread/io.hpp"
#include "epispread/rng.hpp"

namespace epispread::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Sub-streams of the master seed.
enum SeedStream : std::uint64_t { kWalkStream = 1, kRandomFeatureStream = 2, kGbtStream = 3, kFoldStream = 4 };

std::uint64_t stream_seed(const RunConfig& cfg, SeedStream s) { return derive_seed(cfg.master_seed, 0xc11, s); }

WalkConfig walk_config(const RunConfig& cfg) {
    auto w = cfg.walk;
    w.rng_seed = stream_seed(cfg, kWalkStream);
    return w;
}

GbtConfig gbt_config(const RunConfig& cfg) {
    auto g = cfg.gbt;
    g.rng_seed = stream_seed(cfg, kGbtStream);
    return g;
}

CvOptions cv_options(const RunConfig& cfg) {
    return {cfg.k_folds, stream_seed(cfg, kFoldStream), gbt_config(cfg), cfg.threads};
}

std::vector<TargetKind> selected_targets(const RunConfig& cfg) {
    if (cfg.target == "both") return {TargetKind::Peak, TargetKind::Time};
    return {target_kind_from_string(cfg.target)};
}

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string("missing required ") + what);
    if (!fs::exists(path)) throw ConfigError(std::string(what) + " '" + path + "' does not exist");
}

Delimiter parse_delimiter(const std::string& d) {
    if (d == "auto") return Delimiter::Auto;
    if (d == "whitespace") return Delimiter::Whitespace;
    if (d == "comma") return Delimiter::Comma;
    throw ConfigError("unknown delimiter '" + d + "' (expected auto, whitespace or comma)");
}

std::string network_name(const std::string& path) { return fs::path(path).stem().string(); }

Graph load_network(const RunConfig& cfg, const std::string& path, std::ostream& err) {
    require_file(path, "network file");
    auto loaded = load_edge_list(path, {parse_delimiter(cfg.delimiter), cfg.header_skip});
    const auto& rep = loaded.report;
    if (rep.self_loops_dropped > 0 || rep.duplicates_dropped > 0)
        err << "warning: " << path << ": dropped " << rep.self_loops_dropped << " self-loops and "
            << rep.duplicates_dropped << " duplicate edges\n";
    return std::move(loaded.graph);
}

fs::path out_path(const RunConfig& cfg, const std::string& file) { return fs::path(cfg.out_dir) / file; }

void echo_config(const RunConfig& cfg, const std::string& command) {
    auto j = to_json(cfg);
    j["command"] = command;
    j["derived_seeds"] = {{"walk", stream_seed(cfg, kWalkStream)},
                          {"random_features", stream_seed(cfg, kRandomFeatureStream)},
                          {"gbt", stream_seed(cfg, kGbtStream)},
                          {"folds", stream_seed(cfg, kFoldStream)}};
    io::write_json(out_path(cfg, command + "_config.json"), j);
}

struct Prepared {
    std::string name;
    Graph graph;
    TargetBuild targets;
    FeatureBuild features;
};

Prepared prepare_network(const RunConfig& cfg, const std::string& path, std::ostream& err) {
    Prepared p;
    p.name = network_name(path);
    p.graph = load_network(cfg, path, err);
    p.targets = build_targets(p.graph, cfg.sir, cfg.master_seed, cfg.threads);
    p.features = build_features(p.graph, walk_config(cfg), cfg.threads);
    for (const auto& w : p.features.warnings) err << "warning: " << p.name << ": " << w << '\n';
    return p;
}

int finish(const RunConfig& cfg, bool converged, std::ostream& err) {
    if (!converged && cfg.strict) {
        err << "error: a centrality computation did not converge (--strict)\n";
        return kNonConvergence;
    }
    return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    cfg.sir.validate();
    const auto g = load_network(cfg, cfg.network, err);
    auto built = build_targets(g, cfg.sir, cfg.master_seed, cfg.threads);
    io::write_records(out_path(cfg, "records.csv"), built.records);
    io::write_targets(out_path(cfg, "targets.csv"), built.table);
    echo_config(cfg, "simulate");
    std::size_t truncated = 0;
    for (const auto& r : built.records) truncated += r.truncated ? 1 : 0;
    const auto sim_error = simulation_error(built.records, built.table);
    out << "simulated " << built.records.size() << " epidemics on " << g.node_count() << " nodes"
        << " (time_norm " << built.table.time_norm << ", truncated runs " << truncated << ")\n"
        << "simulation error: peak " << sim_error.peak << "  time " << sim_error.time << '\n';
    return kOk;
}

int cmd_featurize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    cfg.walk.validate();
    const auto g = load_network(cfg, cfg.network, err);
    const auto csv = out_path(cfg, "features.csv");
    bool converged = true;
    if (cfg.random_features > 0) {
        const auto m = random_features(g.node_count(), cfg.random_features, stream_seed(cfg, kRandomFeatureStream));
        io::write_features(csv, g.labels(), m,
                           {{"kind", "random"}, {"rng_seed", stream_seed(cfg, kRandomFeatureStream)}});
        out << "wrote " << m.cols() << " random feature columns for " << g.node_count() << " nodes\n";
    } else {
        const auto built = build_features(g, walk_config(cfg), cfg.threads);
        for (const auto& w : built.warnings) err << "warning: " << w << '\n';
        converged = built.converged;
        io::write_features(csv, g.labels(), built.matrix,
                           {{"kind", "centrality"}, {"walk", io::walk_config_json(walk_config(cfg))}});
        out << "wrote " << built.matrix.cols() << " centrality feature columns for " << g.node_count() << " nodes\n";
    }
    echo_config(cfg, "featurize");
    return finish(cfg, converged, err);
}

// Targets reordered to follow the feature rows, matched by node label.
std::vector<double> aligned_targets(const io::LabelledFeatures& f, const TargetTable& t, TargetKind kind) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < t.labels.size(); ++i) index.emplace(t.labels[i], i);
    const auto& col = t.column(kind == TargetKind::Time);
    std::vector<double> y;
    y.reserve(f.labels.size());
    for (const auto& label : f.labels) {
        const auto it = index.find(label);
        if (it == index.end()) throw SchemaError("no target for node '" + label + "'");
        y.push_back(col[it->second]);
    }
    return y;
}

TargetKind single_target(const RunConfig& cfg) {
    if (cfg.target == "both") return TargetKind::Peak;
    return target_kind_from_string(cfg.target);
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    require_file(cfg.features, "features file");
    if (cfg.targets.size() != 1) throw ConfigError("train needs exactly one --targets file");
    require_file(cfg.targets[0], "targets file");
    const auto kind = single_target(cfg);
    const auto features = io::read_features(cfg.features);
    const auto targets = io::read_targets(cfg.targets[0]);
    const auto y = aligned_targets(features, targets, kind);
    const auto model = train_gbt(features.matrix, y, gbt_config(cfg));
    const auto path = cfg.model.empty() ? out_path(cfg, "model.json") : fs::path(cfg.model);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    model.save(path);
    echo_config(cfg, "train");
    out << "trained " << model.trees.size() << " trees on " << y.size() << " nodes (" << to_string(kind)
        << " target); training RMSE " << model.training.final_train_rmse << '\n';
    const auto importance = model.feature_importance();
    for (std::size_t i = 0; i < importance.size(); ++i)
        out << "  gain " << model.feature_names[i] << ": " << importance[i] << '\n';
    return kOk;
}

int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    require_file(cfg.model, "model file");
    require_file(cfg.features, "features file");
    const auto model = GbtModel::load(cfg.model);
    const auto features = io::read_features(cfg.features);
    auto pred = model.predict(features.matrix);
    if (cfg.clamp)
        for (auto& p : pred) p = std::clamp(p, 0.0, 1.0);
    io::write_predictions(out_path(cfg, "predictions.csv"), features.labels, pred);
    echo_config(cfg, "predict");
    out << "predicted " << pred.size() << " nodes\n";
    if (!cfg.targets.empty()) {
        require_file(cfg.targets[0], "targets file");
        const auto y = aligned_targets(features, io::read_targets(cfg.targets[0]), single_target(cfg));
        out << "RMSE " << rmse(pred, y) << '\n';
    }
    return kOk;
}

int cmd_cv(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    cfg.sir.validate();
    cfg.walk.validate();
    auto p = prepare_network(cfg, cfg.network, err);
    const auto n = p.graph.node_count();
    const auto random = random_features(n, 64, stream_seed(cfg, kRandomFeatureStream));
    const auto sim_error = simulation_error(p.targets.records, p.targets.table);
    CvReport report;
    if (cfg.largest_component) {
        const auto view = component_filter(p.graph, p.targets.table, p.features.matrix);
        const auto random_view = random.select_rows(view.nodes);
        report = cv_report(p.name, view.features, random_view, view.peak, view.time, sim_error, cv_options(cfg));
    } else {
        report = cv_report(p.name, p.features.matrix, random, p.targets.table.peak, p.targets.table.time, sim_error,
                           cv_options(cfg));
    }
    io::write_targets(out_path(cfg, "targets.csv"), p.targets.table);
    io::write_text(out_path(cfg, "cv_report.txt"), io::cv_report_text(report));
    io::write_text(out_path(cfg, "cv_report.csv"), io::cv_report_csv(report));
    io::write_json(out_path(cfg, "cv_report.json"), io::cv_report_json(report));
    echo_config(cfg, "cv");
    out << io::cv_report_text(report);
    return finish(cfg, p.features.converged, err);
}

int cmd_transfer(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.networks.size() < 2) throw ConfigError("transfer needs at least two --networks");
    cfg.sir.validate();
    cfg.walk.validate();
    for (const auto& path : cfg.networks) require_file(path, "network file");
    std::vector<TransferNetwork> nets;
    bool converged = true;
    for (const auto& path : cfg.networks) {
        auto p = prepare_network(cfg, path, err);
        converged = converged && p.features.converged;
        TransferNetwork t;
        t.name = p.name;
        if (cfg.largest_component) {
            auto view = component_filter(p.graph, p.targets.table, p.features.matrix);
            t.features = std::move(view.features);
            t.peak = std::move(view.peak);
            t.time = std::move(view.time);
        } else {
            t.features = std::move(p.features.matrix);
            t.peak = p.targets.table.peak;
            t.time = p.targets.table.time;
        }
        nets.push_back(std::move(t));
    }
    for (auto kind : selected_targets(cfg)) {
        const auto m = transfer_evaluate(nets, kind, cv_options(cfg));
        const std::string stem = std::string("transfer_") + to_string(kind);
        io::write_text(out_path(cfg, stem + ".txt"), io::transfer_text(m));
        io::write_text(out_path(cfg, stem + ".csv"), io::transfer_csv(m));
        io::write_json(out_path(cfg, stem + ".json"), io::transfer_json(m));
        out << io::transfer_text(m);
    }
    echo_config(cfg, "transfer");
    return finish(cfg, converged, err);
}

int cmd_export_dist(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<io::NamedTargets> tables;
    for (const auto& path : cfg.targets) {
        require_file(path, "targets file");
        auto t = io::read_targets(path);
        tables.push_back({network_name(path), std::move(t.peak), std::move(t.time)});
    }
    for (const auto& path : cfg.networks) {
        cfg.sir.validate();
        const auto g = load_network(cfg, path, err);
        auto t = build_targets(g, cfg.sir, cfg.master_seed, cfg.threads).table;
        tables.push_back({network_name(path), std::move(t.peak), std::move(t.time)});
    }
    if (tables.empty()) throw ConfigError("export-dist needs --targets files or --networks");
    io::write_text(out_path(cfg, "distribution_values.csv"), io::distribution_values_csv(tables));
    io::write_text(out_path(cfg, "distribution_histogram.csv"), io::distribution_histogram_csv(tables));
    echo_config(cfg, "export-dist");
    out << "exported distributions for " << tables.size() << " network(s)\n";
    return kOk;
}

int cmd_stats(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto g = load_network(cfg, cfg.network, err);
    const auto s = g.stats();
    out << "nodes " << s.nodes << "\nedges " << s.edges << "\ncomponents " << s.components
        << "\nlargest_component_fraction " << s.largest_component_fraction << '\n';
    io::write_json(out_path(cfg, "stats.json"), {{"network", network_name(cfg.network)},
                                                 {"nodes", s.nodes},
                                                 {"edges", s.edges},
                                                 {"components", s.components},
                                                 {"largest_component_fraction", s.largest_component_fraction}});
    return kOk;
}

// Value of --config, if present, so the file can seed defaults before
// command-line flags are applied on top.
std::string find_config_arg(int argc, const char* const* argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return {};
}

}  // namespace

void RunConfig::validate() const {
    sir.validate();
    walk.validate();
    gbt.validate();
    if (k_folds < 2) throw ConfigError("--folds must be at least 2");
    if (target != "both") target_kind_from_string(target);
    parse_delimiter(delimiter);
}

json to_json(const RunConfig& c) {
    return {{"network", c.network},
            {"networks", c.networks},
            {"out_dir", c.out_dir},
            {"delimiter", c.delimiter},
            {"header_skip", c.header_skip},
            {"sir",
             {{"beta", c.sir.beta},
              {"gamma", c.sir.gamma},
              {"max_iterations", c.sir.max_iterations},
              {"runs_per_node", c.sir.runs_per_node}}},
            {"walk",
             {{"walks_per_node", c.walk.walks_per_node},
              {"mean_length", c.walk.mean_length},
              {"length_mode", c.walk.length_mode == WalkLength::Uniform ? "uniform" : "fixed"}}},
            {"gbt",
             {{"n_trees", c.gbt.n_trees},
              {"learning_rate", c.gbt.learning_rate},
              {"max_depth", c.gbt.max_depth},
              {"lambda_l2", c.gbt.lambda_l2},
              {"min_child_weight", c.gbt.min_child_weight},
              {"gamma_split", c.gbt.gamma_split},
              {"subsample", c.gbt.subsample}}},
            {"k_folds", c.k_folds},
            {"master_seed", c.master_seed},
            {"target", c.target},
            {"largest_component", c.largest_component},
            {"clamp", c.clamp},
            {"strict", c.strict},
            {"random_features", c.random_features},
            {"features", c.features},
            {"targets", c.targets},
            {"model", c.model}};
}

void merge_json(RunConfig& c, const json& j) {
    auto take = [&](const json& obj, const char* key, auto& field) {
        if (obj.contains(key)) field = obj.at(key).get<std::decay_t<decltype(field)>>();
    };
    try {
        take(j, "network", c.network);
        take(j, "networks", c.networks);
        take(j, "out_dir", c.out_dir);
        take(j, "delimiter", c.delimiter);
        take(j, "header_skip", c.header_skip);
        if (j.contains("sir")) {
            const auto& s = j.at("sir");
            take(s, "beta", c.sir.beta);
            take(s, "gamma", c.sir.gamma);
            take(s, "max_iterations", c.sir.max_iterations);
            take(s, "runs_per_node", c.sir.runs_per_node);
        }
        if (j.contains("walk")) {
            const auto& w = j.at("walk");
            take(w, "walks_per_node", c.walk.walks_per_node);
            take(w, "mean_length", c.walk.mean_length);
            if (w.contains("length_mode")) {
                const auto mode = w.at("length_mode").get<std::string>();
                if (mode != "uniform" && mode != "fixed") throw ConfigError("walk.length_mode must be uniform or fixed");
                c.walk.length_mode = mode == "fixed" ? WalkLength::Fixed : WalkLength::Uniform;
            }
        }
        if (j.contains("gbt")) {
            const auto& g = j.at("gbt");
            take(g, "n_trees", c.gbt.n_trees);
            take(g, "learning_rate", c.gbt.learning_rate);
            take(g, "max_depth", c.gbt.max_depth);
            take(g, "lambda_l2", c.gbt.lambda_l2);
            take(g, "min_child_weight", c.gbt.min_child_weight);
            take(g, "gamma_split", c.gbt.gamma_split);
            take(g, "subsample", c.gbt.subsample);
        }
        take(j, "k_folds", c.k_folds);
        take(j, "master_seed", c.master_seed);
        take(j, "target", c.target);
        take(j, "largest_component", c.largest_component);
        take(j, "clamp", c.clamp);
        take(j, "strict", c.strict);
        take(j, "random_features", c.random_features);
        take(j, "features", c.features);
        take(j, "targets", c.targets);
        take(j, "model", c.model);
        take(j, "threads", c.threads);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config file: ") + e.what());
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        if (const auto path = find_config_arg(argc, argv); !path.empty()) {
            require_file(path, "config file");
            merge_json(cfg, io::read_json(path));
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    CLI::App app{"Epidemic spreading prediction from network centralities"};
    app.require_subcommand(1);
    std::string config_file;
    app.add_option("--config", config_file, "JSON RunConfig; command-line flags take precedence");

    std::string walk_mode = cfg.walk.length_mode == WalkLength::Fixed ? "fixed" : "uniform";
    auto common = [&](CLI::App* sub) {
        sub->fallthrough();
        sub->add_option("--out", cfg.out_dir, "Output directory (created if absent)");
        sub->add_option("--seed", cfg.master_seed, "Master seed for all randomness");
        sub->add_option("--threads", cfg.threads, "Worker threads, 0 = auto; never changes outputs");
        sub->add_option("--delimiter", cfg.delimiter, "Edge-list delimiter: auto, whitespace, comma");
        sub->add_flag("--header-skip", cfg.header_skip, "Skip the first non-comment line of edge lists");
        sub->add_flag("--strict", cfg.strict, "Exit with code 3 when a centrality fails to converge");
    };
    auto sir_opts = [&](CLI::App* sub) {
        sub->add_option("--beta", cfg.sir.beta, "Infection probability per infected neighbour and iteration");
        sub->add_option("--gamma", cfg.sir.gamma, "Recovery probability per iteration");
        sub->add_option("--runs", cfg.sir.runs_per_node, "Simulations per seed node");
        sub->add_option("--max-iter", cfg.sir.max_iterations, "Iteration cap per simulation");
    };
    auto walk_opts = [&](CLI::App* sub) {
        sub->add_option("--walks", cfg.walk.walks_per_node, "Random walks per node");
        sub->add_option("--walk-length", cfg.walk.mean_length, "Mean random-walk length");
        sub->add_option("--walk-mode", walk_mode, "uniform or fixed walk lengths")
            ->check(CLI::IsMember({"uniform", "fixed"}));
    };
    auto gbt_opts = [&](CLI::App* sub) {
        sub->add_option("--trees", cfg.gbt.n_trees, "Boosting rounds");
        sub->add_option("--learning-rate", cfg.gbt.learning_rate, "Shrinkage");
        sub->add_option("--max-depth", cfg.gbt.max_depth, "Maximum tree depth");
        sub->add_option("--lambda", cfg.gbt.lambda_l2, "L2 regularisation of leaf weights");
        sub->add_option("--min-child-weight", cfg.gbt.min_child_weight, "Minimum hessian sum per child");
        sub->add_option("--gamma-split", cfg.gbt.gamma_split, "Minimum split gain");
        sub->add_option("--subsample", cfg.gbt.subsample, "Row subsampling rate per tree");
    };
    auto target_opt = [&](CLI::App* sub) {
        sub->add_option("--target", cfg.target, "peak, time or both")
            ->check(CLI::IsMember({"peak", "time", "both"}));
    };

    auto* simulate = app.add_subcommand("simulate", "Run SIR simulations from every node and write targets");
    simulate->add_option("--network", cfg.network, "Edge-list file");
    common(simulate);
    sir_opts(simulate);

    auto* featurize = app.add_subcommand("featurize", "Compute normalised centrality features");
    featurize->add_option("--network", cfg.network, "Edge-list file");
    featurize->add_option("--random-features", cfg.random_features, "Write N uniform random columns instead");
    common(featurize);
    walk_opts(featurize);

    auto* train = app.add_subcommand("train", "Train a boosted-tree model from feature and target files");
    train->add_option("--features", cfg.features, "Features CSV");
    train->add_option("--targets", cfg.targets, "Targets CSV");
    train->add_option("--model", cfg.model, "Model output path (default <out>/model.json)");
    common(train);
    gbt_opts(train);
    target_opt(train);

    auto* predict = app.add_subcommand("predict", "Predict targets with a trained model");
    predict->add_option("--model", cfg.model, "Model JSON");
    predict->add_option("--features", cfg.features, "Features CSV");
    predict->add_option("--targets", cfg.targets, "Optional targets CSV for reporting RMSE");
    predict->add_flag("--clamp", cfg.clamp, "Clip predictions to [0, 1]");
    common(predict);
    target_opt(predict);

    auto* cv = app.add_subcommand("cv", "k-fold cross-validation against the random baseline");
    cv->add_option("--network", cfg.network, "Edge-list file");
    cv->add_option("--folds", cfg.k_folds, "Number of folds");
    cv->add_flag("--largest-component", cfg.largest_component, "Evaluate on the largest component only");
    common(cv);
    sir_opts(cv);
    walk_opts(cv);
    gbt_opts(cv);

    auto* transfer = app.add_subcommand("transfer", "Zero-shot transfer matrix across networks");
    transfer->add_option("--networks", cfg.networks, "Two or more edge-list files");
    transfer->add_option("--folds", cfg.k_folds, "Number of folds for the baseline scores");
    transfer->add_flag("--largest-component", cfg.largest_component, "Evaluate on the largest component only");
    common(transfer);
    sir_opts(transfer);
    walk_opts(transfer);
    gbt_opts(transfer);
    target_opt(transfer);

    auto* export_dist = app.add_subcommand("export-dist", "Export target distributions and histograms");
    export_dist->add_option("--targets", cfg.targets, "Targets CSV files");
    export_dist->add_option("--networks", cfg.networks, "Edge-list files to simulate instead");
    common(export_dist);
    sir_opts(export_dist);

    auto* stats = app.add_subcommand("stats", "Basic network statistics");
    stats->add_option("--network", cfg.network, "Edge-list file");
    common(stats);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    cfg.walk.length_mode = walk_mode == "fixed" ? WalkLength::Fixed : WalkLength::Uniform;

    try {
        cfg.validate();
        if (*simulate) return cmd_simulate(cfg, out, err);
        if (*featurize) return cmd_featurize(cfg, out, err);
        if (*train) return cmd_train(cfg, out, err);
        if (*predict) return cmd_predict(cfg, out, err);
        if (*cv) return cmd_cv(cfg, out, err);
        if (*transfer) return cmd_transfer(cfg, out, err);
        if (*export_dist) return cmd_export_dist(cfg, out, err);
        if (*stats) return cmd_stats(cfg, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}

}  // namespace epispread::cli
