#include "epispread/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "epispread/error.hpp"

namespace epispread::io {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw ParseError("invalid number '" + s + "'", line);
    return v;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == '\r') continue;
        if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::uint64_t parse_uint(const std::string& s, std::size_t line) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw ParseError("invalid integer '" + s + "'", line);
    return v;
}

std::size_t column_index(const CsvTable& t, const std::string& name, const fs::path& path) {
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == name) return i;
    throw SchemaError("'" + path.string() + "' has no column '" + name + "'");
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size())
            throw ParseError("'" + path.string() + "': expected " + std::to_string(t.header.size()) + " fields",
                             line_no);
        t.rows.push_back(std::move(fields));
    }
    if (t.header.empty()) throw EmptyInputError("'" + path.string() + "' is empty");
    return t;
}

void write_text(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

fs::path sidecar_path(const fs::path& csv) {
    auto p = csv;
    p.replace_extension(".json");
    return p;
}

void write_records(const fs::path& path, const std::vector<SimulationRecord>& records) {
    std::ostringstream out;
    out << "seed_node,run_index,peak_infected,peak_iteration,total_iterations,truncated\n";
    for (const auto& r : records)
        out << r.seed_node << ',' << r.run_index << ',' << r.peak_infected << ',' << r.peak_iteration << ','
            << r.total_iterations << ',' << (r.truncated ? 1 : 0) << '\n';
    write_text(path, out.str());
}

std::vector<SimulationRecord> read_records(const fs::path& path) {
    const auto t = read_csv(path);
    const char* names[] = {"seed_node", "run_index", "peak_infected", "peak_iteration", "total_iterations", "truncated"};
    std::size_t idx[6];
    for (int i = 0; i < 6; ++i) idx[i] = column_index(t, names[i], path);
    std::vector<SimulationRecord> out;
    out.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const auto line = r + 2;
        SimulationRecord rec;
        rec.seed_node = static_cast<NodeId>(parse_uint(row[idx[0]], line));
        rec.run_index = static_cast<std::uint32_t>(parse_uint(row[idx[1]], line));
        rec.peak_infected = parse_uint(row[idx[2]], line);
        rec.peak_iteration = parse_uint(row[idx[3]], line);
        rec.total_iterations = parse_uint(row[idx[4]], line);
        rec.truncated = parse_uint(row[idx[5]], line) != 0;
        out.push_back(rec);
    }
    return out;
}

json targets_metadata(const TargetTable& t) {
    return {{"time_norm", t.time_norm},
            {"node_count", t.node_count},
            {"beta", t.params.beta},
            {"gamma", t.params.gamma},
            {"runs_per_node", t.params.runs_per_node},
            {"max_iterations", t.params.max_iterations},
            {"master_seed", t.master_seed}};
}

void write_targets(const fs::path& csv, const TargetTable& t) {
    std::ostringstream out;
    out << "node,peak_target,time_target\n";
    for (std::size_t u = 0; u < t.node_count; ++u)
        out << (u < t.labels.size() ? t.labels[u] : std::to_string(u)) << ',' << format_double(t.peak[u]) << ','
            << format_double(t.time[u]) << '\n';
    write_text(csv, out.str());
    write_json(sidecar_path(csv), targets_metadata(t));
}

TargetTable read_targets(const fs::path& csv) {
    const auto t = read_csv(csv);
    const auto node = column_index(t, "node", csv);
    const auto peak = column_index(t, "peak_target", csv);
    const auto time = column_index(t, "time_target", csv);
    TargetTable out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out.labels.push_back(t.rows[r][node]);
        out.peak.push_back(parse_double(t.rows[r][peak], r + 2));
        out.time.push_back(parse_double(t.rows[r][time], r + 2));
    }
    out.node_count = out.peak.size();
    const auto side = sidecar_path(csv);
    if (fs::exists(side)) {
        const auto j = read_json(side);
        out.time_norm = j.value("time_norm", 1.0);
        out.params.beta = j.value("beta", out.params.beta);
        out.params.gamma = j.value("gamma", out.params.gamma);
        out.params.runs_per_node = j.value("runs_per_node", out.params.runs_per_node);
        out.params.max_iterations = j.value("max_iterations", out.params.max_iterations);
        out.master_seed = j.value("master_seed", std::uint64_t{0});
        if (j.value("node_count", out.node_count) != out.node_count)
            throw SchemaError("'" + csv.string() + "' row count disagrees with its sidecar");
    }
    return out;
}

json walk_config_json(const WalkConfig& cfg) {
    return {{"walks_per_node", cfg.walks_per_node},
            {"mean_length", cfg.mean_length},
            {"length_mode", cfg.length_mode == WalkLength::Uniform ? "uniform" : "fixed"},
            {"rng_seed", cfg.rng_seed}};
}

void write_features(const fs::path& csv, const std::vector<std::string>& labels, const FeatureMatrix& m,
                    const json& meta) {
    if (labels.size() != m.rows()) throw SchemaError("label count does not match feature rows");
    std::ostringstream out;
    out << "node";
    for (const auto& name : m.names) out << ',' << name;
    out << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out << labels[r];
        for (const auto& col : m.columns) out << ',' << format_double(col[r]);
        out << '\n';
    }
    write_text(csv, out.str());

    json columns = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c)
        columns.push_back({{"name", m.names[c]}, {"raw_min", m.raw_min[c]}, {"raw_max", m.raw_max[c]}});
    json side = meta;
    side["columns"] = std::move(columns);
    side["rows"] = m.rows();
    write_json(sidecar_path(csv), side);
}

LabelledFeatures read_features(const fs::path& csv) {
    const auto t = read_csv(csv);
    if (t.header.empty() || t.header[0] != "node")
        throw SchemaError("'" + csv.string() + "': first column must be 'node'");
    LabelledFeatures out;
    std::vector<std::vector<double>> cols(t.header.size() - 1);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out.labels.push_back(t.rows[r][0]);
        for (std::size_t c = 1; c < t.header.size(); ++c) cols[c - 1].push_back(parse_double(t.rows[r][c], r + 2));
    }
    for (std::size_t c = 1; c < t.header.size(); ++c) out.matrix.add_column(t.header[c], std::move(cols[c - 1]));
    const auto side = sidecar_path(csv);
    if (fs::exists(side)) {
        const auto j = read_json(side);
        if (j.contains("columns")) {
            for (const auto& col : j.at("columns")) {
                if (auto idx = out.matrix.find(col.at("name").get<std::string>())) {
                    out.matrix.raw_min[*idx] = col.at("raw_min").get<double>();
                    out.matrix.raw_max[*idx] = col.at("raw_max").get<double>();
                }
            }
        }
    }
    return out;
}

void write_predictions(const fs::path& csv, const std::vector<std::string>& labels,
                       const std::vector<double>& predictions) {
    std::ostringstream out;
    out << "node,prediction\n";
    for (std::size_t i = 0; i < predictions.size(); ++i)
        out << (i < labels.size() ? labels[i] : std::to_string(i)) << ',' << format_double(predictions[i]) << '\n';
    write_text(csv, out.str());
}

namespace {

std::string fixed(double v, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

}  // namespace

std::string cv_report_text(const CvReport& r) {
    std::ostringstream out;
    out << "network: " << r.network << "  nodes: " << r.nodes << "  folds: " << r.k << "  seed: " << r.seed << '\n';
    out << std::left << std::setw(18) << "learner" << std::setw(24) << "peak RMSE" << "time RMSE" << '\n';
    for (const char* learner : {"caboost", "random"}) {
        const auto& p = r.at(TargetKind::Peak, learner).result;
        const auto& t = r.at(TargetKind::Time, learner).result;
        out << std::setw(18) << learner << std::setw(24) << (fixed(p.mean) + " (+- " + fixed(p.std) + ")")
            << fixed(t.mean) << " (+- " << fixed(t.std) << ")\n";
    }
    out << std::setw(18) << "simulation error" << std::setw(24) << fixed(r.simulation_error.peak)
        << fixed(r.simulation_error.time) << '\n';
    return out.str();
}

std::string cv_report_csv(const CvReport& r) {
    std::ostringstream out;
    out << "network,target,learner,mean_rmse,std_rmse";
    for (std::uint32_t f = 0; f < r.k; ++f) out << ",fold_" << f;
    out << '\n';
    for (const auto& e : r.entries) {
        out << r.network << ',' << to_string(e.target) << ',' << e.learner << ',' << format_double(e.result.mean)
            << ',' << format_double(e.result.std);
        for (double v : e.result.fold_rmse) out << ',' << format_double(v);
        out << '\n';
    }
    out << r.network << ",peak,simulation_error," << format_double(r.simulation_error.peak) << ",0";
    for (std::uint32_t f = 0; f < r.k; ++f) out << ',';
    out << '\n';
    out << r.network << ",time,simulation_error," << format_double(r.simulation_error.time) << ",0";
    for (std::uint32_t f = 0; f < r.k; ++f) out << ',';
    out << '\n';
    return out.str();
}

json cv_report_json(const CvReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries)
        entries.push_back({{"target", to_string(e.target)},
                           {"learner", e.learner},
                           {"mean_rmse", e.result.mean},
                           {"std_rmse", e.result.std},
                           {"fold_rmse", e.result.fold_rmse}});
    return {{"network", r.network},
            {"nodes", r.nodes},
            {"folds", r.k},
            {"seed", r.seed},
            {"entries", std::move(entries)},
            {"simulation_error", {{"peak", r.simulation_error.peak}, {"time", r.simulation_error.time}}}};
}

std::string transfer_text(const TransferMatrix& m) {
    std::size_t width = 10;
    for (const auto& n : m.names) width = std::max(width, n.size() + 2);
    std::ostringstream out;
    out << "target: " << to_string(m.target) << "  (rows = training network, columns = test network)\n";
    out << std::left << std::setw(static_cast<int>(width)) << "";
    for (const auto& n : m.names) out << std::setw(static_cast<int>(width)) << n;
    out << '\n';
    for (std::size_t i = 0; i < m.names.size(); ++i) {
        out << std::setw(static_cast<int>(width)) << m.names[i];
        for (std::size_t j = 0; j < m.names.size(); ++j) out << std::setw(static_cast<int>(width)) << fixed(m.values[i][j]);
        out << '\n';
    }
    return out.str();
}

std::string transfer_csv(const TransferMatrix& m) {
    std::ostringstream out;
    out << "train\\test";
    for (const auto& n : m.names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < m.names.size(); ++i) {
        out << m.names[i];
        for (double v : m.values[i]) out << ',' << format_double(v);
        out << '\n';
    }
    return out.str();
}

json transfer_json(const TransferMatrix& m) {
    return {{"target", to_string(m.target)},
            {"networks", m.names},
            {"orientation", "rows=training network, columns=test network"},
            {"values", m.values},
            {"raw_rmse", m.raw_rmse}};
}

std::string distribution_values_csv(const std::vector<NamedTargets>& tables) {
    std::ostringstream out;
    out << "network,target,node_index,value\n";
    for (const auto& t : tables) {
        for (std::size_t i = 0; i < t.peak.size(); ++i)
            out << t.name << ",peak," << i << ',' << format_double(t.peak[i]) << '\n';
        for (std::size_t i = 0; i < t.time.size(); ++i)
            out << t.name << ",time," << i << ',' << format_double(t.time[i]) << '\n';
    }
    return out.str();
}

std::string distribution_histogram_csv(const std::vector<NamedTargets>& tables, std::size_t bins) {
    std::ostringstream out;
    out << "network,target,bin,lower,upper,count\n";
    const auto nb = static_cast<double>(bins);
    for (const auto& t : tables) {
        for (auto kind : {TargetKind::Peak, TargetKind::Time}) {
            const auto counts = histogram(kind == TargetKind::Peak ? t.peak : t.time, bins);
            for (std::size_t b = 0; b < bins; ++b)
                out << t.name << ',' << to_string(kind) << ',' << b << ',' << format_double(static_cast<double>(b) / nb)
                    << ',' << format_double(static_cast<double>(b + 1) / nb) << ',' << counts[b] << '\n';
        }
    }
    return out.str();
}

}  // namespace epispread::io
