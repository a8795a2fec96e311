#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "epispread/centrality.hpp"
#include "epispread/evaluation.hpp"
#include "epispread/feature_matrix.hpp"
#include "epispread/sir.hpp"

namespace epispread::io {

namespace fs = std::filesystem;

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);
double parse_double(const std::string& s, std::size_t line);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const fs::path& path);
void write_text(const fs::path& path, const std::string& content);
void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

// foo.csv -> foo.json
fs::path sidecar_path(const fs::path& csv);

void write_records(const fs::path& path, const std::vector<SimulationRecord>& records);
std::vector<SimulationRecord> read_records(const fs::path& path);

nlohmann::json targets_metadata(const TargetTable& t);
void write_targets(const fs::path& csv, const TargetTable& t);
// Reads the CSV and its sidecar.
TargetTable read_targets(const fs::path& csv);

nlohmann::json walk_config_json(const WalkConfig& cfg);

// Writes labels + columns, and a sidecar with raw ranges plus `meta`.
void write_features(const fs::path& csv, const std::vector<std::string>& labels, const FeatureMatrix& m,
                    const nlohmann::json& meta);

struct LabelledFeatures {
    std::vector<std::string> labels;
    FeatureMatrix matrix;
};
LabelledFeatures read_features(const fs::path& csv);

void write_predictions(const fs::path& csv, const std::vector<std::string>& labels,
                       const std::vector<double>& predictions);

std::string cv_report_text(const CvReport& r);
std::string cv_report_csv(const CvReport& r);
nlohmann::json cv_report_json(const CvReport& r);

std::string transfer_text(const TransferMatrix& m);
std::string transfer_csv(const TransferMatrix& m);
nlohmann::json transfer_json(const TransferMatrix& m);

struct NamedTargets {
    std::string name;
    std::vector<double> peak;
    std::vector<double> time;
};

// network,target,node_index,value
std::string distribution_values_csv(const std::vector<NamedTargets>& tables);
// network,target,bin,lower,upper,count  (100 bins over [0, 1])
std::string distribution_histogram_csv(const std::vector<NamedTargets>& tables, std::size_t bins = 100);

}  // namespace epispread::io
