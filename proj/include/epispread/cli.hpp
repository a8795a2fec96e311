#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "epispread/centrality.hpp"
#include "epispread/gbt.hpp"
#include "epispread/sir.hpp"

namespace epispread::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNonConvergence = 3 };

struct RunConfig {
    std::string network;
    std::vector<std::string> networks;
    std::string out_dir = "out";
    std::string delimiter = "auto";  // auto | whitespace | comma
    bool header_skip = false;

    SirParams sir;
    WalkConfig walk;
    GbtConfig gbt;
    std::uint32_t k_folds = 5;
    std::uint64_t master_seed = 42;
    std::string target = "both";  // peak | time | both
    bool largest_component = false;
    bool clamp = false;
    bool strict = false;
    std::uint32_t random_features = 0;  // featurize: 0 = centrality features

    std::string features;
    std::vector<std::string> targets;
    std::string model;

    // Execution knob only; never part of the echoed configuration.
    unsigned threads = 0;

    void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
// Fields absent from `j` keep their current values.
void merge_json(RunConfig& cfg, const nlohmann::json& j);

// Entry point shared by the binary and the tests. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace epispread::cli
