#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epispread/graph.hpp"

namespace epispread {

struct SirParams {
    double beta = 0.05;   // per infected neighbour, per iteration
    double gamma = 0.005; // per iteration
    std::uint64_t max_iterations = 10000;
    std::uint32_t runs_per_node = 10;

    // Throws ConfigError on out-of-range values.
    void validate() const;
};

struct SimulationRecord {
    NodeId seed_node = 0;
    std::uint32_t run_index = 0;
    std::size_t peak_infected = 0;
    std::uint64_t peak_iteration = 0;
    std::uint64_t total_iterations = 0;
    bool truncated = false;  // max_iterations reached with nodes still infected

    bool operator==(const SimulationRecord&) const = default;
};

struct SirCounts {
    std::size_t susceptible = 0;
    std::size_t infected = 0;
    std::size_t recovered = 0;
};

// Discrete-time SIR from a single seed. At each iteration, computed from the
// state at its start, every susceptible node with k infected neighbours is
// infected with probability 1 - (1 - beta)^k, and every node infected before
// the iteration recovers with probability gamma.
//
// The process is sampled event by event: each infected node draws its
// recovery delay ~ Geometric(gamma) and each outgoing transmission delay
// ~ Geometric(beta), a transmission counting when it arrives no later than
// the recovery iteration. This has the same law as flipping every coin of the
// synchronous description and costs O(E log V) per run.
//
// When `trace` is non-null it receives the compartment sizes for iterations
// 0..total_iterations.
SimulationRecord simulate_once(const Graph& g, NodeId seed, const SirParams& params,
                               std::uint64_t rng_seed, std::vector<SirCounts>* trace = nullptr);

// Stream seed of run `run` from node `node`.
std::uint64_t run_seed(std::uint64_t master_seed, NodeId node, std::uint32_t run);

// Normalised per-node regression targets.
struct TargetTable {
    std::vector<std::string> labels;
    std::vector<double> peak;  // mean peak infected / node_count
    std::vector<double> time;  // mean peak iteration / time_norm
    double time_norm = 1.0;    // max over nodes of the mean peak iteration (1 if that max is 0)
    std::size_t node_count = 0;
    SirParams params;
    std::uint64_t master_seed = 0;

    const std::vector<double>& column(bool time_target) const { return time_target ? time : peak; }
};

struct TargetBuild {
    TargetTable table;
    std::vector<SimulationRecord> records;  // ordered by (seed_node, run_index)
};

// Runs params.runs_per_node simulations from every node. Output is identical
// for every `threads` value (0 = hardware concurrency).
TargetBuild build_targets(const Graph& g, const SirParams& params, std::uint64_t master_seed,
                          unsigned threads = 1);

// Aggregates records into targets. Records must cover nodes 0..node_count-1.
TargetTable aggregate_targets(const std::vector<SimulationRecord>& records, std::size_t node_count);

struct SimulationError {
    double peak = 0.0;
    double time = 0.0;
};

// RMSE (against zero) of the per-node mean absolute deviation of single runs
// from the node mean, using the table's normalisation constants.
SimulationError simulation_error(const std::vector<SimulationRecord>& records, const TargetTable& targets);

}  // namespace epispread
