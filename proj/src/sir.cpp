#include "epispread/sir.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epispread/error.hpp"
#include "epispread/parallel.hpp"
#include "epispread/rng.hpp"

namespace epispread {

namespace {

// Large enough to never be reached, small enough that t + never cannot overflow.
constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max() / 4;

struct Event {
    std::uint64_t time;
    int delta;
    bool operator<(const Event& o) const { return time < o.time; }
};

}  // namespace

void SirParams::validate() const {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
    if (runs_per_node < 1) throw ConfigError("runs per node must be at least 1");
    if (max_iterations < 1) throw ConfigError("max iterations must be at least 1");
}

std::uint64_t run_seed(std::uint64_t master_seed, NodeId node, std::uint32_t run) {
    return derive_seed(master_seed, 0x51a, node, run);
}

namespace {

// Per-thread buffers reused across runs.
struct Workspace {
    std::vector<std::uint64_t> infect_time;
    std::vector<char> settled;
    std::vector<std::vector<NodeId>> buckets;  // pending infections by iteration
    std::vector<Event> events;

    void reset(std::size_t n) {
        infect_time.assign(n, kNever);
        settled.assign(n, 0);
        events.clear();
    }
};

}  // namespace

SimulationRecord simulate_once(const Graph& g, NodeId seed, const SirParams& params,
                               std::uint64_t rng_seed, std::vector<SirCounts>* trace) {
    const auto n = g.node_count();
    if (seed >= n) throw Error("seed node " + std::to_string(seed) + " out of range");
    params.validate();

    Rng rng(rng_seed);
    const std::uint64_t cap = params.max_iterations;
    const GeometricTrials recovery_delay(params.gamma, kNever);
    const GeometricTrials transmission_delay(params.beta, kNever);

    thread_local Workspace ws;
    ws.reset(n);
    auto& infect_time = ws.infect_time;
    auto& settled = ws.settled;
    auto& buckets = ws.buckets;
    auto& events = ws.events;
    std::uint64_t extinction = 0;

    // Infection times are settled in increasing order (a Dijkstra sweep over
    // integer delays), so a bucket per iteration replaces a heap.
    auto schedule = [&](std::uint64_t t, NodeId v) {
        if (buckets.size() <= t) buckets.resize(t + 1);
        buckets[t].push_back(v);
    };
    infect_time[seed] = 0;
    schedule(0, seed);
    for (std::uint64_t t = 0; t < buckets.size(); ++t) {
        for (std::size_t k = 0; k < buckets[t].size(); ++k) {
            const NodeId u = buckets[t][k];
            if (settled[u] || infect_time[u] != t) continue;
            settled[u] = 1;

            const std::uint64_t infectious = recovery_delay(rng);
            const std::uint64_t recover = t + infectious;
            extinction = std::max(extinction, recover);
            events.push_back({t, +1});
            if (recover <= cap) events.push_back({recover, -1});

            for (NodeId v : g.neighbors(u)) {
                if (settled[v]) continue;
                const std::uint64_t delay = transmission_delay(rng);
                if (delay > infectious) continue;
                const std::uint64_t at = t + delay;
                if (at > cap || at >= infect_time[v]) continue;
                infect_time[v] = at;
                schedule(at, v);
            }
        }
        buckets[t].clear();
    }

    std::sort(events.begin(), events.end());

    SimulationRecord rec;
    rec.seed_node = seed;
    rec.truncated = extinction > cap;
    rec.total_iterations = rec.truncated ? cap : extinction;

    std::size_t infected = 0;
    std::size_t ever = 0;
    std::uint64_t last_time = 0;
    auto emit = [&](std::uint64_t until) {
        if (!trace) return;
        while (trace->size() <= until)
            trace->push_back({n - ever, infected, ever - infected});
    };
    if (trace) trace->clear();
    for (std::size_t i = 0; i < events.size();) {
        const std::uint64_t t = events[i].time;
        if (t > 0) emit(t - 1);
        for (; i < events.size() && events[i].time == t; ++i) {
            if (events[i].delta > 0) {
                ++infected;
                ++ever;
            } else {
                --infected;
            }
        }
        if (infected > rec.peak_infected) {
            rec.peak_infected = infected;
            rec.peak_iteration = t;
        }
        last_time = t;
    }
    emit(std::max(last_time, rec.total_iterations));
    return rec;
}

TargetTable aggregate_targets(const std::vector<SimulationRecord>& records, std::size_t node_count) {
    if (node_count == 0) throw EmptyInputError("cannot build targets for an empty graph");
    std::vector<double> peak_sum(node_count, 0.0), time_sum(node_count, 0.0);
    std::vector<std::size_t> runs(node_count, 0);
    for (const auto& r : records) {
        if (r.seed_node >= node_count) throw Error("simulation record references unknown node");
        peak_sum[r.seed_node] += static_cast<double>(r.peak_infected);
        time_sum[r.seed_node] += static_cast<double>(r.peak_iteration);
        ++runs[r.seed_node];
    }
    TargetTable t;
    t.node_count = node_count;
    t.peak.resize(node_count);
    t.time.resize(node_count);
    double max_time = 0.0;
    for (std::size_t u = 0; u < node_count; ++u) {
        if (runs[u] == 0) throw Error("no simulation records for node " + std::to_string(u));
        const auto k = static_cast<double>(runs[u]);
        t.peak[u] = peak_sum[u] / k / static_cast<double>(node_count);
        t.time[u] = time_sum[u] / k;
        max_time = std::max(max_time, t.time[u]);
    }
    t.time_norm = max_time > 0.0 ? max_time : 1.0;
    for (auto& v : t.time) v /= t.time_norm;
    return t;
}

TargetBuild build_targets(const Graph& g, const SirParams& params, std::uint64_t master_seed,
                          unsigned threads) {
    params.validate();
    const auto n = g.node_count();
    if (n == 0) throw EmptyInputError("cannot build targets for an empty graph");
    const auto runs = params.runs_per_node;
    TargetBuild out;
    out.records.resize(n * runs);
    parallel_for(n, threads, [&](std::size_t u) {
        const auto node = static_cast<NodeId>(u);
        for (std::uint32_t r = 0; r < runs; ++r) {
            auto rec = simulate_once(g, node, params, run_seed(master_seed, node, r));
            rec.run_index = r;
            out.records[u * runs + r] = rec;
        }
    });
    out.table = aggregate_targets(out.records, n);
    out.table.labels = g.labels();
    out.table.params = params;
    out.table.master_seed = master_seed;
    return out;
}

SimulationError simulation_error(const std::vector<SimulationRecord>& records, const TargetTable& targets) {
    const auto n = targets.node_count;
    if (n == 0 || targets.peak.size() != n || targets.time.size() != n)
        throw Error("target table is inconsistent");
    const double peak_scale = 1.0 / static_cast<double>(n);
    const double time_scale = 1.0 / targets.time_norm;

    // Deviations are taken on raw counts and scaled once, so identical runs
    // give exactly zero.
    std::vector<double> peak_mean(n, 0.0), time_mean(n, 0.0);
    std::vector<std::size_t> runs(n, 0);
    for (const auto& r : records) {
        if (r.seed_node >= n) throw Error("simulation record references a node outside the target table");
        peak_mean[r.seed_node] += static_cast<double>(r.peak_infected);
        time_mean[r.seed_node] += static_cast<double>(r.peak_iteration);
        ++runs[r.seed_node];
    }
    for (std::size_t u = 0; u < n; ++u) {
        if (runs[u] == 0)
            throw Error("simulation records do not cover node " + std::to_string(u));
        peak_mean[u] /= static_cast<double>(runs[u]);
        time_mean[u] /= static_cast<double>(runs[u]);
    }
    std::vector<double> peak_dev(n, 0.0), time_dev(n, 0.0);
    for (const auto& r : records) {
        peak_dev[r.seed_node] += std::abs(static_cast<double>(r.peak_infected) - peak_mean[r.seed_node]);
        time_dev[r.seed_node] += std::abs(static_cast<double>(r.peak_iteration) - time_mean[r.seed_node]);
    }
    double peak_sq = 0.0, time_sq = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        const double dp = peak_dev[u] / static_cast<double>(runs[u]);
        const double dt = time_dev[u] / static_cast<double>(runs[u]);
        peak_sq += dp * dp;
        time_sq += dt * dt;
    }
    return {std::sqrt(peak_sq / static_cast<double>(n)) * peak_scale,
            std::sqrt(time_sq / static_cast<double>(n)) * time_scale};
}

}  // namespace epispread
