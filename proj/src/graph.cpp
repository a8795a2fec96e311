#include "epispread/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "epispread/error.hpp"

namespace epispread {

Graph Graph::from_edges(std::size_t node_count, std::span<const std::pair<NodeId, NodeId>> edges,
                        std::vector<std::string> labels) {
    Graph g;
    std::vector<std::size_t> degree(node_count, 0);
    for (auto [u, v] : edges) {
        if (u >= node_count || v >= node_count)
            throw Error("edge endpoint out of range");
        if (u == v) continue;
        ++degree[u];
        ++degree[v];
    }
    g.offsets_.assign(node_count + 1, 0);
    std::partial_sum(degree.begin(), degree.end(), g.offsets_.begin() + 1);
    std::vector<NodeId> raw(g.offsets_.back());
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [u, v] : edges) {
        if (u == v) continue;
        raw[fill[u]++] = v;
        raw[fill[v]++] = u;
    }
    // Sort and deduplicate each adjacency list, then compact.
    std::vector<std::size_t> offsets(node_count + 1, 0);
    std::size_t out = 0;
    for (std::size_t u = 0; u < node_count; ++u) {
        auto first = raw.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u]);
        auto last = raw.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u + 1]);
        std::sort(first, last);
        last = std::unique(first, last);
        offsets[u] = out;
        for (auto it = first; it != last; ++it) raw[out++] = *it;
    }
    offsets[node_count] = out;
    raw.resize(out);
    g.offsets_ = std::move(offsets);
    g.targets_ = std::move(raw);

    if (labels.empty()) {
        labels.reserve(node_count);
        for (std::size_t u = 0; u < node_count; ++u) labels.push_back(std::to_string(u));
    }
    if (labels.size() != node_count) throw Error("label count does not match node count");
    g.labels_ = std::move(labels);
    g.components_ = connected_components(g);
    return g;
}

std::size_t Graph::max_degree() const noexcept {
    std::size_t best = 0;
    for (NodeId u = 0; u < node_count(); ++u) best = std::max(best, degree(u));
    return best;
}

GraphStats Graph::stats() const {
    GraphStats s;
    s.nodes = node_count();
    s.edges = edge_count();
    s.components = components_.sizes.size();
    if (s.nodes > 0) {
        const auto largest = *std::max_element(components_.sizes.begin(), components_.sizes.end());
        s.largest_component_fraction = static_cast<double>(largest) / static_cast<double>(s.nodes);
    }
    return s;
}

Components connected_components(const Graph& g) {
    constexpr auto unset = static_cast<std::uint32_t>(-1);
    const auto n = g.node_count();
    Components c;
    c.label.assign(n, unset);
    std::vector<NodeId> queue;
    queue.reserve(n);
    for (NodeId start = 0; start < n; ++start) {
        if (c.label[start] != unset) continue;
        const auto id = static_cast<std::uint32_t>(c.sizes.size());
        queue.clear();
        queue.push_back(start);
        c.label[start] = id;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            for (NodeId v : g.neighbors(queue[head])) {
                if (c.label[v] == unset) {
                    c.label[v] = id;
                    queue.push_back(v);
                }
            }
        }
        c.sizes.push_back(queue.size());
    }
    return c;
}

std::size_t second_neighbor_count(const Graph& g, NodeId u) {
    if (u >= g.node_count()) throw Error("node id " + std::to_string(u) + " out of range");
    std::vector<NodeId> seen;
    for (NodeId v : g.neighbors(u))
        for (NodeId w : g.neighbors(v))
            if (w != u) seen.push_back(w);
    std::sort(seen.begin(), seen.end());
    return static_cast<std::size_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
}

namespace {

bool is_comment_or_blank(const std::string& line) {
    const auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string::npos || line[pos] == '%' || line[pos] == '#';
}

std::vector<std::string> split_tokens(const std::string& line, Delimiter delimiter) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) tokens.push_back(std::move(current));
        current.clear();
    };
    for (char ch : line) {
        const bool ws = ch == ' ' || ch == '\t' || ch == '\r';
        const bool sep = delimiter == Delimiter::Comma ? (ch == ',' || ch == '\r')
                         : delimiter == Delimiter::Whitespace ? ws
                                                               : (ws || ch == ',');
        if (sep)
            flush();
        else
            current.push_back(ch);
    }
    flush();
    return tokens;
}

}  // namespace

LoadedGraph parse_edge_list(std::istream& in, const EdgeListOptions& options) {
    std::unordered_map<std::string, NodeId> ids;
    std::vector<std::string> labels;
    std::vector<std::pair<NodeId, NodeId>> edges;
    IngestReport report;

    auto intern = [&](std::string token) {
        auto [it, inserted] = ids.try_emplace(token, static_cast<NodeId>(labels.size()));
        if (inserted) labels.push_back(std::move(token));
        return it->second;
    };

    std::string line;
    std::size_t line_no = 0;
    bool header_pending = options.header_skip;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        auto tokens = split_tokens(line, options.delimiter);
        // Extra columns (weights, timestamps) are ignored.
        if (tokens.size() < 2) throw ParseError("expected two node identifiers", line_no);
        ++report.lines_read;
        const NodeId u = intern(std::move(tokens[0]));
        const NodeId v = intern(std::move(tokens[1]));
        if (u == v) {
            ++report.self_loops_dropped;
            continue;
        }
        edges.emplace_back(std::min(u, v), std::max(u, v));
    }
    if (labels.empty()) throw EmptyInputError("edge list contains no edges");

    std::vector<std::pair<NodeId, NodeId>> unique_edges = edges;
    std::sort(unique_edges.begin(), unique_edges.end());
    unique_edges.erase(std::unique(unique_edges.begin(), unique_edges.end()), unique_edges.end());
    report.duplicates_dropped = edges.size() - unique_edges.size();

    const auto n = labels.size();
    return {Graph::from_edges(n, unique_edges, std::move(labels)), report};
}

LoadedGraph load_edge_list(const std::filesystem::path& path, const EdgeListOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open edge list '" + path.string() + "'");
    return parse_edge_list(in, options);
}

}  // namespace epispread
