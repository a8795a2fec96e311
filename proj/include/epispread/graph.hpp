#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace epispread {

using NodeId = std::uint32_t;

struct GraphStats {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t components = 0;
    double largest_component_fraction = 0.0;
};

struct Components {
    std::vector<std::uint32_t> label;  // per node, 0-based, numbered by first node visited
    std::vector<std::size_t> sizes;    // indexed by label

    bool operator==(const Components&) const = default;
};

// Immutable undirected simple graph in CSR form. Node ids are dense and
// 0-based; labels keep the identifiers from the source file.
class Graph {
public:
    Graph() = default;

    // Builds from an arbitrary edge list. Self-loops and duplicate edges
    // (in either direction) are dropped. Labels default to the decimal id.
    static Graph from_edges(std::size_t node_count,
                            std::span<const std::pair<NodeId, NodeId>> edges,
                            std::vector<std::string> labels = {});

    std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t edge_count() const noexcept { return targets_.size() / 2; }

    std::span<const NodeId> neighbors(NodeId u) const noexcept {
        return {targets_.data() + offsets_[u], targets_.data() + offsets_[u + 1]};
    }
    std::size_t degree(NodeId u) const noexcept { return offsets_[u + 1] - offsets_[u]; }
    std::size_t max_degree() const noexcept;

    const std::string& label(NodeId u) const { return labels_.at(u); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    std::uint32_t component_id(NodeId u) const noexcept { return components_.label[u]; }
    const Components& components() const noexcept { return components_; }

    GraphStats stats() const;

    bool operator==(const Graph&) const = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> targets_;
    std::vector<std::string> labels_;
    Components components_;
};

// Breadth-first component labelling.
Components connected_components(const Graph& g);

// Number of distinct nodes w != u reachable from u by a walk of exactly two
// edges. Direct neighbours that are also two hops away are counted.
std::size_t second_neighbor_count(const Graph& g, NodeId u);

enum class Delimiter { Auto, Whitespace, Comma };

struct EdgeListOptions {
    Delimiter delimiter = Delimiter::Auto;
    // Skips the first non-comment line (Matrix Market size header).
    bool header_skip = false;
};

struct IngestReport {
    std::size_t lines_read = 0;
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_dropped = 0;
};

struct LoadedGraph {
    Graph graph;
    IngestReport report;
};

LoadedGraph load_edge_list(const std::filesystem::path& path, const EdgeListOptions& options = {});
LoadedGraph parse_edge_list(std::istream& in, const EdgeListOptions& options = {});

}  // namespace epispread
