#include "epispread/generators.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "epispread/error.hpp"
#include "epispread/rng.hpp"

namespace epispread::generators {

namespace {

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

Graph build(std::size_t n, const EdgeList& edges) { return Graph::from_edges(n, edges); }

// Appends a preferential-attachment component on nodes [first, first + n).
void grow_preferential(EdgeList& edges, NodeId first, std::size_t n, std::size_t target_edges,
                       LinkSpread spread, Rng& rng) {
    if (n == 0) return;
    if (n == 1) return;
    const std::size_t max_edges = n * (n - 1) / 2;
    target_edges = std::min(target_edges, max_edges);
    target_edges = std::max(target_edges, n - 1);

    // Seed clique sized so that later arrivals can attach enough links.
    const double mean_links = static_cast<double>(target_edges) / static_cast<double>(n);
    std::size_t core = std::min<std::size_t>(n, static_cast<std::size_t>(mean_links) + 2);
    std::set<std::pair<NodeId, NodeId>> present;
    std::vector<NodeId> endpoints;  // each node repeated once per incident edge
    auto add = [&](NodeId a, NodeId b) {
        if (a == b) return false;
        auto key = std::minmax(a, b);
        if (!present.insert({key.first, key.second}).second) return false;
        edges.emplace_back(key.first, key.second);
        endpoints.push_back(a);
        endpoints.push_back(b);
        return true;
    };
    for (std::size_t i = 0; i < core; ++i)
        for (std::size_t j = i + 1; j < core; ++j)
            if (present.size() < target_edges || j == i + 1)
                add(first + static_cast<NodeId>(i), first + static_cast<NodeId>(j));

    for (std::size_t i = core; i < n; ++i) {
        const std::size_t remaining_nodes = n - i;
        const std::size_t remaining_edges =
            target_edges > present.size() ? target_edges - present.size() : 0;
        const double want = static_cast<double>(remaining_edges) / static_cast<double>(remaining_nodes);
        std::size_t links;
        if (spread == LinkSpread::Geometric) {
            // 1 + Geometric with mean `want`
            links = want > 1.0 ? geometric_trials(rng, 1.0 / want, i) : 1;
        } else {
            links = static_cast<std::size_t>(want);
            if (uniform01(rng) < want - static_cast<double>(links)) ++links;
        }
        links = std::clamp<std::size_t>(links, 1, i);
        const auto node = first + static_cast<NodeId>(i);
        std::size_t made = 0;
        std::size_t attempts = 0;
        while (made < links && attempts < 64 * links) {
            ++attempts;
            const NodeId other = endpoints[uniform_index(rng, endpoints.size())];
            if (add(node, other)) ++made;
        }
        if (made == 0) add(node, first + static_cast<NodeId>(uniform_index(rng, i)));
    }
    // Top up between existing nodes, preferentially, to hit the target exactly.
    for (std::size_t attempts = 0; present.size() < target_edges && attempts < 1000 * target_edges; ++attempts) {
        const NodeId a = endpoints[uniform_index(rng, endpoints.size())];
        const NodeId b = first + static_cast<NodeId>(uniform_index(rng, n));
        add(a, b);
    }
}

}  // namespace

Graph path(std::size_t n) {
    EdgeList e;
    for (std::size_t i = 1; i < n; ++i) e.emplace_back(i - 1, i);
    return build(n, e);
}

Graph cycle(std::size_t n) {
    EdgeList e;
    for (std::size_t i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    return build(n, e);
}

Graph star(std::size_t leaves) {
    EdgeList e;
    for (std::size_t i = 1; i <= leaves; ++i) e.emplace_back(0, i);
    return build(leaves + 1, e);
}

Graph complete(std::size_t n) {
    EdgeList e;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return build(n, e);
}

Graph empty(std::size_t n) { return build(n, {}); }

Graph circulant(std::size_t n, std::size_t d) {
    if (d % 2 != 0 || d >= n) throw Error("circulant graph needs even degree below node count");
    EdgeList e;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 1; k <= d / 2; ++k) e.emplace_back(i, (i + k) % n);
    return build(n, e);
}

Graph random_regular(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (d >= n || (n * d) % 2 != 0) throw Error("no simple d-regular graph for these parameters");
    Rng rng(derive_seed(seed, 0x5e6));
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<NodeId> stubs;
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t k = 0; k < d; ++k) stubs.push_back(static_cast<NodeId>(u));
        shuffle(stubs, rng);
        std::set<std::pair<NodeId, NodeId>> seen;
        bool ok = true;
        EdgeList e;
        for (std::size_t i = 0; i < stubs.size(); i += 2) {
            auto [a, b] = std::minmax(stubs[i], stubs[i + 1]);
            if (a == b || !seen.insert({a, b}).second) {
                ok = false;
                break;
            }
            e.emplace_back(a, b);
        }
        if (ok) return build(n, e);
    }
    throw Error("random_regular: pairing model did not produce a simple graph");
}

Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0xe6));
    EdgeList e;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (uniform01(rng) < p) e.emplace_back(i, j);
    return build(n, e);
}

Graph preferential_attachment(std::size_t n, std::size_t edges, std::uint64_t seed, LinkSpread spread) {
    Rng rng(derive_seed(seed, 0xba));
    EdgeList e;
    grow_preferential(e, 0, n, edges, spread, rng);
    return build(n, e);
}

Graph fragmented(std::size_t n, double giant_fraction, std::size_t giant_edges,
                 std::size_t small_components, std::uint64_t seed, LinkSpread spread) {
    Rng rng(derive_seed(seed, 0xf4));
    const auto giant = static_cast<std::size_t>(giant_fraction * static_cast<double>(n) + 0.5);
    if (giant > n) throw Error("giant component larger than the graph");
    const std::size_t rest = n - giant;
    if (small_components > rest || (rest > 0 && small_components == 0))
        throw Error("cannot split the remaining nodes into the requested components");
    EdgeList e;
    grow_preferential(e, 0, giant, giant_edges, spread, rng);

    // Every small component gets one node, the surplus is spread at random.
    std::vector<std::size_t> sizes(small_components, 1);
    for (std::size_t k = small_components; k < rest; ++k) ++sizes[uniform_index(rng, small_components)];
    std::size_t next = giant;
    for (auto size : sizes) {
        for (std::size_t k = 1; k < size; ++k) {
            const auto parent = next + uniform_index(rng, k);
            e.emplace_back(static_cast<NodeId>(parent), static_cast<NodeId>(next + k));
        }
        next += size;
    }
    return build(n, e);
}

}  // namespace epispread::generators
