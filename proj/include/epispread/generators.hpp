#pragma once

#include <cstdint>

#include "epispread/graph.hpp"

// Deterministic synthetic graphs for tests, fixtures and surrogate datasets.
namespace epispread::generators {

Graph path(std::size_t n);
Graph cycle(std::size_t n);
Graph star(std::size_t leaves);  // node 0 is the centre
Graph complete(std::size_t n);
Graph empty(std::size_t n);

// Circulant graph where node i links to i±1..i±d/2; d-regular for even d < n.
Graph circulant(std::size_t n, std::size_t d);

// Uniformly random simple d-regular graph by the pairing model with restarts.
Graph random_regular(std::size_t n, std::size_t d, std::uint64_t seed);

// G(n, p).
Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed);

// How many links an arriving node makes in preferential attachment.
enum class LinkSpread {
    Fixed,     // floor or ceil of the running mean; minimum degree ~ mean
    Geometric  // 1 + geometric with the running mean; many degree-1 nodes
};

// Growth by preferential attachment until exactly `edges` edges exist.
// The result is connected and heavy-tailed.
Graph preferential_attachment(std::size_t n, std::size_t edges, std::uint64_t seed,
                              LinkSpread spread = LinkSpread::Fixed);

// A preferential-attachment giant component holding `giant_fraction` of the
// nodes with `giant_edges` edges, plus the remaining nodes split into exactly
// `small_components` random trees.
Graph fragmented(std::size_t n, double giant_fraction, std::size_t giant_edges,
                 std::size_t small_components, std::uint64_t seed,
                 LinkSpread spread = LinkSpread::Fixed);

}  // namespace epispread::generators
