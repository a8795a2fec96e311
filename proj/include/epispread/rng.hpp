#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace epispread {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a master seed and a tuple of
// indices. The result depends only on its arguments, never on call order.
template <typename... Ts>
constexpr std::uint64_t derive_seed(std::uint64_t master, Ts... parts) noexcept {
    std::uint64_t h = mix64(master);
    ((h = mix64(h ^ mix64(static_cast<std::uint64_t>(parts) + 0x632be59bd9b4e019ULL))), ...);
    return h;
}

// Uniform double in [0, 1) from the top 53 bits; identical on every
// standard library, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection, portable across standard libraries.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) noexcept {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Sampler for the number of Bernoulli(p) trials up to and including the
// first success, support {1, 2, ...}; yields `never` when p == 0.
class GeometricTrials {
public:
    GeometricTrials(double p, std::uint64_t never) noexcept
        : p_(p), never_(never), inv_log_q_(p > 0.0 && p < 1.0 ? 1.0 / std::log1p(-p) : 0.0) {}

    std::uint64_t operator()(Rng& rng) const noexcept {
        if (p_ <= 0.0) return never_;
        if (p_ >= 1.0) return 1;
        const double u = 1.0 - uniform01(rng);  // (0, 1]
        const double k = std::floor(std::log(u) * inv_log_q_);
        if (!(k < static_cast<double>(never_))) return never_;
        return 1 + static_cast<std::uint64_t>(k);
    }

private:
    double p_;
    std::uint64_t never_;
    double inv_log_q_;
};

inline std::uint64_t geometric_trials(Rng& rng, double p, std::uint64_t never) noexcept {
    return GeometricTrials(p, never)(rng);
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace epispread
