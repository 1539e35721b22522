#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace tinyalign {

// splitmix64 finalizer; used to derive per-stream seeds so results do not
// depend on evaluation order.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t index = 0) {
    return mix64(master ^ mix64(stream ^ mix64(index)));
}

// Uniform double in [0,1) from the top 53 bits of the engine output.
// std::uniform_real_distribution is not pinned by the standard; this is.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double logsumexp(std::span<const double> v) {
    double m = v[0];
    for (double x : v)
        if (x > m) m = x;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

// Fisher-Yates with our own engine draw so shuffles are reproducible
// across standard-library implementations.
template <class T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

// FNV-1a over bytes; stable content hash for manifests.
inline uint64_t fnv1a(std::span<const char> bytes) {
    uint64_t h = 1469598103934665603ull;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace tinyalign
