#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace autolinc {

// FNV-1a, used both for gradient fingerprints and for deriving
// independent seed streams from a single master seed.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t hash_combine(uint64_t h, uint64_t v) { return fnv1a(&v, sizeof(v), h); }

// Named seed stream: every consumer of randomness derives its own seed
// from (master seed, stream name, index), so toggling one feature never
// perturbs another feature's stream.
inline uint64_t derive_seed(uint64_t master, std::string_view stream, uint64_t index = 0) {
    uint64_t h = fnv1a(stream.data(), stream.size());
    h = hash_combine(h, master);
    h = hash_combine(h, index);
    return h;
}

inline std::mt19937_64 make_rng(uint64_t master, std::string_view stream, uint64_t index = 0) {
    return std::mt19937_64(derive_seed(master, stream, index));
}

}  // namespace autolinc
