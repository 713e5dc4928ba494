#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace semiknock {

// Seedable stream family with hierarchical derivation. Identical
// (root_seed, path) reproduces identical draws on every platform:
// mt19937_64 output is fixed by the standard and all variate
// transforms below avoid std::*_distribution.
struct RngStream {
    std::uint64_t root_seed = 0;
    std::vector<std::uint64_t> path;

    RngStream() = default;
    explicit RngStream(std::uint64_t seed) : root_seed(seed) {}

    RngStream child(std::uint64_t extension) const {
        RngStream s = *this;
        s.path.push_back(extension);
        return s;
    }

    std::uint64_t state() const;
};

RngStream derive_stream(const RngStream& root, std::uint64_t extension);

// Draw interface over one stream. Construct fresh from a stream wherever
// a deterministic sequence is needed; never share across workers.
class Rng {
public:
    explicit Rng(const RngStream& stream) : engine_(stream.state()) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform on [0, 1) with 53-bit resolution
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // standard normal, Box-Muller (both values used)
    double normal();

    // uniform integer on [0, bound), rejection sampled
    std::uint64_t uniform_int(std::uint64_t bound);

    // uniform permutation of {0, ..., n-1}, Fisher-Yates
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace semiknock
