#pragma once

#include <cstdint>

namespace cantor {

// Counter-based generator: every draw is a pure function of (seed, stream,
// counter), so parallel consumers get identical numbers regardless of
// scheduling. The mix is the splitmix64 finalizer applied to a Weyl-sequenced
// key; the exact output sequence is part of the reproducibility contract and
// must not change between releases.
namespace rng {

inline uint64_t splitmix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t hash3(uint64_t seed, uint64_t stream, uint64_t counter) {
    uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
    h = splitmix64(h ^ stream);
    return splitmix64(h ^ counter);
}

/// Uniform double in [0,1) from the top 53 bits.
inline double uniform01(uint64_t seed, uint64_t stream, uint64_t counter) {
    return static_cast<double>(hash3(seed, stream, counter) >> 11) * 0x1.0p-53;
}

/// Rademacher sign in {-1,+1}.
inline int sign(uint64_t seed, uint64_t stream, uint64_t counter) {
    return (hash3(seed, stream, counter) >> 63) ? 1 : -1;
}

} // namespace rng

/// Sequential view of one (seed, stream) counter lane.
class RngStream {
public:
    RngStream(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

    double uniform01() { return rng::uniform01(seed_, stream_, counter_++); }
    int sign() { return rng::sign(seed_, stream_, counter_++); }

    /// Uniform point on the unit circle.
    void unit_circle(double& cx, double& cy);

private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t counter_ = 0;
};

} // namespace cantor
