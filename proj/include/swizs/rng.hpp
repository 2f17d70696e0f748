#pragma once
// Counter-based, splittable RNG.
//
// Every deviate is a pure function of (seed, stream, counter), so any draw can
// be regenerated in isolation and results are independent of thread count and
// evaluation order.  Streams are cheap: a stream is just a 64-bit label.
//
// Stream layout used by the harness: for Monte Carlo trial t with S posterior
// draws, stream_id = t*(S+1) + s, where s = 0 is the observed-data batch and
// s = 1..S are the simulated pivotal batches.  Design matrices and priors use
// dedicated offset constants so they never collide with pivotal streams.

#include <cstdint>
#include <cmath>

namespace swizs {

namespace detail {
// SplitMix64 finalizer (Stafford mix 13): bijective 64-bit mixer.
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
constexpr uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL;
} // namespace detail

// Raw 64-bit word at position `ctr` of stream (seed, stream).
inline uint64_t rng_word(uint64_t seed, uint64_t stream, uint64_t ctr) {
    using namespace detail;
    uint64_t key = mix64(seed + GOLDEN * (stream + 1));
    return mix64(key + GOLDEN * (ctr + 1));
}

// Uniform deviate strictly inside (0,1): safe to pass to log().
inline double rng_uniform(uint64_t seed, uint64_t stream, uint64_t ctr) {
    return (static_cast<double>(rng_word(seed, stream, ctr) >> 11) + 0.5)
           * 0x1.0p-53;
}

// Stateful view over one stream, for sequential consumption.
class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream)
        : seed_(seed), stream_(stream), ctr_(0) {}

    double uniform() { return rng_uniform(seed_, stream_, ctr_++); }

    // U(a,b)
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Standard normal via Box-Muller (cosine branch); consumes two uniforms.
    double normal() {
        double u1 = uniform(), u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1))
               * std::cos(2.0 * M_PI * u2);
    }

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }

private:
    uint64_t seed_, stream_, ctr_;
};

} // namespace swizs
