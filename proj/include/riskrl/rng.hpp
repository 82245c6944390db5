#pragma once

#include <cstdint>

namespace riskrl {

/// SplitMix64 generator. Counter-based, so streams are cheap to fork:
/// every stochastic operation takes an explicit seed and derived streams
/// are produced with derive_seed. Output sequence is platform-independent,
/// which keeps artifacts byte-identical across runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    int below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

    /// Index sampled from a discrete distribution given as (weight, count).
    /// Weights must be nonnegative; they need not be normalized.
    template <class GetW>
    int sample_index(int count, GetW&& w) {
        double total = 0.0;
        for (int i = 0; i < count; ++i) total += w(i);
        double u = uniform() * total;
        double acc = 0.0;
        for (int i = 0; i < count; ++i) {
            acc += w(i);
            if (u < acc) return i;
        }
        return count - 1;
    }

private:
    std::uint64_t state_;
};

/// Stable seed derivation for substreams (restart index, sweep cell, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    Rng r(base ^ (0x632be59bd9b4e019ull + stream * 0x100000001b3ull));
    return r.next_u64();
}

} // namespace riskrl
