#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace crs {

/// Splittable pseudo-random stream in the SplitMix64 family.
///
/// A stream is identified by (master seed, stream id); child streams are
/// derived from the stream's identity, not from its draw position, so the
/// tree of streams used by a computation is independent of thread
/// scheduling and of how many values each stream has produced.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id) {
        std::uint64_t h = mix(master_seed ^ 0x9e3779b97f4a7c15ULL);
        h = mix(h ^ stream_id);
        origin_ = h;
        state_ = mix(h ^ 0x2545f4914f6cdd1dULL);
        gamma_ = to_gamma(mix(h ^ 0x6a09e667f3bcc909ULL));
    }

    /// Independent substream keyed by `id`; does not advance this stream.
    RngStream child(std::uint64_t id) const { return RngStream(origin_, id); }

    std::uint64_t next_u64() {
        state_ += gamma_;
        return mix(state_);
    }

    /// Uniform on the open interval (0, 1); never returns 0 or 1 exactly.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Exponential(rate) via inversion; rate <= 0 yields +infinity.
    /// One uniform is consumed regardless of the rate.
    double next_exponential(double rate) {
        const double u = next_unit();
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log(u) / rate;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    // Odd increment with enough bit transitions, as in SplittableRandom.
    static std::uint64_t to_gamma(std::uint64_t z) {
        std::uint64_t g = z | 1ULL;
        if (std::popcount(g ^ (g >> 1)) < 24) g ^= 0xaaaaaaaaaaaaaaaaULL;
        return g;
    }

    std::uint64_t origin_ = 0;
    std::uint64_t state_ = 0;
    std::uint64_t gamma_ = 0;
};

}  // namespace crs
