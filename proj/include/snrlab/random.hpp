#pragma once
// random.hpp - counter-addressed pseudo-random streams
//
// Every (seed, scan, pixel) task gets its own SplitMix64 stream, so Monte
// Carlo output does not depend on execution order or thread count.

#include <cstdint>
#include <limits>

namespace snrlab {

class Stream {
public:
    using result_type = std::uint64_t;

    explicit constexpr Stream(std::uint64_t state) noexcept : state_(state) {}

    /// Stream for task (scan, pixel) of a run seeded with `seed`.
    static constexpr Stream at(std::uint64_t seed, std::uint64_t scan, std::uint64_t pixel) noexcept {
        std::uint64_t h = mix(seed ^ 0x5851f42d4c957f2dULL);
        h = mix(h ^ (scan + 0x9e3779b97f4a7c15ULL));
        h = mix(h ^ (pixel + 0xd1b54a32d192ed03ULL));
        return Stream(h);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

private:
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace snrlab
