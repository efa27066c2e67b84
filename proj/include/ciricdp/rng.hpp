#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace ciricdp {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based generator: draw i of stream s under seed k is
/// philox4x32_10({i_lo, i_hi, s_lo, s_hi}, {k_lo, k_hi}).
///
/// Every draw consumes exactly one block, so the state after n draws is
/// (seed, stream, n) and any draw can be recomputed independently. Traces are
/// golden-filed against this generator; changing the mapping is a breaking change.
class CounterRng {
public:
    static constexpr std::string_view kName = "philox4x32-10/v1";

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : seed_(seed), stream_(stream)
    {
    }

    /// Independent generator for sub-stream `index` (same seed, disjoint counters).
    CounterRng split(std::uint64_t index) const noexcept;

    std::uint64_t next_u64() noexcept;

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }
    std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

} // namespace ciricdp
