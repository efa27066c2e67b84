#include "ciricdp/rng.hpp"

namespace ciricdp {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

inline std::uint32_t low32(std::uint64_t v) noexcept { return static_cast<std::uint32_t>(v); }
inline std::uint32_t high32(std::uint64_t v) noexcept { return static_cast<std::uint32_t>(v >> 32); }

} // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

CounterRng CounterRng::split(std::uint64_t index) const noexcept
{
    // Stream ids are mixed so that split(i).split(j) does not collide with split(j).split(i).
    std::uint64_t z = stream_ + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return CounterRng(seed_, z);
}

std::uint64_t CounterRng::next_u64() noexcept
{
    const auto block = philox4x32_10({low32(counter_), high32(counter_), low32(stream_), high32(stream_)},
                                     {low32(seed_), high32(seed_)});
    ++counter_;
    return (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
}

double CounterRng::uniform() noexcept
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

} // namespace ciricdp
