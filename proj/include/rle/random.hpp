#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace rle {

//---------------------------------------------------------------------------//
/*!
 * SplitMix64 mixer, used to spread a user seed over the Philox key.
 */
constexpr std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 counter-based generator (Salmon et al., SC'11).
 *
 * A stream is the pair (key, stream id); the block counter is the draw index.
 * Streams for different ids never overlap and each is fully determined by
 * (seed, id), independent of the order in which streams are consumed.
 */
class Philox4x32
{
  public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block ctr, Key key)
    {
        for (int round = 0; round < 10; ++round)
        {
            ctr = single_round(ctr, key);
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

  private:
    static Block single_round(const Block& c, const Key& k)
    {
        const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
        const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

//---------------------------------------------------------------------------//
/*!
 * Per-replica random stream: uniforms on (0,1) and standard normals.
 */
class RandomStream
{
  public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    {
        const std::uint64_t k = splitmix64(seed);
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        stream_ = stream_id;
    }

    std::uint64_t next_u64()
    {
        if (used_ == 2)
            refill();
        const std::size_t i = 2 * used_++;
        return (std::uint64_t{block_[i]} << 32) | block_[i + 1];
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard normal by the Box-Muller transform; pairs are cached.
    double normal()
    {
        if (has_spare_)
        {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t blocks_used() const noexcept { return counter_; }

  private:
    void refill()
    {
        const Philox4x32::Block ctr = {static_cast<std::uint32_t>(counter_),
                                       static_cast<std::uint32_t>(counter_ >> 32),
                                       static_cast<std::uint32_t>(stream_),
                                       static_cast<std::uint32_t>(stream_ >> 32)};
        block_ = Philox4x32::generate(ctr, key_);
        ++counter_;
        used_ = 0;
    }

    Philox4x32::Key key_{};
    std::uint64_t stream_ = 0;
    std::uint64_t counter_ = 0;
    Philox4x32::Block block_{};
    std::size_t used_ = 2;
    double spare_ = 0;
    bool has_spare_ = false;
};

}  // namespace rle
