// Seeded, labelled random streams.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace prosim
{

enum class StreamLabel : std::uint8_t
{
    Placement = 1,
    Mobility = 2,
    Traffic = 3,
    Channel = 4, ///< per-reception loss draws
};

/**
 * Independent pseudo-random stream keyed by (seed, label). Two streams
 * with different labels never share state, so drawing from one cannot
 * shift the sequence of another.
 */
class RngStream
{
  public:
    RngStream(std::uint64_t seed, StreamLabel label);

    std::uint64_t NextU64() { return m_engine(); }

    /// Uniform in [0, 1).
    double Uniform();

    /// Uniform in [lo, hi).
    double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

    /// Uniform integer in [0, bound).
    std::uint64_t Below(std::uint64_t bound);

    std::uint64_t Seed() const { return m_seed; }
    StreamLabel Label() const { return m_label; }

  private:
    std::uint64_t m_seed;
    StreamLabel m_label;
    std::mt19937_64 m_engine;
};

/// splitmix64 finaliser; used to derive per-stream seeds.
std::uint64_t MixSeed(std::uint64_t x);

} // namespace prosim
