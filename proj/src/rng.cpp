#include "prosim/rng.hpp"

namespace prosim
{

std::uint64_t
MixSeed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, StreamLabel label)
    : m_seed(seed),
      m_label(label),
      m_engine(MixSeed(MixSeed(seed) ^ (static_cast<std::uint64_t>(label) << 56)))
{
}

double
RngStream::Uniform()
{
    // 53 random mantissa bits; std::uniform_real_distribution is not
    // reproducible across standard libraries.
    return static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
}

std::uint64_t
RngStream::Below(std::uint64_t bound)
{
    if (bound == 0)
    {
        return 0;
    }
    // Rejection sampling keeps the result unbiased.
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
    std::uint64_t x;
    do
    {
        x = m_engine();
    } while (x >= limit);
    return x % bound;
}

} // namespace prosim
