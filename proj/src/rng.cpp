#include "stylo/rng.hpp"

#include "stylo/error.hpp"

namespace stylo {

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label)
{
    return mix_seed(seed, fnv1a64(label));
}

std::uint64_t Rng::uniform(std::uint64_t bound)
{
    if (bound == 0) throw ConfigError("Rng::uniform: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const auto r = engine_();
        if (r >= threshold) return r % bound;
    }
}

double Rng::uniform_real()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

} // namespace stylo
