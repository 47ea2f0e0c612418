#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace stylo {

/// 64-bit FNV-1a. Used to derive stable sub-seeds and config hashes.
std::uint64_t fnv1a64(std::string_view bytes);

/// SplitMix64 finalizer; mixes a seed with a stream label or index.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

/// Portable seeded generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Distributions are implemented here rather than taken from
/// <random>, whose algorithms are implementation-defined:
///  - uniform(n): rejection sampling on the raw 64-bit output, discarding
///    values below (2^64 - n) mod n, then reducing modulo n;
///  - uniform_real(): top 53 bits scaled by 2^-53, in [0, 1);
///  - shuffle: Fisher-Yates from the last element down, swap index drawn
///    with uniform(i + 1).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    std::uint64_t uniform(std::uint64_t bound);
    double uniform_real();

    template <typename T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

    /// Moves a uniformly random subset of size k to the front of `items`
    /// (partial Fisher-Yates, front to back).
    template <typename T>
    void partial_shuffle(std::span<T> items, std::size_t k)
    {
        for (std::size_t i = 0; i < k && i < items.size(); ++i) {
            const auto j = i + static_cast<std::size_t>(uniform(items.size() - i));
            using std::swap;
            swap(items[i], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace stylo
