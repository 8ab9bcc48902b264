// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SPDF_RNG_HPP
#define SPDF_RNG_HPP

#include "spdf/types.hpp"

#include <cstdint>
#include <random>

namespace spdf {

/// splitmix64 step; used both as a generator seeder and as a counter-based
/// seed splitter so parallel schedules cannot reorder randomness.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and up to four
/// counters. Pure function of its arguments.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0,
                                 std::uint64_t d = 0) {
    std::uint64_t s = master;
    splitmix64(s);
    s ^= a;
    splitmix64(s);
    s ^= b;
    splitmix64(s);
    s ^= c;
    splitmix64(s);
    s ^= d;
    return splitmix64(s);
}

/// Deterministic random source. All distribution transforms are implemented
/// here instead of <random> distributions, which are implementation-defined;
/// sequences are therefore identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

    /// Standard normal (Box-Muller, pair cached).
    double gaussian();

    Vec3 gaussian_vec3() { return {gaussian(), gaussian(), gaussian()}; }

    /// Uniform direction on the unit sphere.
    Vec3 unit_vector();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_index(i)]);
        }
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace spdf

#endif  // SPDF_RNG_HPP
