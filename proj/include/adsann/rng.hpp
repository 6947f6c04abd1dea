// Copyright 2026 the adsann project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>

namespace adsann {

/// Stream tags for domain separation: components seeded from one user seed
/// must never consume the same underlying sequence. (A transform matrix
/// orthonormalized from the same Gaussian draws as the data it rotates
/// would align its rows with the data directions and break the estimator.)
namespace rng_stream {
inline constexpr std::uint64_t kTransform = 0x9d5c41cf0f5e6a31ULL;
inline constexpr std::uint64_t kSynth = 0x2c7e11d43a8b95f7ULL;
inline constexpr std::uint64_t kKmeans = 0x6b1febc8d1a07445ULL;
inline constexpr std::uint64_t kHnsw = 0xe39cb5137fa42d89ULL;
}  // namespace rng_stream

/// Counter-based 64-bit PRNG (SplitMix64 finalizer over seed + counter).
/// Output at position i depends only on (seed, i), so streams are
/// reproducible across platforms and safe to evaluate out of order.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t counter = 0)
        : seed_(seed), counter_(counter) {}

    /// Independent stream for a component, derived from a user-level seed.
    static Rng for_stream(std::uint64_t seed, std::uint64_t stream_tag) {
        return Rng(mix64(seed ^ stream_tag));
    }

    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t next_u64() {
        ++counter_;
        return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1].
    double uniform_open0() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = uniform_open0();
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        cached_ = mag * std::sin(ang);
        has_cached_ = true;
        return mag * std::cos(ang);
    }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace adsann
