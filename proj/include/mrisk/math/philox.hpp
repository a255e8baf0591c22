/*
 * Copyright 2026 The mrisk authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mrisk {

/// Philox-4x32-10 counter-based generator (Salmon et al., SC 2011).
///
/// A block is a pure function of (key, counter), so any stream element can
/// be produced without sequential state. Streams are keyed by a 64-bit seed
/// and addressed by (stream id, step), which makes path generation
/// independent of how paths are sharded across threads or workers.
struct Philox4x32 {
    static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    static constexpr std::uint32_t kWeylB = 0xBB67AE85u;
    static constexpr std::uint32_t kMultA = 0xD2511F53u;
    static constexpr std::uint32_t kMultB = 0xCD9E8D57u;

    static inline void round(std::uint32_t ctr[4], const std::uint32_t key[2]) {
        const std::uint64_t prod0 = static_cast<std::uint64_t>(kMultA) * ctr[0];
        const std::uint64_t prod1 = static_cast<std::uint64_t>(kMultB) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(prod0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(prod0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(prod1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(prod1);
        const std::uint32_t out0 = hi1 ^ ctr[1] ^ key[0];
        const std::uint32_t out2 = hi0 ^ ctr[3] ^ key[1];
        ctr[0] = out0;
        ctr[1] = lo1;
        ctr[2] = out2;
        ctr[3] = lo0;
    }

    /// One 10-round block: 128 bits of counter, 64 bits of key.
    static std::array<std::uint32_t, 4> block(std::uint64_t key64,
                                              std::uint64_t ctr_lo,
                                              std::uint64_t ctr_hi) {
        std::uint32_t ctr[4] = {
            static_cast<std::uint32_t>(ctr_lo), static_cast<std::uint32_t>(ctr_lo >> 32),
            static_cast<std::uint32_t>(ctr_hi), static_cast<std::uint32_t>(ctr_hi >> 32)};
        std::uint32_t key[2] = {static_cast<std::uint32_t>(key64),
                                static_cast<std::uint32_t>(key64 >> 32)};
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                key[0] += kWeylA;
                key[1] += kWeylB;
            }
            round(ctr, key);
        }
        return {ctr[0], ctr[1], ctr[2], ctr[3]};
    }
};

/// splitmix64 finalizer; used to derive well-mixed sub-keys from
/// (seed, purpose) tuples.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t tag) {
    return mix64(seed ^ mix64(tag));
}

/// Two independent N(0,1) draws per (stream, step), produced by one Philox
/// block and a Box-Muller transform. Fully counter-based: no state.
struct GaussianPair {
    double z0;
    double z1;
};

inline double uniform53(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    // 53-bit mantissa, strictly inside (0,1)
    return (static_cast<double>(bits >> 11) + 0.5) * 1.1102230246251565404e-16;
}

inline GaussianPair gaussian_pair(std::uint64_t key, std::uint64_t stream, std::uint64_t step) {
    const auto b = Philox4x32::block(key, step, stream);
    const double u1 = uniform53(b[0], b[1]);
    const double u2 = uniform53(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586477 * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

} // namespace mrisk
