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

#include <cstdint>
#include <vector>

#include "mrisk/heston.hpp"
#include "mrisk/math/philox.hpp"

namespace mrisk {

/// Ordered observation dates as year fractions (ACT/365 convention).
struct DateGrid {
    std::vector<double> t;

    std::size_t steps() const { return t.empty() ? 0 : t.size() - 1; }

    void validate() const {
        require(t.size() >= 2, "grid: need at least two dates");
        for (std::size_t i = 1; i < t.size(); ++i)
            require(t[i] > t[i - 1], "grid: dates must strictly increase");
        require(t.front() >= 0.0, "grid: dates must be non-negative");
    }

    /// Closest grid index to a target time.
    std::size_t index_of(double time) const;
};

/// Calendar-daily grid over [0, horizon]; the step is horizon/N with
/// N = round(365 * horizon), so the final date lands exactly on the horizon.
DateGrid daily_grid(double horizon);

/// One simulated market path: spot and (truncated, non-negative) variance
/// at every grid date, plus the stream id it was generated from.
struct PathGrid {
    std::uint64_t path_id = 0;
    std::vector<double> spot;
    std::vector<double> var;
};

enum class ExecMode { Serial, OpenMp };

/// RNG stream tags; keeps the market simulation and pricer-internal draws
/// on disjoint Philox keys.
namespace rng_tag {
inline constexpr std::uint64_t market = 0x4d41524bull;   // "MARK"
inline constexpr std::uint64_t pricer_bs = 0x42534d43ull; // "BSMC"
inline constexpr std::uint64_t pricer_heston = 0x48534d43ull;
}

/// Full-truncation Euler step on (log-spot, variance). The propagated
/// variance state may go negative; v^+ = max(v,0) enters drift and
/// diffusion of both factors. Returns the updated (x, v) pair.
inline void heston_step(double& x, double& v, double kappa, double theta, double eta,
                        double rho_, double carry, double dt, double z1, double z2) {
    const double vp = v > 0.0 ? v : 0.0;
    const double sq = std::sqrt(vp * dt);
    x += carry - 0.5 * vp * dt + sq * z1;
    const double zv = rho_ * z1 + std::sqrt(1.0 - rho_ * rho_) * z2;
    v += kappa * (theta - vp) * dt + eta * sq * zv;
}

/// Simulates n_paths independent market paths on the grid. Path i is a
/// deterministic function of (seed, i, grid, params) alone, so results are
/// bit-identical for any execution mode or shard layout.
std::vector<PathGrid> simulate_paths(const MarketModel& market, const DateGrid& grid,
                                     std::size_t n_paths, std::uint64_t seed,
                                     ExecMode mode = ExecMode::OpenMp);

} // namespace mrisk
