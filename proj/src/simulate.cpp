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

#include "mrisk/simulate.hpp"

#include <cmath>

namespace mrisk {

std::size_t DateGrid::index_of(double time) const {
    std::size_t best = 0;
    double dist = std::abs(t[0] - time);
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double d = std::abs(t[i] - time);
        if (d < dist) {
            dist = d;
            best = i;
        }
    }
    return best;
}

DateGrid daily_grid(double horizon) {
    require(horizon > 0.0, "grid horizon must be > 0");
    const std::size_t n = static_cast<std::size_t>(
        std::max<long>(1, std::lround(365.0 * horizon)));
    DateGrid g;
    g.t.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        g.t[i] = horizon * static_cast<double>(i) / static_cast<double>(n);
    return g;
}

namespace {

void simulate_one(const HestonParams& p, const std::vector<double>& carry,
                  const std::vector<double>& t, std::uint64_t key, std::uint64_t stream,
                  PathGrid& out) {
    const std::size_t n = t.size();
    out.spot.resize(n);
    out.var.resize(n);
    double x = std::log(p.s0);
    double v = p.v0;
    out.spot[0] = p.s0;
    out.var[0] = p.v0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto z = gaussian_pair(key, stream, k);
        heston_step(x, v, p.kappa, p.theta, p.eta, p.rho, carry[k], t[k + 1] - t[k],
                    z.z0, z.z1);
        out.spot[k + 1] = std::exp(x);
        out.var[k + 1] = v > 0.0 ? v : 0.0;
    }
}

} // namespace

std::vector<PathGrid> simulate_paths(const MarketModel& market, const DateGrid& grid,
                                     std::size_t n_paths, std::uint64_t seed,
                                     ExecMode mode) {
    market.params.validate();
    grid.validate();
    require(n_paths >= 1, "simulate_paths: n_paths must be >= 1");

    const std::size_t n = grid.t.size();
    std::vector<double> carry(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k)
        carry[k] = market.domestic.integral(grid.t[k], grid.t[k + 1]) -
                   market.foreign.integral(grid.t[k], grid.t[k + 1]);

    const std::uint64_t key = derive_key(seed, rng_tag::market);
    std::vector<PathGrid> paths(n_paths);

    if (mode == ExecMode::OpenMp) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n_paths); ++i) {
            paths[i].path_id = static_cast<std::uint64_t>(i);
            simulate_one(market.params, carry, grid.t, key,
                         static_cast<std::uint64_t>(i), paths[i]);
        }
    } else {
        for (std::size_t i = 0; i < n_paths; ++i) {
            paths[i].path_id = i;
            simulate_one(market.params, carry, grid.t, key, i, paths[i]);
        }
    }
    return paths;
}

} // namespace mrisk
