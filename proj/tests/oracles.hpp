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

// Test-only reference implementations, kept deliberately naive and
// independent of the library code paths they validate.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mrisk/math/philox.hpp"

namespace oracle {

/// CRR binomial tree for a European vanilla.
inline double binomial_vanilla(double spot, double strike, double vol, double rd,
                               double rf, double T, bool is_call, int steps) {
    const double dt = T / steps;
    const double u = std::exp(vol * std::sqrt(dt));
    const double d = 1.0 / u;
    const double growth = std::exp((rd - rf) * dt);
    const double p = (growth - d) / (u - d);
    const double disc = std::exp(-rd * dt);
    std::vector<double> val(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        const double st = spot * std::pow(u, steps - i) * std::pow(d, i);
        val[i] = is_call ? std::max(st - strike, 0.0) : std::max(strike - st, 0.0);
    }
    for (int n = steps; n > 0; --n)
        for (int i = 0; i < n; ++i)
            val[i] = disc * (p * val[i] + (1.0 - p) * val[i + 1]);
    return val[0];
}

struct McEstimate {
    double value;
    double se;
};

/// Lognormal double-no-touch Monte Carlo with per-interval Brownian-bridge
/// crossing probabilities; unbiased for the continuously monitored binary.
inline McEstimate gbm_dnt_mc(double spot, double lower, double upper, double vol,
                             double rd, double rf, double T, std::size_t n_paths,
                             std::size_t n_steps, std::uint64_t seed) {
    const double dt = T / static_cast<double>(n_steps);
    const double drift = (rd - rf - 0.5 * vol * vol) * dt;
    const double sq = vol * std::sqrt(dt);
    const double lo = std::log(lower / spot), hi = std::log(upper / spot);
    const std::uint64_t key = mrisk::derive_key(seed, 0xBACCull);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        double x = 0.0, surv = 1.0;
        for (std::size_t k = 0; k < n_steps && surv > 0.0; ++k) {
            double z;
            if (k % 2 == 0)
                z = mrisk::gaussian_pair(key, i, k / 2).z0;
            else
                z = mrisk::gaussian_pair(key, i, k / 2).z1;
            const double x1 = x + drift + sq * z;
            if (x1 <= lo || x1 >= hi) {
                surv = 0.0;
            } else {
                const double w = vol * vol * dt;
                surv *= (1.0 - std::exp(-2.0 * (x - lo) * (x1 - lo) / w)) *
                        (1.0 - std::exp(-2.0 * (hi - x) * (hi - x1) / w));
            }
            x = x1;
        }
        sum += surv;
        sum2 += surv * surv;
    }
    const double n = static_cast<double>(n_paths);
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double df = std::exp(-rd * T);
    return {df * mean, df * std::sqrt(var / n)};
}

/// Naive Gaussian elimination with partial pivoting (small systems).
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c]))
                piv = r;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k)
                a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k)
            s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
    return x;
}

/// Sort-based empirical lower-tail statistics.
inline double sorted_quantile(std::vector<double> xs, double alpha) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    std::size_t k = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n))) + 1;
    if (k > n)
        k = n;
    return xs[k - 1];
}

} // namespace oracle
