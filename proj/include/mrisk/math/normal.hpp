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

#include <cmath>

#include "mrisk/common.hpp"

namespace mrisk {

inline double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

/// Standard normal CDF via erfc; accurate in both tails.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

/// Inverse standard normal CDF.
///
/// Starts from the Abramowitz-Stegun 26.2.23 rational approximation and
/// polishes with Newton steps on the erfc-based CDF, which converges to
/// full double precision for p in (0,1).
inline double normal_inv_cdf(double p) {
    require(p > 0.0 && p < 1.0, "normal_inv_cdf: p must lie in (0,1)");
    const bool lower = p < 0.5;
    const double pp = lower ? p : 1.0 - p;
    // A&S 26.2.23, |error| < 4.5e-4
    const double t = std::sqrt(-2.0 * std::log(pp));
    double x = t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t));
    x = -x; // approximation of the pp-quantile (pp < 0.5 so x < 0)
    for (int i = 0; i < 4; ++i) {
        const double err = normal_cdf(x) - pp;
        const double d = normal_pdf(x);
        if (d <= 0.0)
            break;
        x -= err / d;
    }
    return lower ? x : -x;
}

} // namespace mrisk
