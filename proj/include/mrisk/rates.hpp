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
#include <vector>

#include "mrisk/common.hpp"

namespace mrisk {

/// Piecewise-constant continuously-compounded rate curve.
///
/// Segment i applies on [t_i, t_{i+1}) with the last segment extending to
/// infinity. Discount factors are exact integrals of the step function, so
/// P(a,b) * P(b,c) == P(a,c) holds to rounding.
class RateCurve {
public:
    RateCurve() : times_{0.0}, rates_{0.0} {}

    explicit RateCurve(double flat_rate) : times_{0.0}, rates_{flat_rate} {
        require_finite(flat_rate, "RateCurve.rate");
    }

    RateCurve(std::vector<double> times, std::vector<double> rates)
        : times_(std::move(times)), rates_(std::move(rates)) {
        require(!times_.empty() && times_.size() == rates_.size(),
                "RateCurve: times/rates size mismatch");
        require(times_.front() == 0.0, "RateCurve: first segment must start at t=0");
        for (std::size_t i = 1; i < times_.size(); ++i)
            require(times_[i] > times_[i - 1], "RateCurve: segment times must increase");
        for (double r : rates_)
            require_finite(r, "RateCurve.rate");
    }

    /// Integral of the rate over [a, b] (a <= b).
    double integral(double a, double b) const {
        require(b >= a, "RateCurve::integral: b < a");
        double acc = 0.0;
        for (std::size_t i = 0; i < times_.size(); ++i) {
            const double seg_lo = times_[i];
            const double seg_hi = (i + 1 < times_.size()) ? times_[i + 1] : b;
            const double lo = std::max(a, seg_lo);
            const double hi = std::min(b, seg_hi);
            if (hi > lo)
                acc += rates_[i] * (hi - lo);
            if (seg_hi >= b)
                break;
        }
        return acc;
    }

    /// Discount bond value at a of a unit paid at b.
    double discount(double a, double b) const { return std::exp(-integral(a, b)); }

    /// Instantaneous rate at t.
    double rate(double t) const {
        std::size_t i = times_.size() - 1;
        while (i > 0 && times_[i] > t)
            --i;
        return rates_[i];
    }

private:
    std::vector<double> times_;
    std::vector<double> rates_;
};

} // namespace mrisk
