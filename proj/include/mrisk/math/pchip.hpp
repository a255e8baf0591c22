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

#include <cstddef>
#include <vector>

#include "mrisk/common.hpp"

namespace mrisk {

/// Monotone cubic Hermite interpolation (Fritsch-Carlson slopes).
/// Flat extrapolation outside the abscissa range.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    MonotoneCubic(std::vector<double> xs, std::vector<double> ys)
        : x_(std::move(xs)), y_(std::move(ys)) {
        const std::size_t n = x_.size();
        require(n >= 2 && y_.size() == n, "MonotoneCubic: need >= 2 points");
        for (std::size_t i = 1; i < n; ++i)
            require(x_[i] > x_[i - 1], "MonotoneCubic: abscissas must increase");
        m_.assign(n, 0.0);
        std::vector<double> d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
            d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        m_[0] = d[0];
        m_[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0) {
                m_[i] = 0.0;
            } else {
                const double w1 = 2.0 * (x_[i + 1] - x_[i]) + (x_[i] - x_[i - 1]);
                const double w2 = (x_[i + 1] - x_[i]) + 2.0 * (x_[i] - x_[i - 1]);
                m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        // clamp the one-sided end slopes (Fritsch-Carlson condition)
        for (std::size_t e : {std::size_t{0}, n - 1}) {
            const double ds = (e == 0) ? d[0] : d[n - 2];
            if (ds == 0.0)
                m_[e] = 0.0;
            else if (m_[e] / ds < 0.0)
                m_[e] = 0.0;
            else if (std::abs(m_[e]) > 3.0 * std::abs(ds))
                m_[e] = 3.0 * ds;
        }
    }

    double operator()(double xq) const {
        const std::size_t n = x_.size();
        if (xq <= x_.front())
            return y_.front();
        if (xq >= x_.back())
            return y_.back();
        std::size_t lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (x_[mid] <= xq ? lo : hi) = mid;
        }
        const double h = x_[lo + 1] - x_[lo];
        const double t = (xq - x_[lo]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1;
        const double h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2;
        const double h11 = t3 - t2;
        return h00 * y_[lo] + h10 * h * m_[lo] + h01 * y_[lo + 1] + h11 * h * m_[lo + 1];
    }

private:
    std::vector<double> x_, y_, m_;
};

} // namespace mrisk
