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
#include "mrisk/rates.hpp"

namespace mrisk {

/// Square-root stochastic-variance market parameters:
///   dS/S = (r_d - r_f) dt + sqrt(v) dW
///   dv   = kappa (theta - v) dt + eta sqrt(v) dV,   d<W,V> = rho dt
struct HestonParams {
    double kappa = 0.0; ///< mean-reversion speed (1/y)
    double theta = 0.0; ///< long-term variance
    double eta = 0.0;   ///< volatility of variance
    double rho = 0.0;   ///< spot/variance correlation
    double v0 = 0.0;    ///< initial variance
    double s0 = 1.0;    ///< initial spot (domestic per foreign)

    void validate() const {
        require_finite(kappa, "heston.kappa");
        require_finite(theta, "heston.theta");
        require_finite(eta, "heston.eta");
        require_finite(rho, "heston.rho");
        require_finite(v0, "heston.v0");
        require_finite(s0, "heston.s0");
        require(kappa >= 0.0, "heston.kappa: must be >= 0");
        require(theta >= 0.0, "heston.theta: must be >= 0");
        require(eta >= 0.0, "heston.eta: must be >= 0");
        require(rho >= -1.0 && rho <= 1.0, "heston.rho: must lie in [-1,1]");
        require(v0 >= 0.0, "heston.v0: must be >= 0");
        require(s0 > 0.0, "heston.s0: must be > 0");
    }

    /// Parameter set re-anchored at a state (s, v); kappa/theta/eta/rho kept.
    HestonParams at_state(double s, double v) const {
        HestonParams p = *this;
        p.s0 = s;
        p.v0 = v;
        return p;
    }
};

/// E[v_t] = theta + (v0 - theta) e^{-kappa t} for the square-root process.
inline double expected_variance(const HestonParams& p, double t) {
    return p.theta + (p.v0 - p.theta) * std::exp(-p.kappa * t);
}

/// Integral of the expected variance over [0,T]:
///   theta*T + (v0-theta)(1-e^{-kappa T})/kappa, with the kappa->0 limit v0*T.
/// This is the deterministic term variance sigma^2(T)*T used to seed the
/// smile construction.
inline double expected_variance_integral(const HestonParams& p, double T) {
    require(T > 0.0, "expected_variance_integral: T must be > 0");
    const double kT = p.kappa * T;
    double decay; // (1 - e^{-kappa T}) / kappa, stable for small kappa
    if (kT < 1e-8)
        decay = T * (1.0 - 0.5 * kT);
    else
        decay = (1.0 - std::exp(-kT)) / p.kappa;
    return p.theta * T + (p.v0 - p.theta) * decay;
}

/// Market model shared by the simulator, the smile construction and the
/// reference pricers: parameters plus the two rate curves.
struct MarketModel {
    HestonParams params;
    RateCurve domestic;
    RateCurve foreign;

    double forward(double t, double T, double spot) const {
        return spot * foreign.discount(t, T) / domestic.discount(t, T);
    }
};

} // namespace mrisk
