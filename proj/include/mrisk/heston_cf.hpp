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

#include <complex>
#include <vector>

#include "mrisk/heston.hpp"
#include "mrisk/rates.hpp"

namespace mrisk {

/// Semi-analytic vanilla pricing under the square-root variance model via
/// the numerically stable characteristic-function formulation (principal
/// branch; no rotation counting needed).
///
/// The probability integrals are evaluated with Gauss-Legendre on the
/// compactified half-line, doubling the order until two successive results
/// agree to 1e-9. Everything that does not depend on spot or strike is
/// cached per (parameters, state variance, expiry), so smile construction
/// reuses one cache for all delta buckets and iterations.
class HestonTermCache {
public:
    /// p.v0 is the state variance the cache is anchored at.
    HestonTermCache(const HestonParams& p, double expiry);

    /// Undiscounted exercise probabilities (P1: delta measure, P2: money
    /// measure) for log-moneyness m = ln(F/K).
    void probabilities(double log_f_over_k, double& p1, double& p2) const;

    /// Call premium in domestic units.
    double call(double fwd, double strike, double df_dom) const;

    double expiry() const { return expiry_; }

private:
    void build(std::size_t n);
    void evaluate(const std::vector<double>& phi, std::vector<std::complex<double>>& a1,
                  std::vector<std::complex<double>>& a2) const;

    HestonParams p_;
    double expiry_ = 0.0;
    double scale_ = 1.0; ///< compactification scale phi = scale * u/(1-u)
    bool degenerate_ = false; ///< zero total variance: intrinsic limit

    // coarse grid kept alongside the fine one for per-strike verification
    std::vector<double> phi_fine_, w_fine_, phi_coarse_, w_coarse_;
    std::vector<std::complex<double>> a1_fine_, a2_fine_, a1_coarse_, a2_coarse_;
};

/// One-shot vanilla call premium; builds a term cache internally.
double heston_vanilla_price(const HestonParams& p, double strike, double expiry,
                            const RateCurve& dom, const RateCurve& for_, bool is_call = true);

/// Vanilla value at an absolute date from a prebuilt term cache anchored at
/// the same (parameters, state variance, tenor). Expired contracts value to
/// intrinsic. Shared by the pricers and the hedge-instrument chain so both
/// produce identical numbers.
double heston_vanilla_from_cache(const HestonTermCache& cache, const MarketModel& m,
                                 double t, double spot, double strike, double expiry_abs,
                                 bool is_call);

} // namespace mrisk
