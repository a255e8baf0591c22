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

#include "mrisk/black_scholes.hpp"
#include "mrisk/heston.hpp"
#include "mrisk/heston_cf.hpp"

namespace mrisk {

/// Delta-bucketed smile grid specification. Buckets are expressed as
/// premium-excluded spot call deltas; put buckets map to df_for + put
/// delta and the delta-neutral straddle to df_for/2 (see DeltaConvention).
struct SurfaceSpec {
    std::vector<double> pillars = {1.0 / 12.0, 0.25, 0.5, 1.0, 2.0};
    /// put/call wing deltas, as positive magnitudes in increasing order
    std::vector<double> wing_deltas = {0.10, 0.25};
    DeltaConvention convention;
    double tolerance = 1e-6; ///< max delta residual of the fixed point
    std::size_t max_iterations = 50;

    void validate() const {
        require(!pillars.empty(), "surface.pillars: must not be empty");
        for (std::size_t i = 0; i < pillars.size(); ++i) {
            require(pillars[i] > 0.0, "surface.pillars: must be positive");
            if (i > 0)
                require(pillars[i] > pillars[i - 1], "surface.pillars: must increase");
        }
        require(!wing_deltas.empty(), "surface.wing_deltas: must not be empty");
        for (std::size_t i = 0; i < wing_deltas.size(); ++i) {
            require(wing_deltas[i] > 0.0 && wing_deltas[i] < 0.5,
                    "surface.wing_deltas: must lie in (0, 0.5)");
            if (i > 0)
                require(wing_deltas[i] > wing_deltas[i - 1],
                        "surface.wing_deltas: must increase");
        }
        require(tolerance > 0.0, "surface.tolerance: must be > 0");
        require(max_iterations >= 1, "surface.max_iterations: must be >= 1");
    }

    /// Bucket count per pillar: two wings per delta plus the straddle.
    std::size_t buckets() const { return 2 * wing_deltas.size() + 1; }
};

/// The implied-volatility surface consistent with the market model at one
/// (spot, variance) state, quoted per (pillar, delta bucket). Because the
/// quotation is in delta space, the vols are invariant under spot moves;
/// only variance moves reshape it (parallel across buckets, term-structure
/// only).
class VolSurface {
public:
    VolSurface() = default;

    double spot() const { return spot_; }
    double variance() const { return var_; }
    const SurfaceSpec& spec() const { return spec_; }

    /// Bucket call-delta targets at a pillar, decreasing in strike order:
    /// puts (df_for + delta_put), straddle (df_for/2), calls.
    std::vector<double> bucket_call_deltas(std::size_t pillar_idx) const;

    double vol(std::size_t pillar_idx, std::size_t bucket_idx) const {
        return vols_[pillar_idx][bucket_idx];
    }
    const std::vector<double>& pillar_vols(std::size_t pillar_idx) const {
        return vols_[pillar_idx];
    }

    /// Strike of a bucket node (from the converged vol at that node).
    double bucket_strike(std::size_t pillar_idx, std::size_t bucket_idx) const;

    /// Vol at an arbitrary bucket call-delta and expiry: monotone cubic in
    /// delta along each pillar, linear in total variance across pillars,
    /// flat extrapolation beyond the pillar span.
    double vol_at_delta(double call_delta, double expiry) const;

    /// Vol of one bucket column at an arbitrary expiry (linear in total
    /// variance between pillars, flat beyond them).
    double column_vol(std::size_t bucket_idx, double expiry) const;

    /// Delta-neutral straddle vol at an expiry (straddle bucket column).
    double atm_vol(double expiry) const;

    /// Vol at an arbitrary strike: the strike is converted to a call delta
    /// self-consistently with the smile, then vol_at_delta applies.
    /// Expiry must lie within [shortest pillar / 2, longest pillar * 1.5].
    double vol_at_strike(double strike, double expiry) const;

    /// Discount factors over a tenor starting at the build date (forwards
    /// and deltas are tenor-based, not absolute-date-based).
    double df_dom(double tenor) const;
    double df_for(double tenor) const;
    double forward(double tenor) const { return spot_ * df_for(tenor) / df_dom(tenor); }

    /// Copy with one node shifted; for node-level vega decompositions.
    VolSurface bumped_node(std::size_t pillar_idx, std::size_t bucket_idx,
                           double dvol) const {
        VolSurface s = *this;
        s.vols_[pillar_idx][bucket_idx] += dvol;
        return s;
    }

    friend class SurfaceBuilder;

private:
    SurfaceSpec spec_;
    double spot_ = 0.0;
    double var_ = 0.0;
    double base_t_ = 0.0;
    RateCurve dom_, for_;
    std::vector<std::vector<double>> vols_; ///< [pillar][bucket]
};

/// Rebuilds the smile implied by the market model at a given (spot,
/// variance) state via fixed-point iteration: strikes from deltas, model
/// prices from strikes, implied vols from prices, deltas from vols, until
/// the deltas reproduce the bucket targets within tolerance.
class SurfaceBuilder {
public:
    SurfaceBuilder(const MarketModel& market, SurfaceSpec spec);

    /// Build at state (spot, variance) observed at year-fraction `t`
    /// (curves are forward-sliced at t, tenors kept fixed).
    VolSurface build(double t, double spot, double variance) const;

    /// Identical to build with variance -> variance + bump; spot bumps do
    /// not rebuild the surface (delta quotation).
    VolSurface build_bumped(double t, double spot, double variance,
                            double variance_bump) const {
        return build(t, spot, variance + variance_bump);
    }

private:
    MarketModel market_;
    SurfaceSpec spec_;
};

} // namespace mrisk
