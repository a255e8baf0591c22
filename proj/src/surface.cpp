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

#include "mrisk/surface.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrisk/math/normal.hpp"
#include "mrisk/math/pchip.hpp"

namespace mrisk {

namespace {

// Forward-normalized Black-Scholes call machinery: everything is expressed
// in the moneyness exponent q = ln(K/F), which keeps the smile iteration
// bitwise independent of the spot level (the delta quotation invariant).
double norm_call(double q, double vol, double tau) {
    const double s = vol * std::sqrt(tau);
    if (s < 1e-12)
        return std::max(1.0 - std::exp(q), 0.0);
    const double d1 = -q / s + 0.5 * s;
    return normal_cdf(d1) - std::exp(q) * normal_cdf(d1 - s);
}

double norm_delta(double q, double vol, double tau) { // N(d1)
    const double s = vol * std::sqrt(tau);
    if (s < 1e-12)
        return q < 0.0 ? 1.0 : (q > 0.0 ? 0.0 : 0.5);
    return normal_cdf(-q / s + 0.5 * s);
}

double norm_vega(double q, double vol, double tau) {
    const double s = vol * std::sqrt(tau);
    if (s < 1e-12)
        return 0.0;
    return normal_pdf(-q / s + 0.5 * s) * std::sqrt(tau);
}

/// q at which N(d1) equals delta_norm, for the given vol.
double q_from_norm_delta(double delta_norm, double vol, double tau) {
    const double s = vol * std::sqrt(tau);
    const double d1 = normal_inv_cdf(delta_norm);
    return -d1 * s + 0.5 * s * s;
}

/// Implied vol of a forward-normalized call price; Newton with bisection
/// safeguard against the monotone norm_call.
double norm_implied_vol(double price, double q, double tau, double guess) {
    const double intrinsic = std::max(1.0 - std::exp(q), 0.0);
    if (price <= intrinsic + 1e-16)
        return 0.0;
    require(price < 1.0, "implied vol: normalized price must be < 1");
    double lo = 0.0, hi = std::max(2.0 * guess, 1.0);
    while (norm_call(q, hi, tau) < price)
        hi *= 2.0;
    double v = std::min(std::max(guess, 1e-4), hi);
    for (int it = 0; it < 100; ++it) {
        const double err = norm_call(q, v, tau) - price;
        if (std::abs(err) < 1e-15)
            return v;
        (err > 0.0 ? hi : lo) = v;
        const double vega = norm_vega(q, v, tau);
        double next = vega > 0.0 ? v - err / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - v) < 1e-16)
            return next;
        v = next;
    }
    return v;
}

} // namespace

std::vector<double> VolSurface::bucket_call_deltas(std::size_t pillar_idx) const {
    const double dff = df_for(spec_.pillars[pillar_idx]);
    std::vector<double> d;
    d.reserve(spec_.buckets());
    // low strike -> high strike: puts (deep wing first), straddle, calls
    for (auto it = spec_.wing_deltas.begin(); it != spec_.wing_deltas.end(); ++it)
        d.push_back(dff - *it);
    d.push_back(0.5 * dff);
    for (auto it = spec_.wing_deltas.rbegin(); it != spec_.wing_deltas.rend(); ++it)
        d.push_back(*it);
    return d;
}

double VolSurface::df_dom(double tenor) const {
    return dom_.discount(base_t_, base_t_ + tenor);
}

double VolSurface::df_for(double tenor) const {
    return for_.discount(base_t_, base_t_ + tenor);
}

double VolSurface::bucket_strike(std::size_t pi, std::size_t bi) const {
    const double tau = spec_.pillars[pi];
    const double dn = bucket_call_deltas(pi)[bi] / df_for(tau);
    const double q = q_from_norm_delta(dn, vols_[pi][bi], tau);
    return forward(tau) * std::exp(q);
}

double VolSurface::column_vol(std::size_t bucket_idx, double expiry) const {
    const auto& ps = spec_.pillars;
    if (expiry <= ps.front())
        return vols_[0][bucket_idx];
    if (expiry >= ps.back())
        return vols_[ps.size() - 1][bucket_idx];
    std::size_t lo = 0;
    while (ps[lo + 1] < expiry)
        ++lo;
    const double w_lo = vols_[lo][bucket_idx] * vols_[lo][bucket_idx] * ps[lo];
    const double w_hi = vols_[lo + 1][bucket_idx] * vols_[lo + 1][bucket_idx] * ps[lo + 1];
    const double u = (expiry - ps[lo]) / (ps[lo + 1] - ps[lo]);
    const double w = w_lo + u * (w_hi - w_lo);
    return std::sqrt(w / expiry);
}

double VolSurface::atm_vol(double expiry) const {
    return column_vol(spec_.wing_deltas.size(), expiry);
}

double VolSurface::vol_at_delta(double call_delta, double expiry) const {
    const auto& ps = spec_.pillars;
    auto smile_vol = [&](std::size_t pi) {
        auto deltas = bucket_call_deltas(pi);
        std::vector<double> xs(deltas.rbegin(), deltas.rend());
        std::vector<double> ys(vols_[pi].rbegin(), vols_[pi].rend());
        return MonotoneCubic(std::move(xs), std::move(ys))(call_delta);
    };
    if (expiry <= ps.front())
        return smile_vol(0);
    if (expiry >= ps.back())
        return smile_vol(ps.size() - 1);
    std::size_t lo = 0;
    while (ps[lo + 1] < expiry)
        ++lo;
    const double v_lo = smile_vol(lo), v_hi = smile_vol(lo + 1);
    const double w_lo = v_lo * v_lo * ps[lo], w_hi = v_hi * v_hi * ps[lo + 1];
    const double u = (expiry - ps[lo]) / (ps[lo + 1] - ps[lo]);
    return std::sqrt((w_lo + u * (w_hi - w_lo)) / expiry);
}

double VolSurface::vol_at_strike(double strike, double expiry) const {
    require(strike > 0.0, "vol_at_strike: strike must be > 0");
    require(expiry >= 0.5 * spec_.pillars.front() && expiry <= 1.5 * spec_.pillars.back(),
            "vol_at_strike: expiry outside the supported tenor range");
    const double q = std::log(strike / forward(expiry));
    const double dff = df_for(expiry);
    double v = atm_vol(expiry);
    for (int it = 0; it < 12; ++it) {
        const double delta = dff * norm_delta(q, v, expiry);
        const double next = vol_at_delta(delta, expiry);
        if (std::abs(next - v) < 1e-12)
            return next;
        v = next;
    }
    return v;
}

SurfaceBuilder::SurfaceBuilder(const MarketModel& market, SurfaceSpec spec)
    : market_(market), spec_(std::move(spec)) {
    market_.params.validate();
    spec_.validate();
}

VolSurface SurfaceBuilder::build(double t, double spot, double variance) const {
    require(spot > 0.0, "surface build: spot must be > 0");
    require(variance >= 0.0, "surface build: variance must be >= 0");

    VolSurface surf;
    surf.spec_ = spec_;
    surf.spot_ = spot;
    surf.var_ = variance;
    surf.base_t_ = t;
    surf.dom_ = market_.domestic;
    surf.for_ = market_.foreign;

    const HestonParams state = market_.params.at_state(spot, variance);
    const std::size_t nb = spec_.buckets();
    surf.vols_.assign(spec_.pillars.size(), std::vector<double>(nb, 0.0));

    for (std::size_t pi = 0; pi < spec_.pillars.size(); ++pi) {
        const double tau = spec_.pillars[pi];
        const double dff = surf.df_for(tau);
        const auto targets = surf.bucket_call_deltas(pi);

        const double seed_var = expected_variance_integral(state, tau) / tau;
        std::vector<double> sigma(nb, std::sqrt(std::max(seed_var, 1e-12)));

        const HestonTermCache cache(state, tau);

        double residual = 0.0;
        bool converged = false;
        for (std::size_t iter = 0; iter < spec_.max_iterations; ++iter) {
            std::vector<double> q(nb), sig_new(nb), delta_new(nb);
            residual = 0.0;
            for (std::size_t b = 0; b < nb; ++b) {
                q[b] = q_from_norm_delta(targets[b] / dff, sigma[b], tau);
                double p1, p2;
                cache.probabilities(-q[b], p1, p2);
                const double nprice = std::max(p1 - std::exp(q[b]) * p2, 0.0);
                sig_new[b] = norm_implied_vol(nprice, q[b], tau, sigma[b]);
                delta_new[b] = dff * norm_delta(q[b], sig_new[b], tau);
                residual = std::max(residual, std::abs(delta_new[b] - targets[b]));
            }
            if (residual < spec_.tolerance) {
                surf.vols_[pi] = sigma;
                converged = true;
                break;
            }
            // interpolate the freshly computed (delta, vol) points back onto
            // the bucket deltas; deltas decrease with strike, so reverse
            std::vector<double> xs(delta_new.rbegin(), delta_new.rend());
            std::vector<double> ys(sig_new.rbegin(), sig_new.rend());
            for (std::size_t b = 1; b < nb; ++b)
                if (!(xs[b] > xs[b - 1]))
                    throw numeric_error("surface build: non-monotone delta points at pillar " +
                                        std::to_string(tau));
            const MonotoneCubic smile(std::move(xs), std::move(ys));
            for (std::size_t b = 0; b < nb; ++b)
                sigma[b] = smile(targets[b]);
        }
        if (!converged)
            throw numeric_error("surface build: no convergence at pillar " +
                                std::to_string(tau) + ", worst delta residual " +
                                std::to_string(residual));
    }
    return surf;
}

} // namespace mrisk
