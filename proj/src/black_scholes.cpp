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

#include "mrisk/black_scholes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrisk/math/normal.hpp"

namespace mrisk {

namespace {

double d1_of(const BsQuote& q) {
    const double s = q.vol * std::sqrt(q.expiry);
    return std::log(q.forward() / q.strike) / s + 0.5 * s;
}

} // namespace

double bs_vanilla_price(const BsQuote& q) {
    q.validate();
    const double f = q.forward();
    if (q.vol * std::sqrt(q.expiry) < 1e-12) {
        const double intr = q.is_call ? std::max(f - q.strike, 0.0)
                                      : std::max(q.strike - f, 0.0);
        return q.df_dom * intr;
    }
    const double d1 = d1_of(q);
    const double d2 = d1 - q.vol * std::sqrt(q.expiry);
    if (q.is_call)
        return q.df_dom * (f * normal_cdf(d1) - q.strike * normal_cdf(d2));
    return q.df_dom * (q.strike * normal_cdf(-d2) - f * normal_cdf(-d1));
}

double bs_delta(const BsQuote& q) {
    q.validate();
    if (q.vol * std::sqrt(q.expiry) < 1e-12) {
        const double f = q.forward();
        const double step = q.is_call ? (f > q.strike ? 1.0 : 0.0)
                                      : (f < q.strike ? -1.0 : 0.0);
        return q.df_for * step;
    }
    const double d1 = d1_of(q);
    return q.is_call ? q.df_for * normal_cdf(d1) : -q.df_for * normal_cdf(-d1);
}

double bs_vega(const BsQuote& q) {
    q.validate();
    if (q.vol * std::sqrt(q.expiry) < 1e-12)
        return 0.0;
    const double d1 = d1_of(q);
    return q.df_dom * q.forward() * normal_pdf(d1) * std::sqrt(q.expiry);
}

double bs_implied_vol(double price, const BsQuote& q0) {
    BsQuote q = q0;
    q.vol = 0.0;
    q.validate();
    const double f = q.forward();
    const double intrinsic = q.df_dom * (q.is_call ? std::max(f - q.strike, 0.0)
                                                   : std::max(q.strike - f, 0.0));
    const double upper = q.is_call ? q.spot * q.df_for : q.strike * q.df_dom;
    if (price < intrinsic - 1e-14)
        throw domain_error("bs_implied_vol: price " + std::to_string(price) +
                           " below discounted intrinsic " + std::to_string(intrinsic));
    if (price >= upper)
        throw domain_error("bs_implied_vol: price " + std::to_string(price) +
                           " at or above the vol->infinity bound " + std::to_string(upper));
    if (price <= intrinsic)
        return 0.0;

    // bracket, then Newton with bisection safeguard
    double lo = 0.0, hi = 1.0;
    while (bs_vanilla_price({q.spot, q.strike, hi, q.df_dom, q.df_for, q.expiry,
                             q.is_call}) < price) {
        hi *= 2.0;
        if (hi > 64.0)
            throw numeric_error("bs_implied_vol: failed to bracket the root");
    }
    double v = std::max(0.5 * hi, 1e-4);
    for (int it = 0; it < 100; ++it) {
        BsQuote qt = q;
        qt.vol = v;
        const double err = bs_vanilla_price(qt) - price;
        if (std::abs(err) < 1e-14 * std::max(1.0, price))
            return v;
        (err > 0.0 ? hi : lo) = v;
        const double vega = bs_vega(qt);
        double next = v - err / vega;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - v) < 1e-16)
            return next;
        v = next;
    }
    return v;
}

double strike_from_delta(double call_delta, double vol, double spot, double df_dom,
                         double df_for, double expiry) {
    require(expiry > 0.0, "strike_from_delta: expiry must be > 0");
    require(vol > 0.0, "strike_from_delta: vol must be > 0");
    if (!(call_delta > 0.0 && call_delta < df_for))
        throw domain_error("strike_from_delta: call delta " + std::to_string(call_delta) +
                           " unattainable; must lie in (0, df_for)");
    const double f = spot * df_for / df_dom;
    const double s = vol * std::sqrt(expiry);
    const double d1 = normal_inv_cdf(call_delta / df_for);
    return f * std::exp(-d1 * s + 0.5 * s * s);
}

double atm_straddle_strike(double vol, double spot, double df_dom, double df_for,
                           double expiry) {
    const double f = spot * df_for / df_dom;
    return f * std::exp(0.5 * vol * vol * expiry);
}

double bs_dnt_price(double spot, double lower, double upper, double vol, double rd,
                    double rf, double expiry) {
    require(lower > 0.0 && lower < upper, "dnt: barriers must satisfy 0 < lower < upper");
    require(expiry > 0.0, "dnt: expiry must be > 0");
    require(vol >= 0.0, "dnt: vol must be >= 0");
    if (spot <= lower || spot >= upper)
        return 0.0;

    const double df = std::exp(-rd * expiry);
    const double s = vol * std::sqrt(expiry);
    if (s < 1e-8) {
        // deterministic carry: the drifted spot moves monotonically in t
        const double end = spot * std::exp((rd - rf) * expiry);
        return (end > lower && end < upper) ? df : 0.0;
    }

    const double x = std::log(spot / lower);
    const double l = std::log(upper / lower);
    const double mu = rd - rf - 0.5 * vol * vol;
    const double drift = mu * expiry;
    const double c = 2.0 * mu / (vol * vol);

    double sum = 0.0;
    for (int n = 0; n <= 100; ++n) {
        double term = 0.0;
        for (int sgn : {1, -1}) {
            if (n == 0 && sgn == -1)
                continue;
            const double nl = sgn * n * l;
            const double direct =
                std::exp(2.0 * nl * mu / (vol * vol)) *
                (normal_cdf((l - x - 2.0 * nl - drift) / s) -
                 normal_cdf((-x - 2.0 * nl - drift) / s));
            const double image =
                std::exp(c * (nl - x)) *
                (normal_cdf((l + x - 2.0 * nl - drift) / s) -
                 normal_cdf((x - 2.0 * nl - drift) / s));
            term += direct - image;
        }
        sum += term;
        if (n > 0 && std::abs(term) < 1e-12)
            break;
    }
    return df * std::max(sum, 0.0);
}

} // namespace mrisk
