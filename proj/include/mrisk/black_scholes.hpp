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

#include "mrisk/common.hpp"

namespace mrisk {

/// FX quotation conventions used throughout: spot delta, premium excluded,
/// ATM = delta-neutral straddle, options on the foreign currency. This is
/// the only supported combination; constructing any other one is rejected.
struct DeltaConvention {
    enum class Style { Spot };
    enum class Premium { Excluded };
    enum class Atm { Straddle };

    Style style = Style::Spot;
    Premium premium = Premium::Excluded;
    Atm atm = Atm::Straddle;
};

/// A Black-Scholes (Garman-Kohlhagen) vanilla quote.
struct BsQuote {
    double spot = 0.0;
    double strike = 0.0;
    double vol = 0.0;      ///< annualized term volatility; 0 gives the intrinsic limit
    double df_dom = 1.0;   ///< domestic discount factor to expiry
    double df_for = 1.0;   ///< foreign discount factor to expiry
    double expiry = 0.0;   ///< year fraction
    bool is_call = true;

    double forward() const { return spot * df_for / df_dom; }

    void validate() const {
        require(spot > 0.0, "quote.spot: must be > 0");
        require(strike > 0.0, "quote.strike: must be > 0");
        require(vol >= 0.0, "quote.vol: must be >= 0");
        require(df_dom > 0.0, "quote.df_dom: must be > 0");
        require(df_for > 0.0, "quote.df_for: must be > 0");
        require(expiry > 0.0, "quote.expiry: must be > 0");
        require_finite(spot, "quote.spot");
        require_finite(strike, "quote.strike");
        require_finite(vol, "quote.vol");
    }
};

/// Garman-Kohlhagen premium in domestic units.
double bs_vanilla_price(const BsQuote& q);

/// Spot delta with premium excluded: df_for * N(d1) for a call,
/// -df_for * N(-d1) for a put.
double bs_delta(const BsQuote& q);

/// dPrice/dVol.
double bs_vega(const BsQuote& q);

/// Inverts the premium to a term volatility. The price must lie within
/// [discounted intrinsic, vol->infinity bound); the error names the bound
/// that was violated. Round-trips through bs_vanilla_price to 1e-10.
double bs_implied_vol(double price, const BsQuote& q);

/// Strike at which the premium-excluded spot CALL delta equals
/// `call_delta`, for the given vol: closed-form inversion of N(d1).
/// Put buckets are addressed by call_delta = df_for + delta_put; the
/// delta-neutral straddle corresponds to call_delta = df_for/2.
double strike_from_delta(double call_delta, double vol, double spot, double df_dom,
                         double df_for, double expiry);

/// Delta-neutral straddle strike: F * exp(vol^2 T / 2).
double atm_straddle_strike(double vol, double spot, double df_dom, double df_for,
                           double expiry);

/// Double-no-touch binary: pays 1 (domestic) at expiry iff the spot never
/// leaves (lower, upper). Continuous monitoring, constant vol and rates
/// over the term; the doubly-reflected image series is truncated when a
/// term's contribution drops below 1e-12 (hard cap 200 terms).
/// A spot outside the corridor values to 0 (already knocked).
double bs_dnt_price(double spot, double lower, double upper, double vol, double rd,
                    double rf, double expiry);

} // namespace mrisk
