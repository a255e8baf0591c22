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

#include "mrisk/hedging.hpp"

#include <cmath>
#include <optional>

#include "mrisk/black_scholes.hpp"
#include "mrisk/heston_cf.hpp"
#include "mrisk/math/normal.hpp"
#include "mrisk/math/philox.hpp"

namespace mrisk {

namespace {

constexpr std::uint64_t kLifecycleTag = 0x4C494645ull; // intraday knock draws

struct HedgeInstrument {
    double strike = 0.0;
    double expiry = 0.0; // absolute year fraction
};

/// Stochastic intraday knocks for the bridge-monitored lifecycle: each
/// interval kills a live barrier with its crossing probability, using the
/// step vol implied by the endpoint variances. Deterministic per path.
void bridge_lifecycle(const Portfolio& pf, PortfolioState& st, const PathGrid& path,
                      const DateGrid& grid, std::size_t i, std::uint64_t key,
                      std::string* events) {
    const double dt = grid.t[i] - grid.t[i - 1];
    const double s0 = path.spot[i - 1], s1 = path.spot[i];
    const double sbar = 0.5 * (std::sqrt(path.var[i - 1]) + std::sqrt(path.var[i]));
    const double w = sbar * sbar * dt;
    if (w <= 0.0)
        return;
    auto surv_prob = [&](double lo, double hi) {
        double p = 1.0;
        if (lo > 0.0) {
            const double a = -2.0 * std::log(s0 / lo) * std::log(s1 / lo) / w;
            if (a > -41.0)
                p *= 1.0 - std::exp(a);
        }
        if (std::isfinite(hi)) {
            const double a = -2.0 * std::log(hi / s0) * std::log(hi / s1) / w;
            if (a > -41.0)
                p *= 1.0 - std::exp(a);
        }
        return p;
    };
    auto log = [&](const char* tag) {
        if (events) {
            if (!events->empty())
                *events += ';';
            *events += tag;
        }
    };

    for (std::size_t l = 0; l < pf.legs.size(); ++l) {
        if (st[l].expired)
            continue;
        const double u = gaussian_pair(key, path.path_id * 131 + l, i).z0; // N(0,1)
        const double uu = normal_cdf(u);                                   // uniform
        if (const auto* dnt = std::get_if<DoubleNoTouch>(&pf.legs[l])) {
            if (st[l].hit || grid.t[i] > dnt->expiry)
                continue;
            if (s0 > dnt->lower && s0 < dnt->upper && s1 > dnt->lower && s1 < dnt->upper) {
                if (uu > surv_prob(dnt->lower, dnt->upper)) {
                    st[l].hit = true;
                    st[l].hit_time = grid.t[i];
                    log("bridge_knock");
                }
            }
        } else if (const auto* fader = std::get_if<FaderForwardLeg>(&pf.legs[l])) {
            if (!fader->has_ko() || st[l].ko)
                continue;
            if (!fader->knocked(s0) && !fader->knocked(s1)) {
                const double lo = fader->ko_lower;
                const double hi = fader->ko_upper;
                if (uu > surv_prob(lo, hi)) {
                    st[l].ko = true;
                    log("bridge_ko");
                }
            }
        }
    }
}

/// True when no leg carries value or risk any more (expired, or a dead
/// binary waiting for its worthless expiry).
bool value_dead(const Portfolio& pf, const PortfolioState& st) {
    for (std::size_t i = 0; i < pf.legs.size(); ++i) {
        if (st[i].expired)
            continue;
        if (const auto* dnt = std::get_if<DoubleNoTouch>(&pf.legs[i])) {
            (void)dnt;
            if (!st[i].hit)
                return false;
        } else if (const auto* fader = std::get_if<FaderForwardLeg>(&pf.legs[i])) {
            // knocked faders still hold a forward on the accrued notional
            if (!st[i].ko || st[i].accrued != 0.0)
                return false;
            (void)fader;
        } else {
            return false;
        }
    }
    return true;
}

} // namespace

HedgeResult run_hedge_path(const MarketModel& market, const SurfaceSpec& surface_spec,
                           const Portfolio& pf, const ModelPricer& pricer,
                           const DateGrid& grid, const PathGrid& path,
                           const HedgeConfig& cfg, std::uint64_t study_seed) {
    HedgeResult result;
    const std::size_t n = grid.t.size();
    result.rows.reserve(n);

    // the smile is rebuilt in full when the model reads it; a market-factor
    // pricer only needs the straddle column at the hedge tenor
    SurfaceSpec spec = surface_spec;
    if (!pricer.uses_surface())
        spec.pillars = {cfg.vanilla_tenor};
    const SurfaceBuilder builder(market, spec);

    const std::uint64_t life_key = derive_key(study_seed, kLifecycleTag);
    PortfolioState states = initial_state(pf);

    Ledger ledger;
    std::optional<HedgeInstrument> held;

    try {
        for (std::size_t i = 0; i < n; ++i) {
            const double t = grid.t[i];
            const double spot = path.spot[i];
            const double var = path.var[i];
            std::string events;

            if (cfg.monitoring == Monitoring::BrownianBridge && i > 0)
                bridge_lifecycle(pf, states, path, grid, i, life_key, &events);
            ledger.flow(update_events(pf, states, t, spot, &events));

            const bool dead = value_dead(pf, states);
            const bool last = (i + 1 == n);
            const bool want_position = !last && !dead && !cfg.unhedged;

            // mark the held hedge vanilla for the unwind leg of the trade
            double c_old = 0.0;
            if (ledger.beta != 0.0) {
                const double tau_old = held->expiry - t;
                if (tau_old > 1e-12) {
                    const HestonTermCache cache(
                        market.params.at_state(spot, std::max(var, 0.0)), tau_old);
                    c_old = heston_vanilla_from_cache(cache, market, t, spot,
                                                      held->strike, held->expiry, true);
                } else {
                    c_old = std::max(spot - held->strike, 0.0);
                }
            }

            // portfolio value and external sensitivities
            PriceGreeks g;
            std::optional<VolSurface> surf, surf_b;
            if (!dead) {
                const bool need_surface = pricer.uses_surface() || want_position;
                if (need_surface) {
                    surf = builder.build(t, spot, var);
                    if (pricer.uses_surface() && !last)
                        surf_b = builder.build_bumped(t, spot, var, pricer.bumps.dv);
                }
                MarketSnapshot snap;
                snap.t = t;
                snap.spot = spot;
                snap.var = var;
                snap.surface = surf ? &*surf : nullptr;
                snap.surface_bumped = surf_b ? &*surf_b : nullptr;
                snap.market = &market;
                snap.grid = &grid;
                snap.date_index = i;
                if (want_position)
                    g = pricer.greeks(pf, states, snap);
                else
                    g.value = pricer.price(pf, states, snap);
            }
            if (i == 0)
                ledger.flow(-g.value); // the deal is put on at its model price

            // new hedge position cancelling the two market factors
            double alpha_new = 0.0, beta_new = 0.0, c_new = 0.0;
            if (want_position) {
                if (cfg.roll == HedgeRoll::Restrike || !held) {
                    const double tau = cfg.vanilla_tenor;
                    const double sig_atm = surf->atm_vol(tau);
                    const double dfd = market.domestic.discount(t, t + tau);
                    const double dff = market.foreign.discount(t, t + tau);
                    held = HedgeInstrument{
                        atm_straddle_strike(sig_atm, spot, dfd, dff, tau), t + tau};
                }
                const double tau_new = held->expiry - t;
                const HestonTermCache cache_v(
                    market.params.at_state(spot, std::max(var, 0.0)), tau_new);
                const HestonTermCache cache_vb(
                    market.params.at_state(spot, std::max(var, 0.0) + pricer.bumps.dv),
                    tau_new);
                const double ds = spot * pricer.bumps.ds_rel;
                c_new = heston_vanilla_from_cache(cache_v, market, t, spot, held->strike,
                                                  held->expiry, true);
                const double c_up = heston_vanilla_from_cache(
                    cache_v, market, t, spot + ds, held->strike, held->expiry, true);
                const double c_dn = heston_vanilla_from_cache(
                    cache_v, market, t, spot - ds, held->strike, held->expiry, true);
                const double c_vb = heston_vanilla_from_cache(
                    cache_vb, market, t, spot, held->strike, held->expiry, true);
                const double delta_c = (c_up - c_dn) / (2.0 * ds);
                const double theta_c = (c_vb - c_new) / pricer.bumps.dv;
                if (std::abs(theta_c) < cfg.theta_floor)
                    throw numeric_error(
                        "hedge vanilla variance sensitivity degenerate at t=" +
                        std::to_string(t));
                beta_new = -g.vartheta / theta_c;
                alpha_new = -(g.delta + beta_new * delta_c) / ledger.bf;
            }
            ledger.rebalance(alpha_new, beta_new, spot, c_old, c_new);

            LedgerRow row;
            row.t = t;
            row.spot = spot;
            row.var = var;
            row.delta = g.delta;
            row.vartheta = g.vartheta;
            row.alpha = ledger.alpha;
            row.beta = ledger.beta;
            row.cash = ledger.cash;
            row.pi = g.value;
            row.pi_tot = g.value + ledger.cash + ledger.position_value(spot, c_new);
            row.events = std::move(events);
            result.rows.push_back(std::move(row));

            if (!last)
                ledger.accrue(market.domestic.discount(t, grid.t[i + 1]),
                              market.foreign.discount(t, grid.t[i + 1]));
        }
    } catch (const std::exception& e) {
        result.error = true;
        result.error_message = e.what();
    }
    return result;
}

} // namespace mrisk
