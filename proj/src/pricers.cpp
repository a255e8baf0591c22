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

#include "mrisk/pricers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <vector>

#include "mrisk/black_scholes.hpp"
#include "mrisk/heston_cf.hpp"
#include "mrisk/math/normal.hpp"
#include "mrisk/math/philox.hpp"

namespace mrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t snapshot_key(std::uint64_t seed, std::uint64_t tag, const MarketSnapshot& s) {
    std::uint64_t k = seed;
    k ^= mix64(s.date_index + 0x51ull);
    k ^= mix64(std::bit_cast<std::uint64_t>(s.spot));
    k ^= mix64(std::bit_cast<std::uint64_t>(s.var));
    return derive_key(k, tag);
}

/// P(min_{[0,tau]} x > b and x_tau > a) for a Brownian path with terminal
/// mean m and standard deviation s; b <= 0, or -inf for no barrier.
double lower_barrier_digital(double b, double a, double m, double s) {
    if (a == kInf)
        return 0.0;
    const double a_eff = (b == -kInf) ? a : std::max(a, b);
    const double direct = (a_eff == -kInf) ? 1.0 : normal_cdf((m - a_eff) / s);
    if (b == -kInf)
        return direct;
    if (b >= 0.0)
        return 0.0;
    const double refl =
        std::exp(2.0 * m * b / (s * s)) * normal_cdf((2.0 * b + m - a_eff) / s);
    return std::max(direct - refl, 0.0);
}

struct RangeLaw {
    double prob;   ///< P(survive KO, endpoint inside the fade range)
    double tilted; ///< the same event under the e^x change of measure
};

RangeLaw range_survival(bool has_ko, double ko_log, bool mirror, double lo_log,
                        double hi_log, double m, double s) {
    RangeLaw out;
    if (!mirror) {
        const double b = has_ko ? ko_log : -kInf;
        out.prob = lower_barrier_digital(b, lo_log, m, s) -
                   lower_barrier_digital(b, hi_log, m, s);
        out.tilted = lower_barrier_digital(b, lo_log, m + s * s, s) -
                     lower_barrier_digital(b, hi_log, m + s * s, s);
    } else {
        // y = -x turns an upper knock-out into a lower barrier; the range
        // condition lo < x < hi becomes -hi < y < -lo and the e^x tilt
        // shifts the y-drift down by s^2
        const double b = has_ko ? -ko_log : -kInf;
        out.prob = lower_barrier_digital(b, hi_log == kInf ? -kInf : -hi_log, -m, s) -
                   lower_barrier_digital(b, lo_log == -kInf ? kInf : -lo_log, -m, s);
        out.tilted =
            lower_barrier_digital(b, hi_log == kInf ? -kInf : -hi_log, -m - s * s, s) -
            lower_barrier_digital(b, lo_log == -kInf ? kInf : -lo_log, -m - s * s, s);
    }
    out.prob = std::max(out.prob, 0.0);
    out.tilted = std::max(out.tilted, 0.0);
    return out;
}

} // namespace

double bs_fader_value(const FaderForwardLeg& leg, const LifecycleState& st, double t,
                      double spot, double vol, const RateCurve& dom, const RateCurve& fr) {
    if (st.expired)
        return 0.0;
    require(leg.expiry - t > -1e-12, "fader value: valuation past expiry");
    const double dfd_e = dom.discount(t, leg.expiry);
    const double dff_e = fr.discount(t, leg.expiry);

    double value = st.accrued * (spot * dff_e - leg.strike * dfd_e);

    const bool dead = st.ko || (leg.has_ko() && leg.knocked(spot));
    if (!dead) {
        if (leg.ko_lower > 0.0 && leg.ko_upper < kInf)
            throw input_error("fader: two knock-out barriers require the Monte Carlo engine");
        const bool mirror = leg.ko_upper < kInf;
        const bool has_ko = leg.has_ko();
        const double ko_log = leg.ko_lower > 0.0 ? std::log(leg.ko_lower / spot)
                              : mirror           ? std::log(leg.ko_upper / spot)
                                                 : 0.0;
        for (std::size_t j = st.next_fade; j < leg.fading_dates.size(); ++j) {
            const double fd = leg.fading_dates[j];
            if (fd <= t + 1e-12)
                continue;
            const double tau = fd - t;
            const double carry = dom.integral(t, fd) - fr.integral(t, fd);
            const double s = vol * std::sqrt(tau);
            const double m = carry - 0.5 * vol * vol * tau;
            const double lo_log =
                leg.lower_fade > 0.0 ? std::log(leg.lower_fade / spot) : -kInf;
            const double hi_log =
                leg.upper_fade < kInf ? std::log(leg.upper_fade / spot) : kInf;
            RangeLaw law;
            if (s < 1e-12) {
                const bool in = (lo_log == -kInf || m > lo_log) &&
                                (hi_log == kInf || m < hi_log);
                law = {in ? 1.0 : 0.0, in ? 1.0 : 0.0};
            } else {
                law = range_survival(has_ko, ko_log, mirror, lo_log, hi_log, m, s);
            }
            // E[1_A S_fd] = spot e^{m+s^2/2} P~(A); grow at the forward rate
            // to expiry and discount back
            const double growth =
                fr.discount(fd, leg.expiry) / dom.discount(fd, leg.expiry);
            const double e_spot = spot * std::exp(m + 0.5 * s * s) * law.tilted;
            const double contrib = dfd_e * (e_spot * growth - leg.strike * law.prob);
            value += leg.fractions[j] * leg.max_notional * contrib;
        }
    }
    return leg.sign * value;
}

// ---------------------------------------------------------------------------

PriceGreeks ModelPricer::greeks(const Portfolio& pf, const PortfolioState& st,
                                const MarketSnapshot& snap) const {
    const double ds = snap.spot * bumps.ds_rel;
    MarketSnapshot up = snap, dn = snap, vb = snap;
    up.spot += ds;
    dn.spot -= ds;
    vb.var += bumps.dv;
    vb.surface = snap.surface_bumped;
    PriceGreeks g;
    g.value = price(pf, st, snap);
    g.delta = (price(pf, st, up) - price(pf, st, dn)) / (2.0 * ds);
    g.vartheta = (price(pf, st, vb) - g.value) / bumps.dv;
    return g;
}

// ---------------------------------------------------------------------------
// Black-Scholes model pricer

namespace {

/// GBM Monte Carlo for a fader leg's future accruals on the remaining grid
/// dates; daily indicator or bridge-weighted knock-out monitoring.
double gbm_fader_mc(const FaderForwardLeg& leg, const LifecycleState& st,
                    const MarketSnapshot& snap, double vol, const BsMcConfig& cfg,
                    Monitoring monitoring) {
    const DateGrid& grid = *snap.grid;
    const std::size_t i0 = snap.date_index;
    const std::size_t ie = grid.index_of(leg.expiry);
    if (ie <= i0)
        return 0.0;
    if (st.ko || (leg.has_ko() && leg.knocked(snap.spot)))
        return 0.0;
    const RateCurve& dom = snap.market->domestic;
    const RateCurve& fr = snap.market->foreign;

    const std::size_t n_steps = ie - i0;
    std::vector<double> drift(n_steps), sq(n_steps), wvar(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double dt = grid.t[i0 + k + 1] - grid.t[i0 + k];
        drift[k] = dom.integral(grid.t[i0 + k], grid.t[i0 + k + 1]) -
                   fr.integral(grid.t[i0 + k], grid.t[i0 + k + 1]) -
                   0.5 * vol * vol * dt;
        sq[k] = vol * std::sqrt(dt);
        wvar[k] = vol * vol * dt;
    }
    std::vector<std::pair<std::size_t, double>> fades; // (step offset, amount)
    for (std::size_t j = st.next_fade; j < leg.fading_dates.size(); ++j) {
        const std::size_t fi = grid.index_of(leg.fading_dates[j]);
        if (fi > i0)
            fades.emplace_back(fi - i0, leg.fractions[j] * leg.max_notional);
    }
    if (fades.empty())
        return 0.0;
    const double ko_lo = leg.ko_lower > 0.0 ? std::log(leg.ko_lower / snap.spot) : -kInf;
    const double ko_hi = leg.ko_upper < kInf ? std::log(leg.ko_upper / snap.spot) : kInf;
    const double fd_lo = leg.lower_fade > 0.0 ? std::log(leg.lower_fade / snap.spot) : -kInf;
    const double fd_hi = leg.upper_fade < kInf ? std::log(leg.upper_fade / snap.spot) : kInf;
    const double dfd_e = dom.discount(snap.t, leg.expiry);
    const bool bridge = monitoring == Monitoring::BrownianBridge && leg.has_ko();

    const std::uint64_t key = snapshot_key(cfg.seed, rng_tag::pricer_bs, snap);
    double sum = 0.0;
    for (std::size_t p = 0; p < cfg.paths; ++p) {
        double x = 0.0, surv = 1.0, accrued = 0.0;
        std::size_t fade_at = 0;
        for (std::size_t k = 0; k < n_steps; ++k) {
            const auto zz = gaussian_pair(key, p, k / 2);
            const double z = (k % 2 == 0) ? zz.z0 : zz.z1;
            const double x1 = x + drift[k] + sq[k] * z;
            if (leg.has_ko() && surv > 0.0) {
                if (x1 <= ko_lo || x1 >= ko_hi) {
                    surv = 0.0;
                } else if (bridge) {
                    if (ko_lo != -kInf) {
                        const double a = -2.0 * (x - ko_lo) * (x1 - ko_lo) / wvar[k];
                        if (a > -41.0)
                            surv *= 1.0 - std::exp(a);
                    }
                    if (ko_hi != kInf) {
                        const double a = -2.0 * (ko_hi - x) * (ko_hi - x1) / wvar[k];
                        if (a > -41.0)
                            surv *= 1.0 - std::exp(a);
                    }
                }
            }
            x = x1;
            while (fade_at < fades.size() && fades[fade_at].first == k + 1) {
                if (surv > 0.0 && x > fd_lo && x < fd_hi)
                    accrued += fades[fade_at].second * surv;
                ++fade_at;
            }
        }
        sum += accrued * (snap.spot * std::exp(x) - leg.strike);
    }
    return dfd_e * sum / static_cast<double>(cfg.paths);
}

} // namespace

double BsPricer::leg_price(const Product& leg, const LifecycleState& st,
                           const MarketSnapshot& snap, double dvol) const {
    if (st.expired)
        return 0.0;
    const VolSurface& surf = *snap.surface;
    const RateCurve& dom = snap.market->domestic;
    const RateCurve& fr = snap.market->foreign;

    if (const auto* dnt = std::get_if<DoubleNoTouch>(&leg)) {
        if (st.hit)
            return 0.0;
        const double tau = snap.remaining(dnt->expiry);
        if (tau <= 1e-12) {
            const bool in = snap.spot > dnt->lower && snap.spot < dnt->upper;
            return in ? dnt->sign * dnt->notional : 0.0;
        }
        const double vol = surf.atm_vol(tau) + dvol;
        const double rd = dom.integral(snap.t, dnt->expiry) / tau;
        const double rf = fr.integral(snap.t, dnt->expiry) / tau;
        return dnt->sign * dnt->notional *
               bs_dnt_price(snap.spot, dnt->lower, dnt->upper, vol, rd, rf, tau);
    }
    if (const auto* van = std::get_if<VanillaOption>(&leg)) {
        const double tau = snap.remaining(van->expiry);
        if (tau <= 1e-12)
            return leg_payoff(leg, st, snap.spot);
        BsQuote q{snap.spot,
                  van->strike,
                  surf.atm_vol(tau) + dvol,
                  dom.discount(snap.t, van->expiry),
                  fr.discount(snap.t, van->expiry),
                  tau,
                  van->is_call};
        return van->sign * van->notional * bs_vanilla_price(q);
    }
    const auto& fader = std::get<FaderForwardLeg>(leg);
    const double tau = snap.remaining(fader.expiry);
    if (tau <= 1e-12)
        return leg_payoff(leg, st, snap.spot);
    const double vol = surf.atm_vol(tau) + dvol;
    if (fader_engine_ == FaderEngine::Analytic)
        return bs_fader_value(fader, st, snap.t, snap.spot, vol, dom, fr);
    // accrued notional is a plain forward; only future accrual is sampled
    const double dfd = dom.discount(snap.t, fader.expiry);
    const double dff = fr.discount(snap.t, fader.expiry);
    const double accrued_part = st.accrued * (snap.spot * dff - fader.strike * dfd);
    return fader.sign * (accrued_part + gbm_fader_mc(fader, st, snap, vol, mc_, monitoring_));
}

double BsPricer::price_shifted(const Portfolio& pf, const PortfolioState& st,
                               const MarketSnapshot& snap, double dvol) const {
    double total = 0.0;
    for (std::size_t i = 0; i < pf.legs.size(); ++i)
        total += leg_price(pf.legs[i], st[i], snap, dvol);
    return total;
}

double BsPricer::price(const Portfolio& pf, const PortfolioState& st,
                       const MarketSnapshot& snap) const {
    return price_shifted(pf, st, snap, 0.0);
}

// ---------------------------------------------------------------------------
// Vanna-volga wrapper

std::array<double, 3> vv_weights(const VvGreeks& product,
                                 const std::array<VvGreeks, 3>& pivots) {
    const double a[3][3] = {{pivots[0].vega, pivots[1].vega, pivots[2].vega},
                            {pivots[0].vanna, pivots[1].vanna, pivots[2].vanna},
                            {pivots[0].volga, pivots[1].volga, pivots[2].volga}};
    const double b[3] = {product.vega, product.vanna, product.volga};

    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if (det == 0.0)
        throw numeric_error("vv_weights: singular pivot system");
    double inv[3][3];
    inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
    inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
    inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
    inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
    inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
    inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
    inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
    inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
    inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;

    double norm_a = 0.0, norm_inv = 0.0;
    for (int j = 0; j < 3; ++j) {
        double ca = 0.0, ci = 0.0;
        for (int i = 0; i < 3; ++i) {
            ca += std::abs(a[i][j]);
            ci += std::abs(inv[i][j]);
        }
        norm_a = std::max(norm_a, ca);
        norm_inv = std::max(norm_inv, ci);
    }
    if (norm_a * norm_inv > 1e10)
        throw numeric_error("vv_weights: pivot system condition number above 1e10");

    std::array<double, 3> x{};
    for (int i = 0; i < 3; ++i)
        x[i] = inv[i][0] * b[0] + inv[i][1] * b[1] + inv[i][2] * b[2];
    return x;
}

double VvPricer::price(const Portfolio& pf, const PortfolioState& st,
                       const MarketSnapshot& snap) const {
    const double p_bs = base_->price(pf, st, snap);

    // pivot tenor: terminal expiry of the legs still able to pay
    double tau = 0.0;
    for (std::size_t i = 0; i < pf.legs.size(); ++i) {
        if (st[i].expired)
            continue;
        if (const auto* dnt = std::get_if<DoubleNoTouch>(&pf.legs[i]))
            if (st[i].hit || snap.spot <= dnt->lower || snap.spot >= dnt->upper)
                continue;
        tau = std::max(tau, snap.remaining(std::visit(
                                [](const auto& p) { return p.expiry; }, pf.legs[i])));
    }
    if (tau <= 1e-10 || attenuation_ == 0.0)
        return p_bs;

    const VolSurface& surf = *snap.surface;
    const auto& wings = surf.spec().wing_deltas;
    std::size_t wing = wings.size();
    for (std::size_t i = 0; i < wings.size(); ++i)
        if (std::abs(wings[i] - pivot_delta_) < 1e-12)
            wing = i;
    require(wing < wings.size(), "vv: pivot delta not in the surface bucket set");
    const std::size_t put_idx = wing;
    const std::size_t call_idx = surf.spec().buckets() - 1 - wing;

    const double dfd = surf.df_dom(tau), dff = surf.df_for(tau);
    const double sig_atm = surf.atm_vol(tau);
    const double sig_p = surf.column_vol(put_idx, tau);
    const double sig_c = surf.column_vol(call_idx, tau);
    const double k_atm = atm_straddle_strike(sig_atm, snap.spot, dfd, dff, tau);
    const double k_p = strike_from_delta(dff - pivot_delta_, sig_p, snap.spot, dfd, dff, tau);
    const double k_c = strike_from_delta(pivot_delta_, sig_c, snap.spot, dfd, dff, tau);
    require(k_p < k_atm && k_atm < k_c, "vv: pivot strikes must increase");

    const double strikes[3] = {k_p, k_atm, k_c};
    const double mkt_vols[3] = {sig_p, sig_atm, sig_c};

    const double dsig = 1e-4;
    const double ds = snap.spot * bumps.ds_rel;

    auto pivot_price = [&](int j, double dv, double s_bump) {
        BsQuote q{snap.spot + s_bump, strikes[j], sig_atm + dv, dfd, dff, tau, true};
        return bs_vanilla_price(q);
    };
    std::array<VvGreeks, 3> pg;
    for (int j = 0; j < 3; ++j) {
        const double pu = pivot_price(j, dsig, 0.0), pd = pivot_price(j, -dsig, 0.0);
        const double p0 = pivot_price(j, 0.0, 0.0);
        pg[j].vega = (pu - pd) / (2.0 * dsig);
        pg[j].volga = (pu - 2.0 * p0 + pd) / (dsig * dsig);
        pg[j].vanna = (pivot_price(j, dsig, ds) - pivot_price(j, dsig, -ds) -
                       pivot_price(j, -dsig, ds) + pivot_price(j, -dsig, -ds)) /
                      (4.0 * dsig * ds);
    }

    auto product_price = [&](double dv, double s_bump) {
        MarketSnapshot s = snap;
        s.spot += s_bump;
        return base_->price_shifted(pf, st, s, dv);
    };
    VvGreeks prod;
    {
        const double pu = product_price(dsig, 0.0), pd = product_price(-dsig, 0.0);
        prod.vega = (pu - pd) / (2.0 * dsig);
        prod.volga = (pu - 2.0 * p_bs + pd) / (dsig * dsig);
        prod.vanna = (product_price(dsig, ds) - product_price(dsig, -ds) -
                      product_price(-dsig, ds) + product_price(-dsig, -ds)) /
                     (4.0 * dsig * ds);
    }

    const auto x = vv_weights(prod, pg);
    double correction = 0.0;
    for (int j = 0; j < 3; ++j) {
        BsQuote mq{snap.spot, strikes[j], mkt_vols[j], dfd, dff, tau, true};
        BsQuote bq{snap.spot, strikes[j], sig_atm, dfd, dff, tau, true};
        correction += x[j] * (bs_vanilla_price(mq) - bs_vanilla_price(bq));
    }
    return p_bs + attenuation_ * correction;
}

// ---------------------------------------------------------------------------
// Reference-model Monte Carlo

namespace {

/// One fused Monte Carlo pass over the remaining grid dates. Prices the
/// path-dependent legs for up to four coupled scenarios sharing one set of
/// normals: base, two spot bumps (threshold shifts on the same paths) and
/// a bumped-variance path. The vanilla legs are priced separately via the
/// characteristic function.
class HestonKernel {
public:
    static constexpr int kUp = 1, kDn = 2, kVb = 3;

    HestonKernel(const Portfolio& pf, const PortfolioState& st, const MarketSnapshot& snap,
                 const HestonMcConfig& cfg, bool with_greeks, GreekBumps bumps)
        : pf_(pf), st_(st), snap_(snap), cfg_(cfg), with_greeks_(with_greeks),
          bumps_(bumps) {
        prepare();
    }

    void run(double out[4], double& se) const;

private:
    struct DntCtx {
        double lo, hi;
        std::size_t exp_off;
        double pay;        // sign * notional * df(t, expiry)
        double cv_mean[4]; // analytic control expectations per variant
    };
    struct FadeEvent {
        std::size_t off;
        double amount;
    };
    struct FaderCtx {
        double ko_lo, ko_hi, fd_lo, fd_hi;
        bool has_ko;
        std::vector<FadeEvent> fades;
        std::size_t exp_off;
        double strike;
        double df_sign;
    };

    void prepare();

    const Portfolio& pf_;
    const PortfolioState& st_;
    const MarketSnapshot& snap_;
    const HestonMcConfig& cfg_;
    bool with_greeks_;
    GreekBumps bumps_;

    std::vector<DntCtx> dnts_;
    std::vector<FaderCtx> faders_;
    std::vector<double> carry_, dt_;
    std::size_t n_steps_ = 0;
    int n_var_ = 1;
    double off_[4] = {0, 0, 0, 0};
    double spot_mult_[4] = {1, 1, 1, 1};
    double sigma0_ = 0.0, sigma0_vb_ = 0.0;
    double analytic_[4] = {0, 0, 0, 0}; // accrued-forward parts per variant
};

void HestonKernel::prepare() {
    const DateGrid& grid = *snap_.grid;
    const std::size_t i0 = snap_.date_index;
    n_steps_ = grid.t.size() - 1 - i0;
    const RateCurve& dom = snap_.market->domestic;
    const RateCurve& fr = snap_.market->foreign;
    carry_.resize(n_steps_);
    dt_.resize(n_steps_);
    for (std::size_t k = 0; k < n_steps_; ++k) {
        dt_[k] = grid.t[i0 + k + 1] - grid.t[i0 + k];
        carry_[k] = dom.integral(grid.t[i0 + k], grid.t[i0 + k + 1]) -
                    fr.integral(grid.t[i0 + k], grid.t[i0 + k + 1]);
    }
    n_var_ = with_greeks_ ? 4 : 1;
    off_[kUp] = std::log1p(bumps_.ds_rel);
    off_[kDn] = std::log1p(-bumps_.ds_rel);
    spot_mult_[kUp] = 1.0 + bumps_.ds_rel;
    spot_mult_[kDn] = 1.0 - bumps_.ds_rel;

    const double horizon = grid.t.back() - grid.t[i0];
    if (horizon > 0.0) {
        const HestonParams state =
            snap_.market->params.at_state(snap_.spot, std::max(snap_.var, 0.0));
        sigma0_ = std::sqrt(expected_variance_integral(state, horizon) / horizon);
        HestonParams pvb = state;
        pvb.v0 += bumps_.dv;
        sigma0_vb_ = std::sqrt(expected_variance_integral(pvb, horizon) / horizon);
    }

    for (std::size_t i = 0; i < pf_.legs.size(); ++i) {
        if (st_[i].expired)
            continue;
        if (const auto* dnt = std::get_if<DoubleNoTouch>(&pf_.legs[i])) {
            if (st_[i].hit || snap_.spot <= dnt->lower || snap_.spot >= dnt->upper)
                continue;
            DntCtx c;
            c.lo = std::log(dnt->lower / snap_.spot);
            c.hi = std::log(dnt->upper / snap_.spot);
            c.exp_off = grid.index_of(dnt->expiry) - i0;
            c.pay = dnt->sign * dnt->notional * dom.discount(snap_.t, dnt->expiry);
            if (cfg_.control_variate) {
                const double tau = dnt->expiry - snap_.t;
                const double rd = tau > 0.0 ? dom.integral(snap_.t, dnt->expiry) / tau : 0.0;
                const double rf = tau > 0.0 ? fr.integral(snap_.t, dnt->expiry) / tau : 0.0;
                const double vols[4] = {sigma0_, sigma0_, sigma0_, sigma0_vb_};
                for (int v = 0; v < n_var_; ++v)
                    c.cv_mean[v] =
                        dnt->sign * dnt->notional *
                        (tau > 0.0 ? bs_dnt_price(snap_.spot * spot_mult_[v], dnt->lower,
                                                  dnt->upper, vols[v], rd, rf, tau)
                                   : 1.0);
            }
            dnts_.push_back(std::move(c));
        } else if (const auto* fader = std::get_if<FaderForwardLeg>(&pf_.legs[i])) {
            const double dff = fr.discount(snap_.t, fader->expiry);
            const double dfd = dom.discount(snap_.t, fader->expiry);
            for (int v = 0; v < n_var_; ++v)
                analytic_[v] += fader->sign * st_[i].accrued *
                                (snap_.spot * spot_mult_[v] * dff - fader->strike * dfd);
            if (st_[i].ko || (fader->has_ko() && fader->knocked(snap_.spot)))
                continue;
            FaderCtx c;
            c.has_ko = fader->has_ko();
            c.ko_lo = fader->ko_lower > 0.0 ? std::log(fader->ko_lower / snap_.spot) : -kInf;
            c.ko_hi = fader->ko_upper < kInf ? std::log(fader->ko_upper / snap_.spot) : kInf;
            c.fd_lo = fader->lower_fade > 0.0 ? std::log(fader->lower_fade / snap_.spot)
                                              : -kInf;
            c.fd_hi = fader->upper_fade < kInf ? std::log(fader->upper_fade / snap_.spot)
                                               : kInf;
            for (std::size_t j = st_[i].next_fade; j < fader->fading_dates.size(); ++j) {
                const std::size_t fi = grid.index_of(fader->fading_dates[j]);
                if (fi > i0)
                    c.fades.push_back({fi - i0, fader->fractions[j] * fader->max_notional});
            }
            if (c.fades.empty())
                continue;
            c.exp_off = grid.index_of(fader->expiry) - i0;
            c.strike = fader->strike;
            c.df_sign = fader->sign * dom.discount(snap_.t, fader->expiry);
            faders_.push_back(std::move(c));
        }
    }
}

void HestonKernel::run(double out[4], double& se) const {
    const std::uint64_t key = snapshot_key(cfg_.seed, rng_tag::pricer_heston, snap_);
    const HestonParams& mp = snap_.market->params;
    const double rho_c = std::sqrt(1.0 - mp.rho * mp.rho);
    const bool bridge = cfg_.monitoring == Monitoring::BrownianBridge;
    const bool cv = cfg_.control_variate && !dnts_.empty();

    double sum[4] = {0, 0, 0, 0};
    double sum2 = 0.0;
    std::vector<double> dnt_surv(dnts_.size() * 4), dnt_cv(dnts_.size() * 4);
    std::vector<double> f_surv(faders_.size() * 4), f_acc(faders_.size() * 4),
        f_pay(faders_.size() * 4);

    for (std::size_t p = 0; p < cfg_.paths; ++p) {
        double x = 0.0, v = snap_.var, xb = 0.0, vb = snap_.var + bumps_.dv;
        double xc = 0.0, xcb = 0.0;
        std::fill(dnt_surv.begin(), dnt_surv.end(), 1.0);
        std::fill(dnt_cv.begin(), dnt_cv.end(), 1.0);
        std::fill(f_surv.begin(), f_surv.end(), 1.0);
        std::fill(f_acc.begin(), f_acc.end(), 0.0);
        std::fill(f_pay.begin(), f_pay.end(), 0.0);

        for (std::size_t k = 0; k < n_steps_; ++k) {
            const auto z = gaussian_pair(key, p, k);
            const double x_prev = x, xb_prev = xb, xc_prev = xc, xcb_prev = xcb;
            const double vp = v > 0.0 ? v : 0.0;
            const double sq = std::sqrt(vp * dt_[k]);
            const double zv = mp.rho * z.z0 + rho_c * z.z1;
            x += carry_[k] - 0.5 * vp * dt_[k] + sq * z.z0;
            v += mp.kappa * (mp.theta - vp) * dt_[k] + mp.eta * sq * zv;
            double vbp = 0.0;
            if (with_greeks_) {
                vbp = vb > 0.0 ? vb : 0.0;
                const double sqb = std::sqrt(vbp * dt_[k]);
                xb += carry_[k] - 0.5 * vbp * dt_[k] + sqb * z.z0;
                vb += mp.kappa * (mp.theta - vbp) * dt_[k] + mp.eta * sqb * zv;
            }
            if (cv) {
                const double sdt = std::sqrt(dt_[k]) * z.z0;
                xc += carry_[k] - 0.5 * sigma0_ * sigma0_ * dt_[k] + sigma0_ * sdt;
                if (with_greeks_)
                    xcb += carry_[k] - 0.5 * sigma0_vb_ * sigma0_vb_ * dt_[k] +
                           sigma0_vb_ * sdt;
            }
            const double sb = 0.5 * (std::sqrt(vp) + std::sqrt(v > 0.0 ? v : 0.0));
            const double w_h = sb * sb * dt_[k];
            double w_hb = 0.0;
            if (with_greeks_) {
                const double sbb = 0.5 * (std::sqrt(vbp) + std::sqrt(vb > 0.0 ? vb : 0.0));
                w_hb = sbb * sbb * dt_[k];
            }
            const double w_c = sigma0_ * sigma0_ * dt_[k];
            const double w_cb = sigma0_vb_ * sigma0_vb_ * dt_[k];

            for (std::size_t d = 0; d < dnts_.size(); ++d) {
                const DntCtx& c = dnts_[d];
                if (k + 1 > c.exp_off)
                    continue;
                for (int vv = 0; vv < n_var_; ++vv) {
                    double& surv = dnt_surv[d * 4 + vv];
                    const double x0 = (vv == kVb ? xb_prev : x_prev) - off_[vv];
                    const double x1 = (vv == kVb ? xb : x) - off_[vv];
                    if (surv > 0.0) {
                        if (x1 <= c.lo || x1 >= c.hi) {
                            surv = 0.0;
                        } else if (bridge) {
                            const double w = vv == kVb ? w_hb : w_h;
                            const double a1 = -2.0 * (x0 - c.lo) * (x1 - c.lo) / w;
                            if (a1 > -41.0)
                                surv *= 1.0 - std::exp(a1);
                            const double a2 = -2.0 * (c.hi - x0) * (c.hi - x1) / w;
                            if (a2 > -41.0)
                                surv *= 1.0 - std::exp(a2);
                        }
                    }
                    if (cv) {
                        double& cs = dnt_cv[d * 4 + vv];
                        const double c0 = (vv == kVb ? xcb_prev : xc_prev) - off_[vv];
                        const double c1 = (vv == kVb ? xcb : xc) - off_[vv];
                        if (cs > 0.0) {
                            if (c1 <= c.lo || c1 >= c.hi) {
                                cs = 0.0;
                            } else {
                                const double w = vv == kVb ? w_cb : w_c;
                                const double a1 = -2.0 * (c0 - c.lo) * (c1 - c.lo) / w;
                                if (a1 > -41.0)
                                    cs *= 1.0 - std::exp(a1);
                                const double a2 = -2.0 * (c.hi - c0) * (c.hi - c1) / w;
                                if (a2 > -41.0)
                                    cs *= 1.0 - std::exp(a2);
                            }
                        }
                    }
                }
            }

            for (std::size_t f = 0; f < faders_.size(); ++f) {
                const FaderCtx& c = faders_[f];
                if (k + 1 > c.exp_off)
                    continue;
                for (int vv = 0; vv < n_var_; ++vv) {
                    double& surv = f_surv[f * 4 + vv];
                    const double x0 = (vv == kVb ? xb_prev : x_prev) - off_[vv];
                    const double x1 = (vv == kVb ? xb : x) - off_[vv];
                    if (surv > 0.0 && c.has_ko) {
                        if (x1 <= c.ko_lo || x1 >= c.ko_hi) {
                            surv = 0.0;
                        } else if (bridge) {
                            const double w = vv == kVb ? w_hb : w_h;
                            if (c.ko_lo != -kInf) {
                                const double a1 = -2.0 * (x0 - c.ko_lo) * (x1 - c.ko_lo) / w;
                                if (a1 > -41.0)
                                    surv *= 1.0 - std::exp(a1);
                            }
                            if (c.ko_hi != kInf) {
                                const double a2 = -2.0 * (c.ko_hi - x0) * (c.ko_hi - x1) / w;
                                if (a2 > -41.0)
                                    surv *= 1.0 - std::exp(a2);
                            }
                        }
                    }
                    for (const auto& fe : c.fades)
                        if (fe.off == k + 1 && surv > 0.0 && x1 > c.fd_lo && x1 < c.fd_hi)
                            f_acc[f * 4 + vv] += fe.amount * surv;
                    if (k + 1 == c.exp_off)
                        f_pay[f * 4 + vv] =
                            f_acc[f * 4 + vv] *
                            (snap_.spot * spot_mult_[vv] * std::exp(vv == kVb ? xb : x) -
                             c.strike);
                }
            }
        }

        for (int vv = 0; vv < n_var_; ++vv) {
            double y = 0.0;
            for (std::size_t d = 0; d < dnts_.size(); ++d) {
                y += dnts_[d].pay * dnt_surv[d * 4 + vv];
                if (cv)
                    y += dnts_[d].cv_mean[vv] - dnts_[d].pay * dnt_cv[d * 4 + vv];
            }
            for (std::size_t f = 0; f < faders_.size(); ++f)
                y += faders_[f].df_sign * f_pay[f * 4 + vv];
            sum[vv] += y;
            if (vv == 0)
                sum2 += y * y;
        }
    }

    const double n = static_cast<double>(cfg_.paths);
    for (int vv = 0; vv < n_var_; ++vv)
        out[vv] = sum[vv] / n + analytic_[vv];
    const double mean = sum[0] / n;
    const double var = std::max(sum2 / n - mean * mean, 0.0);
    se = std::sqrt(var / n);
}

/// Characteristic-function value of the vanilla legs; the reference model
/// prices vanillas exactly, so no sampling noise enters the hedge chain.
double vanilla_legs_value(const Portfolio& pf, const PortfolioState& st,
                          const MarketSnapshot& snap, double spot_bump, double var_bump) {
    double total = 0.0;
    for (std::size_t i = 0; i < pf.legs.size(); ++i) {
        const auto* van = std::get_if<VanillaOption>(&pf.legs[i]);
        if (!van || st[i].expired)
            continue;
        const double tau = snap.remaining(van->expiry);
        const double spot = snap.spot + spot_bump;
        if (tau <= 1e-12) {
            total += leg_payoff(pf.legs[i], st[i], spot);
            continue;
        }
        const HestonParams p =
            snap.market->params.at_state(spot, std::max(snap.var + var_bump, 0.0));
        HestonTermCache cache(p, tau);
        total += van->sign * van->notional *
                 heston_vanilla_from_cache(cache, *snap.market, snap.t, spot, van->strike,
                                           van->expiry, van->is_call);
    }
    return total;
}

} // namespace

double HestonMcPricer::price(const Portfolio& pf, const PortfolioState& st,
                             const MarketSnapshot& snap) const {
    HestonKernel kern(pf, st, snap, cfg_, false, bumps);
    double out[4];
    double se;
    kern.run(out, se);
    return out[0] + vanilla_legs_value(pf, st, snap, 0.0, 0.0);
}

PriceGreeks HestonMcPricer::greeks(const Portfolio& pf, const PortfolioState& st,
                                   const MarketSnapshot& snap) const {
    HestonKernel kern(pf, st, snap, cfg_, true, bumps);
    double out[4];
    double se;
    kern.run(out, se);
    const double ds = snap.spot * bumps.ds_rel;
    const double v0 = vanilla_legs_value(pf, st, snap, 0.0, 0.0);
    const double vu = vanilla_legs_value(pf, st, snap, ds, 0.0);
    const double vd = vanilla_legs_value(pf, st, snap, -ds, 0.0);
    const double vb = vanilla_legs_value(pf, st, snap, 0.0, bumps.dv);
    PriceGreeks g;
    g.value = out[0] + v0;
    g.delta = (out[1] + vu - out[2] - vd) / (2.0 * ds);
    g.vartheta = (out[3] + vb - out[0] - v0) / bumps.dv;
    return g;
}

McPrice heston_mc_price(const Portfolio& pf, const PortfolioState& st,
                        const MarketModel& market, const DateGrid& grid,
                        std::size_t date_index, double spot, double var,
                        const HestonMcConfig& cfg) {
    require(cfg.paths >= 1000, "heston_mc_price: n_paths must be >= 1000");
    MarketSnapshot snap;
    snap.t = grid.t[date_index];
    snap.spot = spot;
    snap.var = var;
    snap.market = &market;
    snap.grid = &grid;
    snap.date_index = date_index;
    HestonKernel kern(pf, st, snap, cfg, false, GreekBumps{});
    double out[4];
    double se;
    kern.run(out, se);
    return {out[0] + vanilla_legs_value(pf, st, snap, 0.0, 0.0), se};
}

// ---------------------------------------------------------------------------

double model_vega_theta(const ModelPricer& pricer, const Portfolio& pf,
                        const PortfolioState& st, const MarketSnapshot& snap,
                        double dsigma) {
    require(snap.surface && snap.surface_bumped,
            "model_vega_theta: needs base and variance-bumped surfaces");
    const VolSurface& base = *snap.surface;
    const double p0 = pricer.price(pf, st, snap);
    double total = 0.0;
    for (std::size_t pi = 0; pi < base.spec().pillars.size(); ++pi) {
        for (std::size_t bi = 0; bi < base.spec().buckets(); ++bi) {
            const VolSurface bumped = base.bumped_node(pi, bi, dsigma);
            MarketSnapshot s = snap;
            s.surface = &bumped;
            const double dp = (pricer.price(pf, st, s) - p0) / dsigma;
            if (dp == 0.0)
                continue;
            const double dsig_dv =
                (snap.surface_bumped->vol(pi, bi) - base.vol(pi, bi)) / pricer.bumps.dv;
            total += dp * dsig_dv;
        }
    }
    return total;
}

} // namespace mrisk
