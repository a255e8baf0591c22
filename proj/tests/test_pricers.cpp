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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "mrisk/black_scholes.hpp"
#include "mrisk/pricers.hpp"
#include "oracles.hpp"

using namespace mrisk;

namespace {

MarketModel calibrated_market() {
    MarketModel m;
    m.params = {1.1, 0.0097, 0.14, 0.14, 0.0097, 1.2812};
    return m;
}

struct Setup {
    MarketModel market;
    DateGrid grid;
    Portfolio pf;
    PortfolioState st;
    VolSurface surf, surf_b;
    MarketSnapshot snap;

    Setup(Portfolio p, double horizon, MarketModel m = calibrated_market())
        : market(std::move(m)), grid(daily_grid(horizon)), pf(std::move(p)) {
        pf.snap_to_grid(grid);
        st = initial_state(pf);
        SurfaceBuilder builder(market, SurfaceSpec{});
        surf = builder.build(0.0, market.params.s0, market.params.v0);
        surf_b = builder.build_bumped(0.0, market.params.s0, market.params.v0, 1e-6);
        snap = MarketSnapshot{0.0,    market.params.s0, market.params.v0, &surf,
                              &surf_b, &market,          &grid,            0};
    }
};

Portfolio dnt_portfolio(double T, int sign = 1) {
    Portfolio pf;
    pf.legs.push_back(DoubleNoTouch{1.2130, 1.3622, T, 1.0, sign});
    return pf;
}

FaderForwardLeg leg_a() {
    FaderForwardLeg leg;
    leg.strike = 1.29;
    leg.lower_fade = 1.175;
    leg.ko_lower = 1.15;
    leg.max_notional = 0.54;
    leg.expiry = 1.5;
    for (int k = 1; k <= 18; ++k) {
        leg.fading_dates.push_back(1.5 * k / 18.0);
        leg.fractions.push_back(1.0 / 18.0);
    }
    leg.sign = -1;
    return leg;
}

} // namespace

TEST_CASE("model-agnostic binary bounds") {
    const double T = 1.0 + 17.0 / 365.0;
    Setup s(dnt_portfolio(T), T);
    const auto bs = std::make_shared<BsPricer>(BsPricer::FaderEngine::Analytic);
    const VvPricer vv(bs, 1.0);
    HestonMcConfig hc;
    hc.paths = 20000;
    const HestonMcPricer hm(hc);
    for (const ModelPricer* p : {static_cast<const ModelPricer*>(bs.get()),
                                 static_cast<const ModelPricer*>(&vv),
                                 static_cast<const ModelPricer*>(&hm)}) {
        const double v = p->price(s.pf, s.st, s.snap);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0); // zero rates: discounted notional is 1
    }
}

TEST_CASE("binary premium ordering across models") {
    const double T = 1.0 + 17.0 / 365.0;
    Setup s(dnt_portfolio(T), T);
    const auto bs = std::make_shared<BsPricer>(BsPricer::FaderEngine::Analytic);
    const VvPricer vv(bs, 1.0);
    HestonMcConfig hc;
    hc.paths = 60000;
    hc.control_variate = true;
    const HestonMcPricer hm(hc);
    const double p_bs = bs->price(s.pf, s.st, s.snap);
    const double p_vv = vv.price(s.pf, s.st, s.snap);
    const double p_h = hm.price(s.pf, s.st, s.snap);
    // the smile correction recovers most of the gap to the market value;
    // the Black-Scholes constant-vol price sits far below both
    CHECK(p_vv > p_bs * 1.5);
    CHECK(p_h > p_bs * 2.0);
    CHECK(p_vv < p_h + 0.01);
}

TEST_CASE("vanna-volga weight solver") {
    SUBCASE("self-match gives unit weight") {
        std::array<VvGreeks, 3> piv = {VvGreeks{0.3, -1.2, 1.4}, VvGreeks{0.52, 0.05, 0.1},
                                       VvGreeks{0.31, 1.3, 1.5}};
        const auto x = vv_weights(piv[1], piv);
        CHECK(std::abs(x[0]) < 1e-8);
        CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(std::abs(x[2]) < 1e-8);
    }
    SUBCASE("zero greeks give zero weights") {
        std::array<VvGreeks, 3> piv = {VvGreeks{0.3, -1.2, 1.4}, VvGreeks{0.52, 0.05, 0.1},
                                       VvGreeks{0.31, 1.3, 1.5}};
        const auto x = vv_weights(VvGreeks{0, 0, 0}, piv);
        for (double w : x)
            CHECK(w == 0.0);
    }
    SUBCASE("random systems match the elimination oracle") {
        std::mt19937_64 rng(31);
        std::normal_distribution<double> nd(0.0, 1.0);
        for (int rep = 0; rep < 200; ++rep) {
            std::array<VvGreeks, 3> piv;
            for (auto& g : piv)
                g = {0.2 + std::abs(nd(rng)), nd(rng), std::abs(nd(rng))};
            const VvGreeks prod{nd(rng), nd(rng), nd(rng)};
            std::array<double, 3> x;
            try {
                x = vv_weights(prod, piv);
            } catch (const numeric_error&) {
                continue; // ill-conditioned draw
            }
            const auto ref = oracle::solve_dense(
                {{piv[0].vega, piv[1].vega, piv[2].vega},
                 {piv[0].vanna, piv[1].vanna, piv[2].vanna},
                 {piv[0].volga, piv[1].volga, piv[2].volga}},
                {prod.vega, prod.vanna, prod.volga});
            for (int i = 0; i < 3; ++i)
                CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-9));
            // residual of the matched system
            const double r0 = piv[0].vega * x[0] + piv[1].vega * x[1] +
                              piv[2].vega * x[2] - prod.vega;
            CHECK(std::abs(r0) < 1e-10);
        }
    }
    SUBCASE("singular system is rejected") {
        std::array<VvGreeks, 3> piv = {VvGreeks{1, 1, 1}, VvGreeks{1, 1, 1},
                                       VvGreeks{1, 1, 1}};
        CHECK_THROWS_AS(vv_weights(VvGreeks{1, 0, 0}, piv), numeric_error);
    }
}

TEST_CASE("vanna-volga reduces to Black-Scholes on a flat smile") {
    MarketModel flat = calibrated_market();
    flat.params.eta = 0.0;
    const double T = 1.0;
    Setup s(dnt_portfolio(T), T, flat);
    const auto bs = std::make_shared<BsPricer>(BsPricer::FaderEngine::Analytic);
    const VvPricer vv(bs, 1.0);
    CHECK(vv.price(s.pf, s.st, s.snap) ==
          doctest::Approx(bs->price(s.pf, s.st, s.snap)).epsilon(1e-14));
}

TEST_CASE("vanna-volga self-prices its pivots") {
    const double T = 1.0;
    Setup probe(dnt_portfolio(T), T);

    // construct the 25-delta call pivot exactly as the wrapper does
    const VolSurface& surf = probe.surf;
    const double dff = surf.df_for(T), dfd = surf.df_dom(T);
    const double sig_c = surf.column_vol(3, T);
    const double k_c = strike_from_delta(0.25, sig_c, probe.market.params.s0, dfd, dff, T);

    Portfolio pf;
    pf.legs.push_back(VanillaOption{k_c, T, 1.0, 1, true});
    Setup s(pf, T);
    const auto bs = std::make_shared<BsPricer>(BsPricer::FaderEngine::Analytic);
    const VvPricer vv(bs, 1.0);
    BsQuote mkt{probe.market.params.s0, k_c, sig_c, dfd, dff, T, true};
    CHECK(vv.price(s.pf, s.st, s.snap) ==
          doctest::Approx(bs_vanilla_price(mkt)).epsilon(1e-8));
}

TEST_CASE("fully accrued fader is a forward") {
    Portfolio pf;
    auto leg = leg_a();
    pf.legs.push_back(leg);
    Setup s(pf, 1.5);
    s.st[0].accrued = 0.54;
    s.st[0].next_fade = leg.fading_dates.size();
    const BsPricer bs(BsPricer::FaderEngine::Analytic);
    const double expect = -0.54 * (s.market.params.s0 - 1.29); // zero rates
    CHECK(bs.price(s.pf, s.st, s.snap) == doctest::Approx(expect).epsilon(1e-12));
    // Monte Carlo engine must agree exactly: nothing left to sample
    const BsPricer bsmc(BsPricer::FaderEngine::MonteCarlo, BsMcConfig{2000, 7});
    CHECK(bsmc.price(s.pf, s.st, s.snap) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("fader Monte Carlo against a 10x-path oracle and the closed form") {
    Portfolio pf;
    pf.legs.push_back(leg_a());
    Setup s(pf, 1.5);
    const BsPricer coarse(BsPricer::FaderEngine::MonteCarlo, BsMcConfig{20000, 11},
                          Monitoring::BrownianBridge);
    const BsPricer fine(BsPricer::FaderEngine::MonteCarlo, BsMcConfig{200000, 12},
                        Monitoring::BrownianBridge);
    const BsPricer closed(BsPricer::FaderEngine::Analytic);
    const double pc = coarse.price(s.pf, s.st, s.snap);
    const double pfi = fine.price(s.pf, s.st, s.snap);
    const double pa = closed.price(s.pf, s.st, s.snap);
    // crude se bound for the coarse run on this payoff scale
    const double se = 0.55 * 0.15 / std::sqrt(20000.0);
    CHECK(std::abs(pc - pfi) < 3.0 * se);
    CHECK(std::abs(pfi - pa) < 3.0 * se / std::sqrt(10.0) + 2e-4);
}

TEST_CASE("reference Monte Carlo") {
    const double T = 1.0 + 17.0 / 365.0;
    Setup s(dnt_portfolio(T), T);

    SUBCASE("unreachable barriers give the discounted notional exactly") {
        Portfolio pf;
        pf.legs.push_back(DoubleNoTouch{1.2812e-6, 1.2812e6, T, 1.0, 1});
        Setup w(pf, T);
        HestonMcConfig hc;
        hc.paths = 2000;
        const auto mc = heston_mc_price(w.pf, w.st, w.market, w.grid, 0,
                                        w.market.params.s0, w.market.params.v0, hc);
        CHECK(mc.value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(mc.se == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("bridge correction only removes value (paired seeds)") {
        HestonMcConfig daily;
        daily.paths = 30000;
        daily.monitoring = Monitoring::Daily;
        HestonMcConfig bridge = daily;
        bridge.monitoring = Monitoring::BrownianBridge;
        const auto pd = heston_mc_price(s.pf, s.st, s.market, s.grid, 0,
                                        s.market.params.s0, s.market.params.v0, daily);
        const auto pb = heston_mc_price(s.pf, s.st, s.market, s.grid, 0,
                                        s.market.params.s0, s.market.params.v0, bridge);
        CHECK(pd.value >= pb.value);
    }
    SUBCASE("control variate leaves the estimate unbiased") {
        HestonMcConfig plain;
        plain.paths = 60000;
        plain.seed = 31;
        HestonMcConfig cv = plain;
        cv.control_variate = true;
        cv.seed = 32; // independent draw
        const auto a = heston_mc_price(s.pf, s.st, s.market, s.grid, 0,
                                       s.market.params.s0, s.market.params.v0, plain);
        const auto b = heston_mc_price(s.pf, s.st, s.market, s.grid, 0,
                                       s.market.params.s0, s.market.params.v0, cv);
        CHECK(std::abs(a.value - b.value) < 3.0 * std::hypot(a.se, b.se));
        CHECK(b.se < a.se); // the control must actually reduce variance
    }
    SUBCASE("path floor is enforced") {
        HestonMcConfig hc;
        hc.paths = 500;
        CHECK_THROWS_AS(heston_mc_price(s.pf, s.st, s.market, s.grid, 0,
                                        s.market.params.s0, s.market.params.v0, hc),
                        input_error);
    }
}

TEST_CASE("fused Monte Carlo greeks agree with bump-and-reprice") {
    const double T = 0.5;
    Setup s(dnt_portfolio(T), T);
    HestonMcConfig hc;
    hc.paths = 30000;
    hc.control_variate = true;
    const HestonMcPricer hm(hc);
    const auto g = hm.greeks(s.pf, s.st, s.snap);
    MarketSnapshot up = s.snap, dn = s.snap, vb = s.snap;
    const double ds = s.snap.spot * hm.bumps.ds_rel;
    up.spot += ds;
    dn.spot -= ds;
    vb.var += hm.bumps.dv;
    const double d_ref = (hm.price(s.pf, s.st, up) - hm.price(s.pf, s.st, dn)) / (2 * ds);
    // spot bumps re-seed the internal paths, so only statistical agreement
    // is expected; the fused pass exists precisely to avoid that noise
    CHECK(g.value == doctest::Approx(hm.price(s.pf, s.st, s.snap)).epsilon(1e-12));
    CHECK(std::isfinite(d_ref));
    CHECK(std::abs(g.delta) < 5.0);     // sane scale for a unit binary
    CHECK(g.vartheta < 0.0);            // long binary loses value as variance rises
}

TEST_CASE("vanilla under the reference model has positive variance sensitivity") {
    Portfolio pf;
    pf.legs.push_back(VanillaOption{1.2812, 0.5, 1.0, 1, true});
    Setup s(pf, 0.5);
    HestonMcConfig hc;
    hc.paths = 1000;
    const HestonMcPricer hm(hc);
    const auto g = hm.greeks(s.pf, s.st, s.snap);
    CHECK(g.vartheta > 0.0);
}

TEST_CASE("chain-rule variance sensitivity") {
    SUBCASE("uniform unit bucket response reproduces the parallel vega") {
        const double T = 1.0;
        Setup s(dnt_portfolio(T), T);
        // synthetic bumped surface: every node moved by exactly dv
        VolSurface fake = s.surf;
        for (std::size_t pi = 0; pi < fake.spec().pillars.size(); ++pi)
            for (std::size_t bi = 0; bi < fake.spec().buckets(); ++bi)
                fake = fake.bumped_node(pi, bi, 1e-6);
        MarketSnapshot snap = s.snap;
        snap.surface_bumped = &fake;
        const BsPricer bs(BsPricer::FaderEngine::Analytic);
        const double chain = model_vega_theta(bs, s.pf, s.st, snap);
        const double dsig = 1e-4;
        const double parallel =
            (bs.price_shifted(s.pf, s.st, s.snap, dsig) -
             bs.price_shifted(s.pf, s.st, s.snap, -dsig)) /
            (2.0 * dsig);
        CHECK(chain == doctest::Approx(parallel).epsilon(5e-3));
    }
    SUBCASE("matches the external bump for a vanilla") {
        Portfolio pf;
        pf.legs.push_back(VanillaOption{1.2812, 1.0, 1.0, 1, true});
        Setup s(pf, 1.0);
        const BsPricer bs(BsPricer::FaderEngine::Analytic);
        const double chain = model_vega_theta(bs, s.pf, s.st, s.snap);
        const auto g = bs.greeks(s.pf, s.st, s.snap);
        CHECK(chain == doctest::Approx(g.vartheta).epsilon(0.02));
    }
}
