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

#include "mrisk/black_scholes.hpp"
#include "mrisk/heston_cf.hpp"
#include "mrisk/surface.hpp"

using namespace mrisk;

namespace {

MarketModel calibrated_market() {
    MarketModel m;
    m.params = {1.1, 0.0097, 0.14, 0.14, 0.0097, 1.2812};
    m.domestic = RateCurve(0.0);
    m.foreign = RateCurve(0.0);
    return m;
}

} // namespace

TEST_CASE("flat smile without vol-of-variance") {
    MarketModel m = calibrated_market();
    m.params.eta = 0.0;
    m.params.v0 = 0.015;
    SurfaceBuilder builder(m, SurfaceSpec{});
    const VolSurface s = builder.build(0.0, m.params.s0, m.params.v0);
    for (std::size_t pi = 0; pi < s.spec().pillars.size(); ++pi) {
        const double tau = s.spec().pillars[pi];
        const double expect =
            std::sqrt(expected_variance_integral(m.params.at_state(1, 0.015), tau) / tau);
        for (std::size_t b = 0; b < s.spec().buckets(); ++b)
            CHECK(s.vol(pi, b) == doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("calibrated market skews toward out-of-the-money calls") {
    MarketModel m = calibrated_market();
    SurfaceBuilder builder(m, SurfaceSpec{});
    const VolSurface s = builder.build(0.0, m.params.s0, m.params.v0);
    const std::size_t y1 = 3; // 1y pillar
    const std::size_t put25 = 1, call25 = 3;
    CHECK(s.vol(y1, call25) > s.vol(y1, put25));
}

TEST_CASE("every bucket survives an independent single-point recheck") {
    MarketModel m = calibrated_market();
    SurfaceSpec spec;
    SurfaceBuilder builder(m, spec);
    const VolSurface s = builder.build(0.0, m.params.s0, m.params.v0);
    for (std::size_t pi = 0; pi < spec.pillars.size(); ++pi) {
        const double tau = spec.pillars[pi];
        const HestonTermCache cache(m.params.at_state(m.params.s0, m.params.v0), tau);
        const auto targets = s.bucket_call_deltas(pi);
        for (std::size_t b = 0; b < spec.buckets(); ++b) {
            const double k = s.bucket_strike(pi, b);
            const double dfd = s.df_dom(tau), dff = s.df_for(tau);
            const double fwd = s.forward(tau);
            const double price = cache.call(fwd, k, dfd);
            BsQuote q{m.params.s0, k, 0.0, dfd, dff, tau, true};
            const double iv = bs_implied_vol(price, q);
            q.vol = iv;
            CHECK(std::abs(bs_delta(q) - targets[b]) < 1e-6);
        }
    }
}

TEST_CASE("fixed point: one extra pass moves nothing beyond tolerance") {
    MarketModel m = calibrated_market();
    SurfaceSpec spec;
    SurfaceBuilder builder(m, spec);
    const VolSurface s = builder.build(0.0, m.params.s0, m.params.v0);
    // re-derive each bucket vol from its own strike; must sit within the
    // delta tolerance mapped through the local vol/delta slope
    for (std::size_t pi = 0; pi < spec.pillars.size(); ++pi) {
        const double tau = spec.pillars[pi];
        const HestonTermCache cache(m.params.at_state(m.params.s0, m.params.v0), tau);
        for (std::size_t b = 0; b < spec.buckets(); ++b) {
            const double k = s.bucket_strike(pi, b);
            const double price = cache.call(s.forward(tau), k, s.df_dom(tau));
            BsQuote q{m.params.s0, k, 0.0, s.df_dom(tau), s.df_for(tau), tau, true};
            const double iv = bs_implied_vol(price, q);
            CHECK(std::abs(iv - s.vol(pi, b)) < 5e-5);
        }
    }
}

TEST_CASE("spot-bump invariance is exact") {
    MarketModel m = calibrated_market();
    SurfaceBuilder builder(m, SurfaceSpec{});
    const VolSurface a = builder.build(0.0, m.params.s0, m.params.v0);
    const VolSurface b = builder.build(0.0, m.params.s0 * 1.0001, m.params.v0);
    for (std::size_t pi = 0; pi < a.spec().pillars.size(); ++pi)
        for (std::size_t bi = 0; bi < a.spec().buckets(); ++bi)
            CHECK(a.vol(pi, bi) == b.vol(pi, bi));
}

TEST_CASE("surface builds are deterministic") {
    MarketModel m = calibrated_market();
    SurfaceBuilder builder(m, SurfaceSpec{});
    const VolSurface a = builder.build(0.25, 1.30, 0.008);
    const VolSurface b = builder.build(0.25, 1.30, 0.008);
    for (std::size_t pi = 0; pi < a.spec().pillars.size(); ++pi)
        for (std::size_t bi = 0; bi < a.spec().buckets(); ++bi)
            CHECK(a.vol(pi, bi) == b.vol(pi, bi));
}

TEST_CASE("queries") {
    MarketModel m = calibrated_market();
    SurfaceBuilder builder(m, SurfaceSpec{});
    const VolSurface s = builder.build(0.0, m.params.s0, m.params.v0);

    SUBCASE("node exactness at a bucket strike") {
        const std::size_t pi = 3, bi = 2; // 1y straddle node
        const double k = s.bucket_strike(pi, bi);
        CHECK(s.vol_at_strike(k, s.spec().pillars[pi]) ==
              doctest::Approx(s.vol(pi, bi)).epsilon(1e-9));
    }
    SUBCASE("flat surface returns the flat value everywhere") {
        MarketModel mf = calibrated_market();
        mf.params.eta = 0.0;
        SurfaceBuilder fb(mf, SurfaceSpec{});
        const VolSurface f = fb.build(0.0, mf.params.s0, mf.params.v0);
        const double expect = std::sqrt(0.0097);
        CHECK(f.vol_at_strike(1.22, 0.7) == doctest::Approx(expect).epsilon(1e-7));
        CHECK(f.vol_at_strike(1.35, 1.4) == doctest::Approx(expect).epsilon(1e-7));
        CHECK(f.atm_vol(0.33) == doctest::Approx(expect).epsilon(1e-7));
    }
    SUBCASE("mid-pillar query matches a dense-pillar rebuild within 10bp") {
        SurfaceSpec dense;
        dense.pillars = {1.0 / 12.0, 0.25, 0.4, 0.5, 0.75, 1.0, 1.5, 2.0};
        SurfaceBuilder db(m, dense);
        const VolSurface d = db.build(0.0, m.params.s0, m.params.v0);
        for (double k : {1.22, 1.2812, 1.34})
            CHECK(std::abs(s.vol_at_strike(k, 0.75) - d.vol_at_strike(k, 0.75)) < 0.0010);
    }
    SUBCASE("expiry range is enforced") {
        CHECK_THROWS_AS(s.vol_at_strike(1.28, 0.01), input_error);
        CHECK_THROWS_AS(s.vol_at_strike(1.28, 3.5), input_error);
    }
}

TEST_CASE("variance bumps") {
    MarketModel m = calibrated_market();
    SurfaceBuilder builder(m, SurfaceSpec{});
    const double s0 = m.params.s0, v0 = m.params.v0;

    SUBCASE("zero bump is the identity") {
        const VolSurface a = builder.build(0.0, s0, v0);
        const VolSurface b = builder.build_bumped(0.0, s0, v0, 0.0);
        for (std::size_t pi = 0; pi < a.spec().pillars.size(); ++pi)
            for (std::size_t bi = 0; bi < a.spec().buckets(); ++bi)
                CHECK(a.vol(pi, bi) == b.vol(pi, bi));
    }
    SUBCASE("positive bump lifts all buckets (term-structure response)") {
        const VolSurface a = builder.build(0.0, s0, v0);
        const VolSurface b = builder.build_bumped(0.0, s0, v0, 1e-4);
        for (std::size_t pi = 0; pi < a.spec().pillars.size(); ++pi)
            for (std::size_t bi = 0; bi < a.spec().buckets(); ++bi)
                CHECK(b.vol(pi, bi) > a.vol(pi, bi));
    }
    SUBCASE("bump response is parallel across deltas") {
        const VolSurface a = builder.build(0.0, s0, v0);
        const VolSurface b = builder.build_bumped(0.0, s0, v0, 1e-4);
        for (std::size_t pi = 0; pi < a.spec().pillars.size(); ++pi) {
            double lo = 1e9, hi = -1e9;
            for (std::size_t bi = 0; bi < a.spec().buckets(); ++bi) {
                const double move = b.vol(pi, bi) - a.vol(pi, bi);
                lo = std::min(lo, move);
                hi = std::max(hi, move);
            }
            CHECK((hi - lo) / hi < 0.25); // same direction, same order
        }
    }
    SUBCASE("finite-difference vol sensitivity is Richardson-stable") {
        const std::size_t y1 = 3, atm = 2;
        const VolSurface base = builder.build(0.0, s0, v0);
        auto sens = [&](double dv) {
            const VolSurface b = builder.build_bumped(0.0, s0, v0, dv);
            return (b.vol(y1, atm) - base.vol(y1, atm)) / dv;
        };
        const double s1 = sens(1e-6);
        const double s2 = sens(5e-7);
        CHECK(std::abs(s1 - s2) / std::abs(s1) < 1e-3);
    }
}

TEST_CASE("non-convergence carries the worst residual") {
    MarketModel m = calibrated_market();
    SurfaceSpec spec;
    spec.max_iterations = 1;
    spec.tolerance = 1e-14;
    SurfaceBuilder builder(m, spec);
    CHECK_THROWS_WITH_AS(builder.build(0.0, m.params.s0, m.params.v0),
                         doctest::Contains("worst delta residual"), numeric_error);
}
