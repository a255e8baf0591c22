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
#include <random>

#include "mrisk/risk.hpp"
#include "oracles.hpp"

using namespace mrisk;

TEST_CASE("quantile hand cases") {
    const std::vector<double> x = {-4, -3, -2, -1};
    CHECK(quantile(x, 0.5) == -2.0);
    CHECK(quantile(x, 0.1) == -4.0); // below 1/n: the minimum
    CHECK(quantile(x, 0.95) == -1.0);
    CHECK_THROWS_AS(quantile({}, 0.5), input_error);
    CHECK_THROWS_AS(quantile(x, 0.0), input_error);
}

TEST_CASE("quantile matches the sort oracle on random samples") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ad(0.01, 0.99);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 1 + rng() % 40;
        std::vector<double> xs(n);
        for (auto& v : xs)
            v = nd(rng);
        const double alpha = ad(rng);
        CHECK(quantile(xs, alpha) == oracle::sorted_quantile(xs, alpha));
    }
}

TEST_CASE("expected shortfall hand cases") {
    const std::vector<double> x = {-4, -3, -2, -1};
    CHECK(expected_shortfall(x, 0.5) == doctest::Approx(3.5).epsilon(1e-15));
    // constant sample: rho = -c
    CHECK(expected_shortfall({2.5, 2.5, 2.5}, 0.35) ==
          doctest::Approx(-2.5).epsilon(1e-15));
    CHECK(expected_shortfall({-1.5, -1.5}, 0.7) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("coherence properties on random samples") {
    std::mt19937_64 rng(123);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ad(0.05, 0.95);

    for (int rep = 0; rep < 400; ++rep) {
        const std::size_t n = 2 + rng() % 64;
        const double alpha = ad(rng);
        std::vector<double> x1(n), x2(n), sum(n);
        for (std::size_t i = 0; i < n; ++i) {
            x1[i] = nd(rng) + 0.3 * nd(rng);
            x2[i] = x1[i] * 0.5 + nd(rng); // correlated pair
            sum[i] = x1[i] + x2[i];
        }

        // monotonicity: X1 <= X2 pointwise => rho(X1) >= rho(X2)
        std::vector<double> lower(n);
        for (std::size_t i = 0; i < n; ++i)
            lower[i] = x2[i] - std::abs(nd(rng));
        CHECK(expected_shortfall(lower, alpha) >= expected_shortfall(x2, alpha) - 1e-12);

        // sub-additivity on the jointly sampled pair
        CHECK(expected_shortfall(sum, alpha) <=
              expected_shortfall(x1, alpha) + expected_shortfall(x2, alpha) + 1e-10);

        // positive homogeneity, exact
        const double lam = 0.1 + 3.0 * ad(rng);
        std::vector<double> scaled(n);
        for (std::size_t i = 0; i < n; ++i)
            scaled[i] = lam * x1[i];
        CHECK(expected_shortfall(scaled, alpha) ==
              doctest::Approx(lam * expected_shortfall(x1, alpha)).epsilon(1e-12));

        // translation invariance, exact
        const double a = nd(rng);
        std::vector<double> shifted(n);
        for (std::size_t i = 0; i < n; ++i)
            shifted[i] = x1[i] + a;
        CHECK(expected_shortfall(shifted, alpha) ==
              doctest::Approx(expected_shortfall(x1, alpha) - a).epsilon(1e-12));
    }
}

TEST_CASE("confidence bands") {
    SUBCASE("constant paths collapse to one line") {
        std::vector<std::vector<double>> pnl(6, std::vector<double>(4, 1.25));
        const auto b = confidence_bands(pnl, 0.35);
        for (std::size_t d = 0; d < 4; ++d) {
            CHECK(b.mean[d] == doctest::Approx(1.25).epsilon(1e-15));
            CHECK(b.upper[d] == doctest::Approx(1.25).epsilon(1e-15));
            CHECK(b.lower[d] == doctest::Approx(1.25).epsilon(1e-15));
        }
    }
    SUBCASE("symmetric sample gives symmetric bands") {
        std::vector<std::vector<double>> pnl;
        for (int k = -5; k <= 5; ++k)
            pnl.push_back({static_cast<double>(k)});
        const auto b = confidence_bands(pnl, 0.35);
        CHECK(b.mean[0] == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(b.upper[0] == doctest::Approx(-b.lower[0]).epsilon(1e-12));
    }
    SUBCASE("lower band is the negated per-date expected shortfall") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> nd(0.0, 2.0);
        std::vector<std::vector<double>> pnl(40, std::vector<double>(3));
        for (auto& row : pnl)
            for (auto& v : row)
                v = nd(rng);
        const auto b = confidence_bands(pnl, 0.35);
        for (std::size_t d = 0; d < 3; ++d) {
            std::vector<double> col;
            for (const auto& row : pnl)
                col.push_back(row[d]);
            CHECK(b.lower[d] ==
                  doctest::Approx(-expected_shortfall(col, 0.35)).epsilon(1e-12));
        }
    }
}

TEST_CASE("study summary arithmetic") {
    // short deal: model price -0.05, reference -0.08, mean P&L -0.03
    std::vector<double> pnl = {-0.05, -0.01, -0.03};
    const auto s = summarize_study("bs", -0.05, -1, -0.08, 0.001, pnl, 0.35);
    CHECK(s.model_price == doctest::Approx(0.05));
    CHECK(s.reference_price == doctest::Approx(0.08));
    CHECK(s.mean_pnl == doctest::Approx(-0.03));
    CHECK(s.expected_hedging_cost == doctest::Approx(0.03)); // positive loss
    CHECK(s.price_plus_ehc == doctest::Approx(0.08));
    CHECK(s.model_risk_es == doctest::Approx(expected_shortfall(pnl, 0.35)));
    CHECK(s.final_price == doctest::Approx(0.05 + s.model_risk_es));
}
