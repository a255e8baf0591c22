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

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "mrisk/products.hpp"
#include "mrisk/surface.hpp"

namespace mrisk {

/// Barrier/knock-out monitoring convention; governs both the lifecycle of
/// hedged paths and the reference Monte Carlo so that the two stay
/// consistent.
enum class Monitoring { Daily, BrownianBridge };

/// Finite-difference bump sizes for the two external sensitivities: the
/// spot bump is relative (central), the variance bump absolute (forward).
struct GreekBumps {
    double ds_rel = 1e-4;
    double dv = 1e-6; // (10^-3)^2
};

/// Everything a pricer may read at a valuation date. The surfaces are
/// delta-quoted, so spot bumps reuse `surface` unchanged while variance
/// bumps switch to `surface_bumped` (rebuilt at var + dv).
struct MarketSnapshot {
    double t = 0.0;
    double spot = 0.0;
    double var = 0.0;
    const VolSurface* surface = nullptr;
    const VolSurface* surface_bumped = nullptr;
    const MarketModel* market = nullptr;
    const DateGrid* grid = nullptr;
    std::size_t date_index = 0;

    double remaining(double expiry) const { return expiry - t; }
};

struct PriceGreeks {
    double value = 0.0;
    double delta = 0.0;    ///< dP/dS, surface held fixed in delta space
    double vartheta = 0.0; ///< dP/dv, surface rebuilt at the bumped variance
};

/// A pluggable valuation model. Prices are deterministic functions of the
/// snapshot; Monte Carlo implementations derive their seeds from it.
class ModelPricer {
public:
    virtual ~ModelPricer() = default;
    virtual std::string name() const = 0;
    virtual double price(const Portfolio& pf, const PortfolioState& st,
                         const MarketSnapshot& snap) const = 0;
    /// False for pricers that work straight off the market factors; lets
    /// the engine skip smile reconstruction.
    virtual bool uses_surface() const { return true; }

    /// External sensitivities by bump-and-reprice; Monte Carlo pricers
    /// override this with a fused common-random-numbers pass.
    virtual PriceGreeks greeks(const Portfolio& pf, const PortfolioState& st,
                               const MarketSnapshot& snap) const;

    GreekBumps bumps;
};

// ---------------------------------------------------------------------------
// Black-Scholes model: constant vol per product, read from the surface at
// the product's (remaining) expiry.

struct BsMcConfig {
    std::size_t paths = 50000;
    std::uint64_t seed = 9001;
};

class BsPricer : public ModelPricer {
public:
    enum class FaderEngine { Analytic, MonteCarlo };

    explicit BsPricer(FaderEngine fe = FaderEngine::MonteCarlo, BsMcConfig mc = {},
                      Monitoring mon = Monitoring::Daily)
        : fader_engine_(fe), mc_(mc), monitoring_(mon) {}

    std::string name() const override { return "bs"; }
    double price(const Portfolio&, const PortfolioState&,
                 const MarketSnapshot&) const override;

    /// Price with every product vol shifted in parallel by dvol; the
    /// smile-correction wrapper builds its vega/vanna/volga from this.
    double price_shifted(const Portfolio&, const PortfolioState&, const MarketSnapshot&,
                         double dvol) const;

private:
    double leg_price(const Product&, const LifecycleState&, const MarketSnapshot&,
                     double dvol) const;

    FaderEngine fader_engine_;
    BsMcConfig mc_;
    Monitoring monitoring_;
};

/// Closed-form remaining value of a fader forward under a lognormal model
/// with constant vol and the curves' average rates; knock-out treated as
/// continuously monitored. Supports at most one knock-out barrier.
double bs_fader_value(const FaderForwardLeg& leg, const LifecycleState& st, double t,
                      double spot, double vol, const RateCurve& dom, const RateCurve& fr);

// ---------------------------------------------------------------------------
// Vanna-volga wrapper: Black-Scholes price plus the weighted market-minus-
// Black-Scholes cost of three pivot vanillas.

struct VvGreeks {
    double vega = 0.0;
    double vanna = 0.0;
    double volga = 0.0;
};

/// Weights matching the product's (vega, vanna, volga) with the pivots'.
/// Throws numeric_error when the pivot system is ill-conditioned.
std::array<double, 3> vv_weights(const VvGreeks& product,
                                 const std::array<VvGreeks, 3>& pivots);

class VvPricer : public ModelPricer {
public:
    /// attenuation in [0,1] scales the smile correction (1 = full).
    VvPricer(std::shared_ptr<const BsPricer> base, double attenuation = 1.0,
             double pivot_delta = 0.25)
        : base_(std::move(base)), attenuation_(attenuation), pivot_delta_(pivot_delta) {
        require(attenuation_ >= 0.0 && attenuation_ <= 1.0,
                "vv.attenuation: must lie in [0,1]");
        require(pivot_delta_ > 0.0 && pivot_delta_ < 0.5,
                "vv.pivot_delta: must lie in (0, 0.5)");
    }

    std::string name() const override { return "vv"; }
    double price(const Portfolio&, const PortfolioState&,
                 const MarketSnapshot&) const override;

private:
    std::shared_ptr<const BsPricer> base_;
    double attenuation_;
    double pivot_delta_;
};

// ---------------------------------------------------------------------------
// Reference-model Monte Carlo with Brownian-bridge barrier correction.

struct HestonMcConfig {
    std::size_t paths = 120000;
    std::uint64_t seed = 777;
    Monitoring monitoring = Monitoring::BrownianBridge;
    /// lognormal control variate on barrier survival (variance reduction;
    /// the control's expectation is the analytic continuously-monitored
    /// binary, so the estimator stays unbiased)
    bool control_variate = false;
};

struct McPrice {
    double value = 0.0;
    double se = 0.0;
};

/// Standalone portfolio price under the market model by path simulation
/// from the given snapshot state, with standard error.
McPrice heston_mc_price(const Portfolio&, const PortfolioState&, const MarketModel&,
                        const DateGrid& grid, std::size_t date_index, double spot,
                        double var, const HestonMcConfig&);

class HestonMcPricer : public ModelPricer {
public:
    explicit HestonMcPricer(HestonMcConfig cfg) : cfg_(cfg) {
        require(cfg_.paths >= 1000, "heston_mc.paths: must be >= 1000");
    }

    std::string name() const override { return "heston_mc"; }
    bool uses_surface() const override { return false; }
    double price(const Portfolio&, const PortfolioState&,
                 const MarketSnapshot&) const override;
    /// Fused pass: base, two spot bumps and the variance bump share one
    /// set of increments (common random numbers).
    PriceGreeks greeks(const Portfolio&, const PortfolioState&,
                       const MarketSnapshot&) const override;

    const HestonMcConfig& config() const { return cfg_; }

private:
    HestonMcConfig cfg_;
};

// ---------------------------------------------------------------------------

/// Sensitivity to the initial variance assembled from per-bucket surface
/// vegas and the buckets' variance sensitivities (chain rule); provided as
/// an alternative mode for judging the quality of model-reported vegas.
double model_vega_theta(const ModelPricer& pricer, const Portfolio& pf,
                        const PortfolioState& st, const MarketSnapshot& snap,
                        double dsigma = 1e-4);

} // namespace mrisk
