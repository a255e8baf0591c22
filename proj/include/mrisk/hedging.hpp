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

#include <string>
#include <vector>

#include "mrisk/pricers.hpp"

namespace mrisk {

/// How the hedge vanilla rolls: re-struck at the prevailing straddle ATM
/// with a fresh tenor on every rebalance date (keeps its variance
/// sensitivity bounded away from zero), or fixed at the first date's
/// contract.
enum class HedgeRoll { Restrike, Static };

struct HedgeConfig {
    double vanilla_tenor = 0.5;
    HedgeRoll roll = HedgeRoll::Restrike;
    Monitoring monitoring = Monitoring::Daily;
    bool unhedged = false; ///< keep positions at zero (variance baseline)
    double theta_floor = 1e-12;
};

/// Self-financing cash-and-positions state. Cash moves only through
/// rebalancing trades, contract cash flows and accrual; the underlying
/// position carries the foreign bank-account factor.
struct Ledger {
    double cash = 0.0;
    double bf = 1.0; ///< foreign bank-account factor since inception
    double alpha = 0.0;
    double beta = 0.0;

    /// Sells the held position and buys the new one, both valued now.
    /// hedge_old/hedge_new are the prices of the outgoing and incoming
    /// hedge vanilla contracts (they differ when the hedge rolls).
    void rebalance(double alpha_new, double beta_new, double spot, double hedge_old,
                   double hedge_new) {
        cash += alpha * spot * bf + beta * hedge_old;
        alpha = alpha_new;
        beta = beta_new;
        cash -= alpha * spot * bf + beta * hedge_new;
    }

    /// Contract cash flow (coupons, payoffs); incoming positive.
    void flow(double amount) { cash += amount; }

    /// Rolls the accounts over one period at the two curves.
    void accrue(double df_dom_step, double df_for_step) {
        cash /= df_dom_step;
        bf /= df_for_step;
    }

    double position_value(double spot, double hedge_price) const {
        return alpha * spot * bf + beta * hedge_price;
    }
};

/// One date of the self-financing ledger.
struct LedgerRow {
    double t = 0.0;
    double spot = 0.0;
    double var = 0.0;
    double delta = 0.0;    ///< portfolio delta under the model under test
    double vartheta = 0.0; ///< portfolio variance sensitivity
    double alpha = 0.0;    ///< units of underlying security S * B^f
    double beta = 0.0;     ///< units of the hedge vanilla
    double cash = 0.0;     ///< domestic cash account after trading
    double pi = 0.0;       ///< option-portfolio value (model under test)
    double pi_tot = 0.0;   ///< running total: pi + cash + hedge position
    std::string events;
};

struct HedgeResult {
    std::vector<LedgerRow> rows;
    bool error = false;
    std::string error_message;

    double terminal_pi_tot() const { return rows.back().pi_tot; }
};

/// Replays the discrete hedging strategy along one market path: daily
/// external sensitivities, hedge ratios cancelling the two market factors,
/// a self-financing cash ledger and full lifecycle handling. The cash
/// account accrues at the domestic curve, the underlying position carries
/// the foreign bank-account factor.
///
/// The portfolio value and its sensitivities come from the model under
/// test; the hedge vanilla is always valued with the market model. A path
/// whose pricing fails is returned flagged, never silently dropped.
HedgeResult run_hedge_path(const MarketModel& market, const SurfaceSpec& surface_spec,
                           const Portfolio& pf, const ModelPricer& pricer,
                           const DateGrid& grid, const PathGrid& path,
                           const HedgeConfig& cfg, std::uint64_t study_seed);

} // namespace mrisk
