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

#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "mrisk/common.hpp"
#include "mrisk/simulate.hpp"

namespace mrisk {

/// Binary paying `notional` (domestic) at expiry iff the spot never touched
/// either barrier.
struct DoubleNoTouch {
    double lower = 0.0;
    double upper = 0.0;
    double expiry = 0.0;
    double notional = 1.0;
    int sign = 1; ///< +1 long, -1 short

    void validate() const {
        require(lower > 0.0 && lower < upper,
                "double_no_touch.lower_barrier: must satisfy 0 < lower < upper");
        require(expiry > 0.0, "double_no_touch.expiry: must be > 0");
        require(notional > 0.0, "double_no_touch.notional: must be > 0");
        require(sign == 1 || sign == -1, "double_no_touch.position: must be long or short");
    }
};

/// Forward contract with contingent notional: on each fading date with the
/// spot inside the fading range (and no prior knock-out), a fraction of the
/// maximum notional accrues. Pays accrued_notional * (S_T - K) at expiry
/// (call minus put at the same strike). Knock-out stops future accrual
/// only; accrued notional stays on.
struct FaderForwardLeg {
    double strike = 0.0;
    std::vector<double> fading_dates; ///< year fractions in (0, expiry]
    double lower_fade = 0.0;
    double upper_fade = std::numeric_limits<double>::infinity();
    double ko_lower = 0.0; ///< 0 = none
    double ko_upper = std::numeric_limits<double>::infinity(); ///< inf = none
    double max_notional = 1.0;
    std::vector<double> fractions; ///< accrual fraction per fading date; sums to 1
    double expiry = 0.0;
    int sign = 1;

    bool has_ko() const {
        return ko_lower > 0.0 || ko_upper < std::numeric_limits<double>::infinity();
    }

    bool knocked(double spot) const {
        return (ko_lower > 0.0 && spot <= ko_lower) || spot >= ko_upper;
    }

    bool in_fade_range(double spot) const {
        return spot > lower_fade && spot < upper_fade;
    }

    void validate() const {
        require(strike > 0.0, "fader.strike: must be > 0");
        require(expiry > 0.0, "fader.expiry: must be > 0");
        require(max_notional > 0.0, "fader.notional: must be > 0");
        require(sign == 1 || sign == -1, "fader.position: must be long or short");
        require(!fading_dates.empty(), "fader.fading_dates: must not be empty");
        require(fractions.size() == fading_dates.size(),
                "fader.fractions: must match fading dates");
        double fsum = 0.0;
        for (std::size_t i = 0; i < fading_dates.size(); ++i) {
            require(fading_dates[i] > 0.0 && fading_dates[i] <= expiry + 1e-12,
                    "fader.fading_dates: must lie in (0, expiry]");
            if (i > 0)
                require(fading_dates[i] > fading_dates[i - 1],
                        "fader.fading_dates: must increase");
            require(fractions[i] > 0.0, "fader.fractions: must be positive");
            fsum += fractions[i];
        }
        require(std::abs(fsum - 1.0) < 1e-9, "fader.fractions: must sum to 1");
        require(lower_fade >= 0.0 && lower_fade < upper_fade,
                "fader.fade_levels: must be ordered");
        if (ko_lower > 0.0)
            require(ko_lower < upper_fade, "fader.ko_lower: must sit below the fade range");
        require(ko_lower < ko_upper, "fader.ko_levels: must be ordered");
    }
};

/// European vanilla; prices under the market model, used both as a
/// portfolio member and as the rolling hedge instrument.
struct VanillaOption {
    double strike = 0.0;
    double expiry = 0.0;
    double notional = 1.0;
    int sign = 1;
    bool is_call = true;

    void validate() const {
        require(strike > 0.0, "vanilla.strike: must be > 0");
        require(expiry > 0.0, "vanilla.expiry: must be > 0");
        require(sign == 1 || sign == -1, "vanilla.position: must be long or short");
    }
};

using Product = std::variant<DoubleNoTouch, FaderForwardLeg, VanillaOption>;

struct Portfolio {
    std::vector<Product> legs;

    void validate() const {
        require(!legs.empty(), "portfolio: must not be empty");
        for (const auto& leg : legs)
            std::visit([](const auto& p) { p.validate(); }, leg);
    }

    /// Latest leg expiry.
    double horizon() const;

    /// Snap every product event date onto the simulation grid (nearest
    /// date); keeps lifecycle events aligned with observations.
    void snap_to_grid(const DateGrid& grid);
};

/// Monotone per-leg lifecycle state: barrier hits stick, accrued notional
/// never decreases, expiry happens once.
struct LifecycleState {
    bool hit = false;        ///< DNT barrier touched
    double hit_time = -1.0;
    bool ko = false;         ///< fader knock-out
    double accrued = 0.0;    ///< fader accrued notional
    std::size_t next_fade = 0;
    bool expired = false;
};

using PortfolioState = std::vector<LifecycleState>;

PortfolioState initial_state(const Portfolio& p);

/// Cash paid at expiry: notional if never hit, else zero (sign applied).
double dnt_payoff(const DoubleNoTouch& p, const LifecycleState& s);

/// Applies one fading-date observation; knock-out on the same date blocks
/// the accrual.
void fader_accrue(const FaderForwardLeg& leg, LifecycleState& s, double spot);

/// Payoff of one leg at its expiry given terminal spot.
double leg_payoff(const Product& leg, const LifecycleState& s, double spot);

/// Processes every event scheduled at grid time `t` with observation
/// `spot`: barrier monitoring, knock-outs, fading accruals and expiry
/// payoffs. Returns cash generated at this date and appends event tags.
double update_events(const Portfolio& p, PortfolioState& st, double t, double spot,
                     std::string* event_log = nullptr);

/// True when no leg can generate further value or events (all expired).
bool all_expired(const PortfolioState& st);

} // namespace mrisk
