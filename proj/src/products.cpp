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

#include "mrisk/products.hpp"

#include <algorithm>
#include <cmath>

namespace mrisk {

namespace {

constexpr double kDateEps = 1e-9;

bool same_date(double a, double b) { return std::abs(a - b) < kDateEps; }

} // namespace

double Portfolio::horizon() const {
    double h = 0.0;
    for (const auto& leg : legs)
        h = std::max(h, std::visit([](const auto& p) { return p.expiry; }, leg));
    return h;
}

void Portfolio::snap_to_grid(const DateGrid& grid) {
    auto snap = [&](double t) { return grid.t[grid.index_of(t)]; };
    for (auto& leg : legs) {
        if (auto* dnt = std::get_if<DoubleNoTouch>(&leg)) {
            dnt->expiry = snap(dnt->expiry);
        } else if (auto* fader = std::get_if<FaderForwardLeg>(&leg)) {
            fader->expiry = snap(fader->expiry);
            for (auto& fd : fader->fading_dates)
                fd = snap(fd);
        } else if (auto* van = std::get_if<VanillaOption>(&leg)) {
            van->expiry = snap(van->expiry);
        }
    }
}

PortfolioState initial_state(const Portfolio& p) {
    return PortfolioState(p.legs.size());
}

double dnt_payoff(const DoubleNoTouch& p, const LifecycleState& s) {
    return s.hit ? 0.0 : p.sign * p.notional;
}

void fader_accrue(const FaderForwardLeg& leg, LifecycleState& s, double spot) {
    if (s.next_fade >= leg.fading_dates.size())
        return;
    if (!s.ko && leg.in_fade_range(spot))
        s.accrued += leg.fractions[s.next_fade] * leg.max_notional;
    ++s.next_fade;
}

double leg_payoff(const Product& leg, const LifecycleState& s, double spot) {
    if (const auto* dnt = std::get_if<DoubleNoTouch>(&leg))
        return dnt_payoff(*dnt, s);
    if (const auto* fader = std::get_if<FaderForwardLeg>(&leg))
        return fader->sign * s.accrued * (spot - fader->strike);
    const auto& van = std::get<VanillaOption>(leg);
    const double intrinsic = van.is_call ? std::max(spot - van.strike, 0.0)
                                         : std::max(van.strike - spot, 0.0);
    return van.sign * van.notional * intrinsic;
}

double update_events(const Portfolio& p, PortfolioState& st, double t, double spot,
                     std::string* event_log) {
    double cash = 0.0;
    auto log = [&](const char* tag) {
        if (event_log) {
            if (!event_log->empty())
                *event_log += ';';
            *event_log += tag;
        }
    };

    for (std::size_t i = 0; i < p.legs.size(); ++i) {
        LifecycleState& s = st[i];
        if (s.expired)
            continue;

        if (const auto* dnt = std::get_if<DoubleNoTouch>(&p.legs[i])) {
            if (!s.hit && t > 0.0 && (spot <= dnt->lower || spot >= dnt->upper)) {
                s.hit = true;
                s.hit_time = t;
                log("barrier_hit");
            }
            if (t >= dnt->expiry - kDateEps) {
                s.expired = true;
                const double pay = dnt_payoff(*dnt, s);
                cash += pay;
                log(pay != 0.0 ? "dnt_paid" : "dnt_expired_worthless");
            }
        } else if (const auto* fader = std::get_if<FaderForwardLeg>(&p.legs[i])) {
            // knock-out observation precedes any same-date accrual
            if (fader->has_ko() && !s.ko && t > 0.0 && fader->knocked(spot)) {
                s.ko = true;
                log("fader_ko");
            }
            while (s.next_fade < fader->fading_dates.size() &&
                   fader->fading_dates[s.next_fade] <= t + kDateEps) {
                if (same_date(fader->fading_dates[s.next_fade], t)) {
                    const double before = s.accrued;
                    fader_accrue(*fader, s, spot);
                    log(s.accrued > before ? "fade_accrued" : "fade_missed");
                } else {
                    ++s.next_fade; // date fell off the grid; nothing to observe
                }
            }
            if (t >= fader->expiry - kDateEps) {
                s.expired = true;
                cash += leg_payoff(p.legs[i], s, spot);
                log("fader_expired");
            }
        } else {
            const auto& van = std::get<VanillaOption>(p.legs[i]);
            if (t >= van.expiry - kDateEps) {
                s.expired = true;
                cash += leg_payoff(p.legs[i], s, spot);
                log("vanilla_expired");
            }
        }
    }
    return cash;
}

bool all_expired(const PortfolioState& st) {
    return std::all_of(st.begin(), st.end(),
                       [](const LifecycleState& s) { return s.expired; });
}

} // namespace mrisk
