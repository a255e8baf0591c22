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

#include "mrisk/heston_cf.hpp"

#include <cmath>
#include <string>

#include "mrisk/math/gauss_legendre.hpp"

namespace mrisk {

namespace {

constexpr double kProbTol = 1e-9;
constexpr std::size_t kStartNodes = 128;
constexpr std::size_t kMaxNodes = 8192;

// exp(C_j + D_j v) of the log-characteristic function, j = 1,2, evaluated
// with the stable branch choice; small vol-of-variance falls back to the
// asymptotic expansion to avoid 0/0.
std::complex<double> cf_factor(const HestonParams& p, double T, double phi, int j) {
    using cd = std::complex<double>;
    const cd i(0.0, 1.0);
    const double eta2 = p.eta * p.eta;
    const double a = p.kappa * p.theta;
    const double uj = (j == 1) ? 0.5 : -0.5;
    const double bj = (j == 1) ? p.kappa - p.rho * p.eta : p.kappa;
    const cd beta = cd(bj, 0.0) - i * (p.rho * p.eta * phi);
    const cd quad = cd(phi * phi, 0.0) - i * (2.0 * uj * phi);
    const cd d = std::sqrt(beta * beta + eta2 * quad);
    const cd ex = std::exp(-d * T);

    if (p.eta > 1e-5) {
        const cd g = (beta - d) / (beta + d);
        const cd G = (1.0 - g * ex) / (1.0 - g);
        const cd D = (beta - d) * (1.0 - ex) / (eta2 * (1.0 - g * ex));
        const cd C = (a / eta2) * ((beta - d) * T - 2.0 * std::log(G));
        return std::exp(C + D * p.v0);
    }
    // eta -> 0: deterministic-variance limit, expanded to avoid cancellation
    const cd tdv = (i * (2.0 * uj * phi) - cd(phi * phi, 0.0)) / (2.0 * beta);
    const cd pp = tdv * eta2 / (beta + d);
    const cd D = tdv * (1.0 - ex) / (1.0 - pp * ex);
    const cd C = a * (tdv * T - 2.0 * tdv * (1.0 - ex) / (beta + d));
    return std::exp(C + D * p.v0);
}

} // namespace

HestonTermCache::HestonTermCache(const HestonParams& p, double expiry)
    : p_(p), expiry_(expiry) {
    p_.validate();
    require(expiry > 0.0, "heston: expiry must be > 0");
    const double w = expected_variance_integral(p_, expiry) +
                     p_.eta * p_.eta * expiry * 1e-4;
    if (w < 1e-14) {
        degenerate_ = true;
        return;
    }
    scale_ = std::max(4.0, 3.0 / std::sqrt(w));
    build(kStartNodes);
}

void HestonTermCache::evaluate(const std::vector<double>& phi,
                               std::vector<std::complex<double>>& a1,
                               std::vector<std::complex<double>>& a2) const {
    const std::size_t n = phi.size();
    a1.resize(n);
    a2.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::complex<double> inv_iphi(0.0, -1.0 / phi[k]);
        a1[k] = cf_factor(p_, expiry_, phi[k], 1) * inv_iphi;
        a2[k] = cf_factor(p_, expiry_, phi[k], 2) * inv_iphi;
    }
}

void HestonTermCache::build(std::size_t n) {
    auto fill = [&](std::size_t order, std::vector<double>& phi, std::vector<double>& w) {
        const GlRule& rule = gauss_legendre(order);
        phi.resize(order);
        w.resize(order);
        for (std::size_t k = 0; k < order; ++k) {
            const double u = 0.5 * (rule.x[k] + 1.0); // map [-1,1] -> (0,1)
            const double om = 1.0 - u;
            phi[k] = scale_ * u / om;
            w[k] = 0.5 * rule.w[k] * scale_ / (om * om) / M_PI;
        }
    };

    // the doubling check must also resolve the strike oscillation, so it
    // sweeps a band of log-moneyness values rather than the forward alone
    static constexpr double kProbe[] = {0.0, 0.1, -0.1, 0.3, -0.3};
    for (std::size_t order = n; order <= kMaxNodes; order *= 2) {
        fill(order / 2, phi_coarse_, w_coarse_);
        fill(order, phi_fine_, w_fine_);
        evaluate(phi_coarse_, a1_coarse_, a2_coarse_);
        evaluate(phi_fine_, a1_fine_, a2_fine_);
        double worst = 0.0;
        for (double m : kProbe) {
            double c1 = 0.0, c2 = 0.0, f1 = 0.0, f2 = 0.0;
            for (std::size_t k = 0; k < phi_coarse_.size(); ++k) {
                const std::complex<double> e(std::cos(phi_coarse_[k] * m),
                                             std::sin(phi_coarse_[k] * m));
                c1 += w_coarse_[k] * (e * a1_coarse_[k]).real();
                c2 += w_coarse_[k] * (e * a2_coarse_[k]).real();
            }
            for (std::size_t k = 0; k < phi_fine_.size(); ++k) {
                const std::complex<double> e(std::cos(phi_fine_[k] * m),
                                             std::sin(phi_fine_[k] * m));
                f1 += w_fine_[k] * (e * a1_fine_[k]).real();
                f2 += w_fine_[k] * (e * a2_fine_[k]).real();
            }
            worst = std::max({worst, std::abs(f1 - c1), std::abs(f2 - c2)});
        }
        if (worst < kProbTol)
            return;
    }
    throw numeric_error("heston quadrature failed to converge at " +
                        std::to_string(kMaxNodes) + " nodes (T=" + std::to_string(expiry_) +
                        ", v=" + std::to_string(p_.v0) + ", eta=" + std::to_string(p_.eta) + ")");
}

void HestonTermCache::probabilities(double m, double& p1, double& p2) const {
    if (degenerate_) {
        p1 = p2 = (m > 0.0) ? 1.0 : (m < 0.0 ? 0.0 : 0.5);
        return;
    }
    double f1 = 0.0, f2 = 0.0, c1 = 0.0, c2 = 0.0;
    for (std::size_t k = 0; k < phi_fine_.size(); ++k) {
        const std::complex<double> e(std::cos(phi_fine_[k] * m), std::sin(phi_fine_[k] * m));
        f1 += w_fine_[k] * (e * a1_fine_[k]).real();
        f2 += w_fine_[k] * (e * a2_fine_[k]).real();
    }
    for (std::size_t k = 0; k < phi_coarse_.size(); ++k) {
        const std::complex<double> e(std::cos(phi_coarse_[k] * m), std::sin(phi_coarse_[k] * m));
        c1 += w_coarse_[k] * (e * a1_coarse_[k]).real();
        c2 += w_coarse_[k] * (e * a2_coarse_[k]).real();
    }
    if (std::abs(f1 - c1) > 1e-7 || std::abs(f2 - c2) > 1e-7)
        throw numeric_error("heston quadrature disagreement at log-moneyness " +
                            std::to_string(m) + " (T=" + std::to_string(expiry_) + ")");
    p1 = 0.5 + f1;
    p2 = 0.5 + f2;
}

double HestonTermCache::call(double fwd, double strike, double df_dom) const {
    require(fwd > 0.0 && strike > 0.0, "heston call: fwd and strike must be > 0");
    double p1, p2;
    probabilities(std::log(fwd / strike), p1, p2);
    return std::max(df_dom * (fwd * p1 - strike * p2), 0.0);
}

double heston_vanilla_price(const HestonParams& p, double strike, double expiry,
                            const RateCurve& dom, const RateCurve& for_, bool is_call) {
    require(strike > 0.0, "heston: strike must be > 0");
    HestonTermCache cache(p, expiry);
    const double df_d = dom.discount(0.0, expiry);
    const double df_f = for_.discount(0.0, expiry);
    const double fwd = p.s0 * df_f / df_d;
    const double c = cache.call(fwd, strike, df_d);
    if (is_call)
        return c;
    return std::max(c - df_d * (fwd - strike), 0.0);
}

double heston_vanilla_from_cache(const HestonTermCache& cache, const MarketModel& m,
                                 double t, double spot, double strike, double expiry_abs,
                                 bool is_call) {
    require(strike > 0.0, "heston: strike must be > 0");
    const double tau = expiry_abs - t;
    if (tau <= 1e-12)
        return is_call ? std::max(spot - strike, 0.0) : std::max(strike - spot, 0.0);
    const double dfd = m.domestic.discount(t, expiry_abs);
    const double dff = m.foreign.discount(t, expiry_abs);
    const double fwd = spot * dff / dfd;
    const double c = cache.call(fwd, strike, dfd);
    if (is_call)
        return c;
    return std::max(c - dfd * (fwd - strike), 0.0);
}

} // namespace mrisk
