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

#include "mrisk/risk.hpp"

#include <algorithm>
#include <cmath>

namespace mrisk {

namespace {

void check_sample(const std::vector<double>& sample, double alpha) {
    require(!sample.empty(), "risk measure: sample must not be empty");
    require(alpha > 0.0 && alpha < 1.0, "risk measure: alpha must lie in (0,1)");
}

} // namespace

double quantile(const std::vector<double>& sample, double alpha) {
    check_sample(sample, alpha);
    std::vector<double> xs(sample);
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    std::size_t k =
        static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n))) + 1;
    if (k > n)
        k = n;
    return xs[k - 1];
}

double expected_shortfall(const std::vector<double>& sample, double alpha) {
    check_sample(sample, alpha);
    const double xa = quantile(sample, alpha);
    const double n = static_cast<double>(sample.size());
    double tail_sum = 0.0;
    double count_le = 0.0;
    for (double x : sample) {
        if (x <= xa) {
            tail_sum += x;
            count_le += 1.0;
        }
    }
    const double p_le = count_le / n;
    return -tail_sum / (alpha * n) - (xa / alpha) * (alpha - p_le);
}

BandSeries confidence_bands(const std::vector<std::vector<double>>& pnl, double alpha) {
    require(!pnl.empty(), "confidence_bands: no paths");
    const std::size_t n_dates = pnl.front().size();
    for (const auto& row : pnl)
        require(row.size() == n_dates, "confidence_bands: ragged P&L matrix");

    BandSeries out;
    out.upper.resize(n_dates);
    out.mean.resize(n_dates);
    out.lower.resize(n_dates);
    std::vector<double> column(pnl.size()), negated(pnl.size());
    for (std::size_t d = 0; d < n_dates; ++d) {
        double s = 0.0;
        for (std::size_t p = 0; p < pnl.size(); ++p) {
            column[p] = pnl[p][d];
            negated[p] = -pnl[p][d];
            s += column[p];
        }
        out.mean[d] = s / static_cast<double>(pnl.size());
        out.lower[d] = -expected_shortfall(column, alpha);
        out.upper[d] = expected_shortfall(negated, alpha);
    }
    return out;
}

StudySummary summarize_study(const std::string& pricer_name, double model_price_signed,
                             int position_sign, double reference_price_signed,
                             double reference_se,
                             const std::vector<double>& terminal_pnl, double alpha) {
    require(position_sign == 1 || position_sign == -1,
            "summarize_study: position sign must be +-1");
    StudySummary s;
    s.pricer = pricer_name;
    s.n_paths = terminal_pnl.size();
    s.significance = alpha;

    double sum = 0.0, sum2 = 0.0;
    for (double x : terminal_pnl) {
        sum += x;
        sum2 += x * x;
    }
    const double n = static_cast<double>(terminal_pnl.size());
    s.mean_pnl = sum / n;
    const double var = std::max(sum2 / n - s.mean_pnl * s.mean_pnl, 0.0);
    s.pnl_se = std::sqrt(var / n);

    s.model_price = std::abs(model_price_signed);
    s.reference_price = std::abs(reference_price_signed);
    s.reference_se = reference_se;
    // mean terminal P&L = sign * (reference - model); the table reports the
    // cost of hedging a mispriced deal as a positive number
    s.expected_hedging_cost = position_sign * s.mean_pnl;
    s.price_plus_ehc = s.model_price + s.expected_hedging_cost;
    s.model_risk_es = expected_shortfall(terminal_pnl, alpha);
    s.final_price = s.model_price + s.model_risk_es;
    return s;
}

} // namespace mrisk
