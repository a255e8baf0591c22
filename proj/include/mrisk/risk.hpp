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
#include <string>
#include <vector>

#include "mrisk/common.hpp"

namespace mrisk {

/// Empirical lower quantile at significance alpha: the (floor(alpha n)+1)-th
/// order statistic, so alpha below 1/n returns the sample minimum.
double quantile(const std::vector<double>& sample, double alpha);

/// Expected shortfall of the P&L sample at significance alpha: the negated
/// mean of the worst alpha-tail with the exact fractional-atom correction
/// (losses are negative sample values; the result is positive for losses).
double expected_shortfall(const std::vector<double>& sample, double alpha);

struct BandSeries {
    std::vector<double> upper; ///< mean of the best alpha-tail per date
    std::vector<double> mean;
    std::vector<double> lower; ///< mean of the worst alpha-tail = -ES per date
};

/// Running confidence bands of the per-date P&L distribution across paths.
/// pnl is indexed [path][date].
BandSeries confidence_bands(const std::vector<std::vector<double>>& pnl, double alpha);

/// Study summary in the shape of the compared pricing/hedging table:
/// initial model price, expected hedging cost, their sum, the reference
/// price, the model-risk expected shortfall and the final (provisioned)
/// price.
struct StudySummary {
    std::string pricer;
    double model_price = 0.0;          ///< P0 (positive premium)
    double expected_hedging_cost = 0.0;///< EHC = reference minus model, realized
    double price_plus_ehc = 0.0;       ///< P0 + EHC
    double reference_price = 0.0;      ///< market-model price
    double reference_se = 0.0;
    double model_risk_es = 0.0;        ///< ES of terminal P&L
    double final_price = 0.0;          ///< P0 + ES
    double mean_pnl = 0.0;             ///< cross-path mean terminal P&L
    double pnl_se = 0.0;               ///< its standard error
    std::size_t n_paths = 0;
    double significance = 0.0;
};

/// Assembles the summary from the terminal P&L sample. `position_sign`
/// carries the deal side so the hedging cost is reported as a positive
/// loss for short positions, as in the study tables.
StudySummary summarize_study(const std::string& pricer_name, double model_price_signed,
                             int position_sign, double reference_price_signed,
                             double reference_se,
                             const std::vector<double>& terminal_pnl, double alpha);

} // namespace mrisk
