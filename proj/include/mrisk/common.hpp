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

#include <cmath>
#include <stdexcept>
#include <string>

namespace mrisk {

/// Thrown when an input violates a documented precondition.
class input_error : public std::invalid_argument {
public:
    explicit input_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Thrown when an out-of-bounds value makes a quantity undefined
/// (e.g. an option price outside its no-arbitrage interval).
class domain_error : public std::domain_error {
public:
    explicit domain_error(const std::string& msg) : std::domain_error(msg) {}
};

/// Thrown when an iterative or numerical scheme fails to converge.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown on malformed or incompatible wire messages.
class protocol_error : public std::runtime_error {
public:
    explicit protocol_error(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond)
        throw input_error(msg);
}

inline void require_finite(double x, const std::string& name) {
    if (!std::isfinite(x))
        throw input_error(name + ": value must be finite");
}

} // namespace mrisk
