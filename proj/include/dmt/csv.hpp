// SPDX-License-Identifier: Apache-2.0
//
// Locale-independent number formatting for CSV output.

#pragma once

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dmt::csv {

/// Shortest decimal that round-trips.
inline std::string number(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    if (res.ec != std::errc{})
        throw std::runtime_error("number formatting failed");
    return std::string(buf, res.ptr);
}

/// Fixed-point with the given number of decimals.
inline std::string fixed(double x, int decimals)
{
    if (x == 0.0)
        x = 0.0; // drop negative zero
    char buf[128];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, decimals);
    if (res.ec != std::errc{})
        throw std::runtime_error("number formatting failed");
    std::string s(buf, res.ptr);
    // "-0.00" after rounding a tiny negative value.
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos)
        s.erase(0, 1);
    return s;
}

/// Decimals needed to print a grid step such as 0.01 or 0.125 exactly.
inline int decimals_for_step(double step)
{
    for (int d = 0; d <= 12; ++d) {
        const double scaled = step * std::pow(10.0, d);
        if (std::abs(scaled - std::round(scaled)) < 1e-9 * std::max(1.0, scaled))
            return d;
    }
    return 12;
}

} // namespace dmt::csv
