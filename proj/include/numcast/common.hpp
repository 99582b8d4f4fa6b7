#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "numcast/errors.hpp"

namespace numcast {

inline constexpr const char* kVersion = "0.1.0";

namespace detail {

inline std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::string_view rtrim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto e = s.find_last_not_of(ws);
    if (e == std::string_view::npos) return {};
    return s.substr(0, e + 1);
}

inline std::vector<std::string> split(std::string_view text, std::string_view sep) {
    std::vector<std::string> out;
    if (sep.empty()) {
        out.emplace_back(text);
        return out;
    }
    std::size_t pos = 0;
    while (true) {
        auto next = text.find(sep, pos);
        if (next == std::string_view::npos) {
            out.emplace_back(text.substr(pos));
            break;
        }
        out.emplace_back(text.substr(pos, next - pos));
        pos = next + sep.size();
    }
    return out;
}

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    if (from.empty()) return s;
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

} // namespace detail

// Quantile by linear interpolation between closest order statistics, the one
// rule used everywhere a percentile appears (scaler fit, forecast quantiles).
// q in [0,1]; data need not be sorted.
inline double quantile_linear(std::vector<double> data, double q) {
    if (data.empty()) throw empty_series_error("quantile of empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw invalid_input("quantile level outside [0,1]");
    std::sort(data.begin(), data.end());
    if (data.size() == 1) return data[0];
    double h = q * static_cast<double>(data.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= data.size()) return data.back();
    double frac = h - static_cast<double>(lo);
    return data[lo] + frac * (data[lo + 1] - data[lo]);
}

// log(1 - e^x) for x < 0, stable near both ends.
inline double log1mexp(double x) {
    if (std::isinf(x) && x < 0) return 0.0;
    if (!(x < 0.0)) throw invalid_input("log1mexp requires a negative argument");
    if (x < -std::log(2.0)) return std::log1p(-std::exp(x));
    return std::log(-std::expm1(x));
}

inline double logsumexp(const std::vector<double>& xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    if (std::isinf(m) && m < 0) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

} // namespace numcast
