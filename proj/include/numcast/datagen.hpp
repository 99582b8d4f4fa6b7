#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>

#include "numcast/errors.hpp"
#include "numcast/series.hpp"

namespace numcast {

/**
 * Synthetic series over t = linspace(-1, 1, n_points) plus one shared jitter
 * draw, with optional additive Gaussian noise. Non-finite values (e.g. log at
 * t <= -1) are recorded as missing.
 */
struct SyntheticSpec {
    std::string name = "linear";
    int n_points = 200;
    double t_jitter_sd = 0.1;
    double noise_sd = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_points < 2) throw invalid_config("synthetic series needs n_points >= 2");
        if (noise_sd < 0.0) throw invalid_config("noise_sd must be >= 0");
        if (t_jitter_sd < 0.0) throw invalid_config("t_jitter_sd must be >= 0");
    }
};

namespace detail {

inline const std::map<std::string, std::function<double(double)>>& synthetic_functions() {
    static const std::map<std::string, std::function<double(double)>> fns{
        {"gaussian_wave",
         [](double t) { return std::exp(-5.0 * (t - 0.6) * (t - 0.6)) *
                               std::sin(20.0 * (t - 6.0)); }},
        {"exp", [](double t) { return std::exp(2.0 * t); }},
        {"linear_cos",
         [](double t) { return 0.3 + 0.5 * t + 0.2 * std::cos(25.0 * t + 3.0); }},
        {"linear", [](double t) { return 0.3 + 0.5 * t; }},
        {"sine", [](double t) { return std::sin(40.0 * t + 3.0); }},
        {"sinc", [](double t) { return std::sin(10.0 * t) / t / 10.0; }},
        {"beat", [](double t) { return std::sin(3.0 * t) * std::sin(25.0 * t); }},
        {"sigmoid", [](double t) { return 1.0 / (1.0 + std::exp(-4.0 * t)); }},
        {"log", [](double t) { return std::log(1.0 + t); }},
        {"x_times_sine",
         [](double t) { return 4.0 * (t + 1.0) * std::sin(10.0 * (t + 1.0) + 4.0); }},
        {"square", [](double t) { return 3.0 * (t - 0.6) * (t - 0.6); }},
        // f(x) = x + cos(x); the composition-of-patterns example.
        {"composite_linear_plus_cosine", [](double t) { return t + std::cos(t); }},
    };
    return fns;
}

} // namespace detail

inline std::vector<std::string> synthetic_names() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : detail::synthetic_functions()) names.push_back(name);
    return names;
}

inline TimeSeries generate(const SyntheticSpec& spec) {
    spec.validate();
    auto it = detail::synthetic_functions().find(spec.name);
    if (it == detail::synthetic_functions().end())
        throw invalid_input("unknown synthetic function: " + spec.name);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double jitter = spec.t_jitter_sd > 0.0 ? spec.t_jitter_sd * gauss(rng) : 0.0;

    std::vector<double> values(static_cast<std::size_t>(spec.n_points));
    for (int i = 0; i < spec.n_points; ++i) {
        double t = -1.0 + 2.0 * static_cast<double>(i) /
                              static_cast<double>(spec.n_points - 1) + jitter;
        double v = it->second(t);
        if (spec.noise_sd > 0.0) v += spec.noise_sd * gauss(rng);
        values[static_cast<std::size_t>(i)] = v;
    }
    return TimeSeries::from_values(values);
}

// Mask interior points independently with probability p; the endpoints stay
// observed so linear interpolation is always well defined.
inline TimeSeries corrupt_missing(const TimeSeries& ts, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p < 1.0)) throw invalid_input("missing probability must be in [0,1)");
    ts.validate();
    TimeSeries out = ts;
    if (out.size() <= 2 || p == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution drop(p);
    for (std::size_t i = 1; i + 1 < out.size(); ++i) {
        if (drop(rng)) {
            out.missing[i] = true;
            out.values[i] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

// Replace missing entries by linear interpolation between the nearest
// observed neighbors and clear the mask.
inline TimeSeries interpolate_linear(const TimeSeries& ts) {
    ts.validate();
    if (ts.empty()) return ts;
    if (ts.missing.front() || ts.missing.back())
        throw invalid_input("interpolation requires observed endpoints");
    TimeSeries out = ts;
    std::size_t prev = 0;
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out.missing[i]) continue;
        if (i > prev + 1) {
            double lo = out.values[prev], hi = out.values[i];
            for (std::size_t j = prev + 1; j < i; ++j) {
                double frac = static_cast<double>(j - prev) / static_cast<double>(i - prev);
                out.values[j] = lo + frac * (hi - lo);
                out.missing[j] = false;
            }
        }
        prev = i;
    }
    return out;
}

} // namespace numcast
