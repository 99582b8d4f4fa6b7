#pragma once

#include <algorithm>
#include <cmath>

#include "numcast/common.hpp"
#include "numcast/errors.hpp"
#include "numcast/series.hpp"

namespace numcast {

/**
 * Percentile-based affine rescaling applied before encoding. The fitted map
 * is z -> (z - offset_b) / scale_a, chosen so the alpha-percentile of the
 * transformed values is 1; the offset shifts the series by beta times its
 * range so the model sees mostly positive values with a spread of digit
 * counts. The basic variant only divides by the alpha-percentile of the
 * absolute values.
 */
struct ScalerConfig {
    double alpha = 0.99;   // percentile mapped to 1, in (0, 1]
    double beta = 0.3;     // offset as a fraction of the range, >= 0
    bool basic = false;    // scale-only variant

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw invalid_config("scaler alpha must be in (0, 1]");
        if (!(beta >= 0.0))
            throw invalid_config("scaler beta must be >= 0");
    }
};

// Lower floor on the fitted scale so the transform never divides by ~0
// (degenerate constant or all-tiny series).
inline constexpr double kEpsilonScale = 0.01;

struct ScalerParams {
    double offset_b = 0.0;
    double scale_a = 1.0;
    ScalerConfig config;

    static ScalerParams identity() { return ScalerParams{}; }
};

inline ScalerParams fit_scaler(const TimeSeries& ts, const ScalerConfig& cfg) {
    cfg.validate();
    ts.validate();
    auto present = ts.present_values();
    if (present.empty())
        throw empty_series_error("cannot fit a scaler: all values are missing");

    ScalerParams params;
    params.config = cfg;
    if (cfg.basic) {
        std::vector<double> magnitudes(present.size());
        std::transform(present.begin(), present.end(), magnitudes.begin(),
                       [](double v) { return std::fabs(v); });
        params.offset_b = 0.0;
        params.scale_a = std::max(quantile_linear(std::move(magnitudes), cfg.alpha),
                                  kEpsilonScale);
    } else {
        auto [mn, mx] = std::minmax_element(present.begin(), present.end());
        params.offset_b = *mn - cfg.beta * (*mx - *mn);
        std::vector<double> shifted(present.size());
        std::transform(present.begin(), present.end(), shifted.begin(),
                       [b = params.offset_b](double v) { return v - b; });
        params.scale_a = std::max(quantile_linear(std::move(shifted), cfg.alpha),
                                  kEpsilonScale);
    }
    return params;
}

// Elementwise affine map; missing entries pass through untouched.
inline TimeSeries transform(const TimeSeries& ts, const ScalerParams& p) {
    TimeSeries out = ts;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!out.missing[i]) out.values[i] = (out.values[i] - p.offset_b) / p.scale_a;
    return out;
}

inline TimeSeries inverse_transform(const TimeSeries& ts, const ScalerParams& p) {
    TimeSeries out = ts;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!out.missing[i]) out.values[i] = out.values[i] * p.scale_a + p.offset_b;
    return out;
}

inline double inverse_transform_value(double v, const ScalerParams& p) {
    return v * p.scale_a + p.offset_b;
}

} // namespace numcast
