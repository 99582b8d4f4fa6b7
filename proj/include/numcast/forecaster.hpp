#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "numcast/backend.hpp"
#include "numcast/codec.hpp"
#include "numcast/common.hpp"
#include "numcast/digit_density.hpp"
#include "numcast/errors.hpp"
#include "numcast/metrics.hpp"
#include "numcast/scaler.hpp"
#include "numcast/series.hpp"

namespace numcast {

/**
 * Full pipeline configuration: rescale, encode, truncate, sample, decode,
 * invert. `pinned_scaler` bypasses fitting with explicit parameters, which is
 * how a run manifest makes forecasts exactly reproducible.
 */
struct ForecastConfig {
    ScalerConfig scaler;
    EncodingConfig encoding;
    SamplingParams sampling;
    int horizon = 1;
    std::optional<int> max_history;          // cap on history observations
    int context_token_budget = 4096;
    std::vector<double> quantile_levels = {0.1, 0.5, 0.9};
    int min_valid = 0;                       // 0 = max(2, n_samples / 2)
    int topup_rounds = 3;                    // retries for invalid samples
    std::optional<ScalerParams> pinned_scaler;

    void validate() const {
        scaler.validate();
        encoding.validate();
        if (horizon < 1) throw invalid_config("horizon must be >= 1");
        if (context_token_budget < 1)
            throw invalid_config("context_token_budget must be >= 1");
        if (max_history && *max_history < 1)
            throw invalid_config("max_history must be >= 1");
        if (topup_rounds < 0) throw invalid_config("topup_rounds must be >= 0");
        for (double q : quantile_levels)
            if (!(q >= 0.0 && q <= 1.0))
                throw invalid_config("quantile levels must lie in [0,1]");
    }

    int effective_min_valid() const {
        if (min_valid > 0) return min_valid;
        return std::max(2, sampling.n_samples / 2);
    }
};

struct Forecast {
    std::vector<std::vector<double>> samples;    // [valid][horizon], original units
    std::vector<double> quantile_levels;
    std::vector<std::vector<double>> quantiles;  // [level][horizon]
    std::vector<double> point;                   // pointwise median
    std::size_t valid_sample_count = 0;
    std::optional<double> nll_per_dim;
    ScalerParams scaler;
    std::string prompt;                          // encoded prompt actually sent
    std::size_t history_used = 0;                // observations kept after truncation
};

namespace detail {

inline std::size_t estimate_tokens(std::size_t chars, double chars_per_token) {
    if (chars_per_token <= 0.0) chars_per_token = 1.0;
    return static_cast<std::size_t>(
        std::ceil(static_cast<double>(chars) / chars_per_token));
}

// Most recent observations whose encoded prompt fits the token budget and the
// optional history cap. Always keeps at least one observation.
inline std::size_t truncated_history_len(const TimeSeries& scaled,
                                         const ForecastConfig& cfg,
                                         double chars_per_token) {
    std::size_t keep = scaled.size();
    if (cfg.max_history)
        keep = std::min(keep, static_cast<std::size_t>(*cfg.max_history));
    while (keep > 1) {
        auto prompt = encode_series(scaled.slice(scaled.size() - keep, scaled.size()),
                                    cfg.encoding);
        if (estimate_tokens(prompt.size(), chars_per_token) <=
            static_cast<std::size_t>(cfg.context_token_budget))
            break;
        --keep;
    }
    return keep;
}

inline SamplingParams derive_sampling(const ForecastConfig& cfg,
                                      const std::string& prompt,
                                      std::size_t history_len,
                                      double chars_per_token) {
    SamplingParams params = cfg.sampling;
    if (params.max_new_tokens == 0) {
        double per_value = history_len
                               ? static_cast<double>(prompt.size() + 1) /
                                     static_cast<double>(history_len)
                               : 8.0;
        double tokens = static_cast<double>(cfg.horizon) * per_value / chars_per_token;
        params.max_new_tokens = static_cast<int>(std::ceil(tokens * 1.3)) + 1;
    }
    return params;
}

} // namespace detail

/**
 * LLMTime-style forecast: fit the scaler on the history, encode, truncate to
 * the context budget, draw completions, decode each into at least `horizon`
 * steps (topping up invalid samples), invert the scaling, and aggregate
 * sample quantiles by linear interpolation over order statistics.
 */
inline Forecast forecast(const TimeSeries& ts, Backend& backend,
                         const ForecastConfig& cfg) {
    cfg.validate();
    ts.validate();
    if (ts.empty()) throw empty_series_error("cannot forecast an empty series");
    if (ts.present_count() == 0)
        throw empty_series_error("cannot forecast an all-missing series");

    Forecast out;
    out.scaler = cfg.pinned_scaler ? *cfg.pinned_scaler : fit_scaler(ts, cfg.scaler);
    TimeSeries scaled = transform(ts, out.scaler);

    double cpt = backend.chars_per_token();
    out.history_used = detail::truncated_history_len(scaled, cfg, cpt);
    TimeSeries kept = scaled.slice(scaled.size() - out.history_used, scaled.size());
    out.prompt = encode_series(kept, cfg.encoding);

    SamplingParams params = detail::derive_sampling(cfg, out.prompt, out.history_used, cpt);
    params.validate();

    const auto horizon = static_cast<std::size_t>(cfg.horizon);
    std::vector<std::vector<double>> valid;
    int wanted = params.n_samples;
    for (int round = 0; round <= cfg.topup_rounds; ++round) {
        int missing = wanted - static_cast<int>(valid.size());
        if (missing <= 0) break;
        SamplingParams batch = params;
        batch.n_samples = missing;
        for (const auto& completion : backend.complete(out.prompt, batch)) {
            auto decoded = decode_series(completion.text, cfg.encoding);
            if (decoded.valid_steps < horizon) continue;
            bool has_missing = false;
            for (std::size_t t = 0; t < horizon; ++t)
                if (decoded.series.missing[t]) has_missing = true;
            if (has_missing) continue;
            std::vector<double> row(horizon);
            for (std::size_t t = 0; t < horizon; ++t)
                row[t] = inverse_transform_value(decoded.series.values[t], out.scaler);
            valid.push_back(std::move(row));
            if (static_cast<int>(valid.size()) >= wanted) break;
        }
    }
    if (static_cast<int>(valid.size()) < cfg.effective_min_valid())
        throw insufficient_samples(
            "only " + std::to_string(valid.size()) + " of " +
            std::to_string(params.n_samples) + " samples decoded to " +
            std::to_string(cfg.horizon) + " steps");

    out.samples = std::move(valid);
    out.valid_sample_count = out.samples.size();

    out.quantile_levels = cfg.quantile_levels;
    out.quantiles.assign(out.quantile_levels.size(), std::vector<double>(horizon));
    out.point.assign(horizon, 0.0);
    std::vector<double> column(out.samples.size());
    for (std::size_t t = 0; t < horizon; ++t) {
        for (std::size_t i = 0; i < out.samples.size(); ++i)
            column[i] = out.samples[i][t];
        for (std::size_t q = 0; q < out.quantile_levels.size(); ++q)
            out.quantiles[q][t] = quantile_linear(column, out.quantile_levels[q]);
        out.point[t] = quantile_linear(column, 0.5);
    }
    return out;
}

/**
 * NLL/D of the test continuation given the encoded history, including the
 * -log(scale_a) change-of-variables term: the probabilistic metric for
 * backends that support scoring.
 */
inline double evaluate_nll(const TimeSeries& train, const TimeSeries& test,
                           Backend& backend, const ForecastConfig& cfg) {
    cfg.validate();
    train.validate();
    test.validate();
    if (train.empty() || test.empty())
        throw empty_series_error("evaluate_nll needs nonempty train and test");

    ScalerParams scaler =
        cfg.pinned_scaler ? *cfg.pinned_scaler : fit_scaler(train, cfg.scaler);
    TimeSeries scaled_train = transform(train, scaler);
    TimeSeries scaled_test = transform(test, scaler);

    double cpt = backend.chars_per_token();
    std::size_t keep = detail::truncated_history_len(scaled_train, cfg, cpt);
    TimeSeries kept = scaled_train.slice(scaled_train.size() - keep, scaled_train.size());

    // Build the target as the suffix of the full encoding so prompt + target
    // is byte-identical to encoding history and continuation together.
    TimeSeries joint = kept;
    for (std::size_t i = 0; i < scaled_test.size(); ++i)
        joint.push(scaled_test.values[i], scaled_test.missing[i]);
    std::string full = encode_series(joint, cfg.encoding);
    std::string prompt = encode_series(kept, cfg.encoding);
    std::string target = full.substr(prompt.size());

    auto scored = backend.score(prompt, target, cfg.sampling);
    auto dist = make_digit_distribution(scored, cfg.encoding);
    if (dist.text() != target)
        throw backend_error("backend scored tokens do not reconstruct the target");
    return continuous_nll_per_dim(test, dist, scaler, cfg.encoding);
}

struct TuneEntry {
    ForecastConfig config;
    std::optional<double> nll;
    std::string error;   // nonempty if this config failed to evaluate
};

struct TuneResult {
    std::size_t best_index = 0;
    std::vector<TuneEntry> table;
    std::size_t validation_length = 0;

    const ForecastConfig& best() const { return table[best_index].config; }
};

/**
 * Validation tuning: the last T observations of the training series form the
 * validation split (T = the test length when known, otherwise 20% of the
 * history; never more than half). The grid entry minimizing validation NLL/D
 * wins; ties break by grid order.
 */
inline TuneResult tune(const TimeSeries& train, Backend& backend,
                       const std::vector<ForecastConfig>& grid,
                       std::optional<std::size_t> test_length = std::nullopt) {
    train.validate();
    if (grid.empty()) throw invalid_config("tuning grid is empty");
    if (train.size() < 2) throw empty_series_error("series too short to tune");

    std::size_t T = test_length.value_or(std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(0.2 * double(train.size())))));
    if (train.size() < 2 * T) T = train.size() / 2;
    if (T == 0) T = 1;

    TimeSeries fit_part = train.slice(0, train.size() - T);
    TimeSeries val_part = train.slice(train.size() - T, train.size());

    TuneResult result;
    result.validation_length = T;
    std::optional<double> best_nll;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        TuneEntry entry;
        entry.config = grid[i];
        try {
            entry.nll = evaluate_nll(fit_part, val_part, backend, grid[i]);
            if (!best_nll || *entry.nll < *best_nll) {
                best_nll = entry.nll;
                result.best_index = i;
            }
        } catch (const error& e) {
            entry.error = std::string(e.category()) + ": " + e.what();
        }
        result.table.push_back(std::move(entry));
    }
    if (!best_nll)
        throw error("all-configs-failed", "every grid configuration failed to evaluate");
    return result;
}

} // namespace numcast
