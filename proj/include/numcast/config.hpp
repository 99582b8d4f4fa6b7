#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "numcast/common.hpp"
#include "numcast/errors.hpp"
#include "numcast/forecaster.hpp"

namespace numcast {

// Flat key/value configuration files mirroring the config type fields:
//
//   # forecast settings
//   scaler.alpha = 0.99
//   encoding.time_sep = " ,"
//   sampling.n_samples = 20
//
// Values may be double-quoted to preserve significant whitespace.

namespace detail {

inline std::string unquote(std::string_view raw) {
    auto v = trim(raw);
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) {
                ++i;
                switch (v[i]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    default: out += v[i];
                }
            } else {
                out += v[i];
            }
        }
        return out;
    }
    return std::string(v);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw invalid_config("expected a boolean for '" + key + "', got '" + v + "'");
}

} // namespace detail

inline std::map<std::string, std::string> read_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string_view::npos)
            throw invalid_config(path + ":" + std::to_string(lineno) +
                                 ": expected 'key = value'");
        std::string key(detail::trim(t.substr(0, eq)));
        std::string value = detail::unquote(t.substr(eq + 1));
        if (key.empty())
            throw invalid_config(path + ":" + std::to_string(lineno) + ": empty key");
        out[key] = value;
    }
    return out;
}

// Apply one key to a ForecastConfig; unknown keys are rejected so typos
// surface instead of silently using defaults.
inline void apply_config_key(ForecastConfig& cfg, const std::string& key,
                             const std::string& value) {
    using detail::parse_bool;
    try {
        if (key == "scaler.alpha") cfg.scaler.alpha = std::stod(value);
        else if (key == "scaler.beta") cfg.scaler.beta = std::stod(value);
        else if (key == "scaler.basic") cfg.scaler.basic = parse_bool(value, key);
        else if (key == "encoding.precision") cfg.encoding.precision = std::stoi(value);
        else if (key == "encoding.spaced") cfg.encoding.spaced = parse_bool(value, key);
        else if (key == "encoding.time_sep") cfg.encoding.time_sep = value;
        else if (key == "encoding.digit_sep") cfg.encoding.digit_sep = value;
        else if (key == "encoding.signed") cfg.encoding.signed_values = parse_bool(value, key);
        else if (key == "encoding.missing_token") cfg.encoding.missing_token = value;
        else if (key == "encoding.max_digits") cfg.encoding.max_digits = std::stoi(value);
        else if (key == "sampling.n_samples") cfg.sampling.n_samples = std::stoi(value);
        else if (key == "sampling.max_new_tokens")
            cfg.sampling.max_new_tokens = std::stoi(value);
        else if (key == "sampling.temperature") cfg.sampling.temperature = std::stod(value);
        else if (key == "sampling.top_p") cfg.sampling.top_p = std::stod(value);
        else if (key == "sampling.stop") cfg.sampling.stop = value;
        else if (key == "sampling.logprob_top_k")
            cfg.sampling.logprob_top_k = std::stoi(value);
        else if (key == "sampling.token_budget")
            cfg.sampling.token_budget = std::stoull(value);
        else if (key == "horizon") cfg.horizon = std::stoi(value);
        else if (key == "max_history") cfg.max_history = std::stoi(value);
        else if (key == "context_token_budget")
            cfg.context_token_budget = std::stoi(value);
        else if (key == "min_valid") cfg.min_valid = std::stoi(value);
        else if (key == "topup_rounds") cfg.topup_rounds = std::stoi(value);
        else if (key == "quantiles") {
            cfg.quantile_levels.clear();
            for (const auto& q : detail::split(value, ","))
                cfg.quantile_levels.push_back(std::stod(std::string(detail::trim(q))));
        } else {
            throw invalid_config("unknown config key: " + key);
        }
    } catch (const std::invalid_argument&) {
        throw invalid_config("bad value for '" + key + "': '" + value + "'");
    } catch (const std::out_of_range&) {
        throw invalid_config("value out of range for '" + key + "': '" + value + "'");
    }
}

inline ForecastConfig load_forecast_config(const std::string& path,
                                           ForecastConfig base = {}) {
    for (const auto& [key, value] : read_flat_config(path))
        apply_config_key(base, key, value);
    return base;
}

/**
 * Grid file: each line is a config key mapped to a comma-separated list of
 * candidate values; the grid is the cartesian product. Keys use the same
 * names as forecast config files (e.g. scaler.alpha, encoding.precision).
 */
inline std::vector<ForecastConfig> load_grid(const std::string& path,
                                             const ForecastConfig& base) {
    auto raw = read_flat_config(path);
    if (raw.empty()) throw invalid_config("grid file has no entries: " + path);

    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    for (const auto& [key, value] : raw) {
        std::vector<std::string> values;
        for (const auto& v : detail::split(value, ","))
            values.push_back(std::string(detail::trim(v)));
        if (values.empty())
            throw invalid_config("grid axis '" + key + "' has no values");
        axes.emplace_back(key, std::move(values));
    }

    std::vector<ForecastConfig> grid{base};
    for (const auto& [key, values] : axes) {
        std::vector<ForecastConfig> next;
        next.reserve(grid.size() * values.size());
        for (const auto& cfg : grid) {
            for (const auto& value : values) {
                ForecastConfig candidate = cfg;
                apply_config_key(candidate, key, value);
                next.push_back(std::move(candidate));
            }
        }
        grid = std::move(next);
    }
    return grid;
}

} // namespace numcast
