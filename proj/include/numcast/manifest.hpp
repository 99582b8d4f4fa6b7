#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "numcast/backend.hpp"
#include "numcast/common.hpp"
#include "numcast/errors.hpp"
#include "numcast/forecaster.hpp"

namespace numcast {

// JSON views of the configuration types, used by the run manifest so every
// forecast can be reproduced exactly (replay backend + pinned scaler).

inline json to_json(const ScalerConfig& c) {
    return json{{"alpha", c.alpha}, {"beta", c.beta}, {"basic", c.basic}};
}

inline ScalerConfig scaler_config_from_json(const json& j) {
    ScalerConfig c;
    c.alpha = j.at("alpha").get<double>();
    c.beta = j.at("beta").get<double>();
    c.basic = j.at("basic").get<bool>();
    return c;
}

inline json to_json(const ScalerParams& p) {
    return json{{"offset_b", p.offset_b},
                {"scale_a", p.scale_a},
                {"config", to_json(p.config)}};
}

inline ScalerParams scaler_params_from_json(const json& j) {
    ScalerParams p;
    p.offset_b = j.at("offset_b").get<double>();
    p.scale_a = j.at("scale_a").get<double>();
    p.config = scaler_config_from_json(j.at("config"));
    return p;
}

inline json to_json(const EncodingConfig& c) {
    return json{{"base", c.base},
                {"precision", c.precision},
                {"spaced", c.spaced},
                {"time_sep", c.time_sep},
                {"digit_sep", c.digit_sep},
                {"signed", c.signed_values},
                {"missing_token", c.missing_token},
                {"max_digits", c.max_digits}};
}

inline EncodingConfig encoding_config_from_json(const json& j) {
    EncodingConfig c;
    c.base = j.at("base").get<int>();
    c.precision = j.at("precision").get<int>();
    c.spaced = j.at("spaced").get<bool>();
    c.time_sep = j.at("time_sep").get<std::string>();
    c.digit_sep = j.at("digit_sep").get<std::string>();
    c.signed_values = j.at("signed").get<bool>();
    c.missing_token = j.at("missing_token").get<std::string>();
    c.max_digits = j.at("max_digits").get<int>();
    return c;
}

inline json to_json(const ForecastConfig& c) {
    json j;
    j["scaler"] = to_json(c.scaler);
    j["encoding"] = to_json(c.encoding);
    j["sampling"] = c.sampling.to_json();
    j["horizon"] = c.horizon;
    if (c.max_history) j["max_history"] = *c.max_history;
    j["context_token_budget"] = c.context_token_budget;
    j["quantile_levels"] = c.quantile_levels;
    j["min_valid"] = c.min_valid;
    j["topup_rounds"] = c.topup_rounds;
    if (c.pinned_scaler) j["pinned_scaler"] = to_json(*c.pinned_scaler);
    return j;
}

inline ForecastConfig forecast_config_from_json(const json& j) {
    ForecastConfig c;
    c.scaler = scaler_config_from_json(j.at("scaler"));
    c.encoding = encoding_config_from_json(j.at("encoding"));
    c.sampling = SamplingParams::from_json(j.at("sampling"));
    c.horizon = j.at("horizon").get<int>();
    if (j.contains("max_history")) c.max_history = j.at("max_history").get<int>();
    c.context_token_budget = j.at("context_token_budget").get<int>();
    c.quantile_levels = j.at("quantile_levels").get<std::vector<double>>();
    c.min_valid = j.at("min_valid").get<int>();
    c.topup_rounds = j.at("topup_rounds").get<int>();
    if (j.contains("pinned_scaler"))
        c.pinned_scaler = scaler_params_from_json(j.at("pinned_scaler"));
    return c;
}

struct SeriesRecord {
    std::string name;
    ScalerParams scaler;
    std::size_t history_used = 0;
};

struct RunManifest {
    std::string command;
    std::string backend_identity;
    std::uint64_t seed = 0;
    json config;
    std::vector<SeriesRecord> series;
    std::vector<std::string> fixture_keys;
    std::size_t grid_size = 0;
    double elapsed_ms = 0.0;

    json to_json_doc() const {
        json j;
        j["schema"] = "numcast-manifest/1";
        j["tool_version"] = kVersion;
        j["command"] = command;
        j["backend"] = backend_identity;
        j["seed"] = seed;
        j["config"] = config;
        json per_series = json::array();
        for (const auto& s : series)
            per_series.push_back(json{{"name", s.name},
                                      {"scaler", to_json(s.scaler)},
                                      {"history_used", s.history_used}});
        j["series"] = per_series;
        j["fixtures"] = fixture_keys;
        if (grid_size) j["grid_size"] = grid_size;
        j["elapsed_ms"] = elapsed_ms;
        return j;
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw io_error("cannot write manifest: " + path);
        out << to_json_doc().dump(2) << "\n";
    }
};

} // namespace numcast
