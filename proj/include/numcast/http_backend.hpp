#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "numcast/backend.hpp"
#include "numcast/errors.hpp"

namespace numcast {

/**
 * Client for OpenAI-compatible completion endpoints
 * (POST {base_url}/v1/completions). Scoring uses echo mode: the endpoint is
 * asked to return logprobs over the prompt itself with max_tokens = 0, and
 * the target region is sliced out by text offset.
 */
struct HttpBackendConfig {
    std::string base_url = "http://127.0.0.1:8080";
    std::string model;                        // optional model name field
    std::string api_key_env = "OPENAI_API_KEY";
    std::string completions_path = "/v1/completions";
    int parallelism = 4;                      // max concurrent requests
    int max_attempts = 5;                     // per-request tries, transient errors
    int initial_backoff_ms = 250;             // doubled per retry
    int timeout_s = 120;
    double chars_per_token_ratio = 1.0;       // prompt budgeting estimate

    void validate() const {
        if (base_url.empty()) throw invalid_config("http backend needs a base URL");
        if (parallelism < 1 || parallelism > 64)
            throw invalid_config("http parallelism must be in [1, 64]");
        if (max_attempts < 1) throw invalid_config("max_attempts must be >= 1");
    }
};

class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)), gate_(1) {
        cfg_.validate();
        gate_.release(cfg_.parallelism - 1);
        if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
    }

    std::string identity() const override {
        return "http(" + cfg_.base_url +
               (cfg_.model.empty() ? "" : ",model=" + cfg_.model) + ")";
    }

    double chars_per_token() const override { return cfg_.chars_per_token_ratio; }

    std::vector<CompletionResult> complete(const std::string& prompt,
                                           const SamplingParams& params) override {
        params.validate();
        json body = request_body(prompt, params);
        body["n"] = params.n_samples;
        body["max_tokens"] = params.max_new_tokens;
        body["echo"] = false;

        json resp = post(body);
        auto choices = expect_array(resp, "choices");
        if (choices.size() != static_cast<std::size_t>(params.n_samples))
            throw malformed_response("expected " + std::to_string(params.n_samples) +
                                     " choices, got " + std::to_string(choices.size()));
        std::vector<CompletionResult> out;
        out.reserve(choices.size());
        for (const auto& choice : choices) {
            CompletionResult r;
            if (!choice.contains("text") || !choice["text"].is_string())
                throw malformed_response("choice without a text field");
            r.text = choice["text"].get<std::string>();
            r.finish_reason =
                finish_reason_from_string(choice.value("finish_reason", "length"));
            if (choice.contains("logprobs") && choice["logprobs"].is_object())
                r.token_logprobs = parse_logprobs(choice["logprobs"], 0).tokens;
            out.push_back(std::move(r));
        }
        return out;
    }

    bool supports_scoring() const override { return true; }

    std::vector<ScoredToken> score(const std::string& prompt, const std::string& target,
                                   const SamplingParams& params) override {
        json body = request_body(prompt + target, params);
        body["n"] = 1;
        body["max_tokens"] = 0;
        body["echo"] = true;

        json resp = post(body);
        auto choices = expect_array(resp, "choices");
        if (choices.empty()) throw malformed_response("no choices in score response");
        const auto& choice = choices[0];
        if (!choice.contains("logprobs") || !choice["logprobs"].is_object())
            throw unsupported_capability(
                "endpoint did not return logprobs for echo scoring");
        auto parsed = parse_logprobs(choice["logprobs"], prompt.size());
        if (!parsed.offsets_seen)
            throw unsupported_capability(
                "endpoint did not return text offsets for echo scoring");
        return parsed.tokens;
    }

private:
    struct ParsedLogprobs {
        std::vector<ScoredToken> tokens;
        bool offsets_seen = false;
    };

    json request_body(const std::string& prompt, const SamplingParams& params) const {
        json body;
        if (!cfg_.model.empty()) body["model"] = cfg_.model;
        body["prompt"] = prompt;
        body["temperature"] = params.temperature;
        body["top_p"] = params.top_p;
        body["logprobs"] = params.logprob_top_k;
        body["logit_bias"] = params.allowed_token_bias;
        if (!params.stop.empty()) body["stop"] = params.stop;
        return body;
    }

    // Tokens at byte offsets >= from_offset; offsets are required only when
    // slicing a target region out of an echo response.
    ParsedLogprobs parse_logprobs(const json& lp, std::size_t from_offset) const {
        auto tokens = expect_array(lp, "tokens");
        auto logprobs = expect_array(lp, "token_logprobs");
        auto top = expect_array(lp, "top_logprobs");
        if (tokens.size() != logprobs.size() || tokens.size() != top.size())
            throw malformed_response("logprob arrays have mismatched lengths");

        std::vector<std::size_t> offsets;
        ParsedLogprobs out;
        if (lp.contains("text_offset") && lp["text_offset"].is_array()) {
            out.offsets_seen = true;
            for (const auto& o : lp["text_offset"]) push_offset(offsets, o);
            if (offsets.size() != tokens.size())
                throw malformed_response("text_offset length mismatch");
        }

        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (out.offsets_seen && offsets[i] < from_offset) continue;
            ScoredToken t;
            if (!tokens[i].is_string()) throw malformed_response("non-string token");
            t.token = tokens[i].get<std::string>();
            if (logprobs[i].is_null())
                throw malformed_response("null logprob inside the scored region");
            t.logprob = logprobs[i].get<double>();
            if (top[i].is_object())
                t.top = top[i].get<std::map<std::string, double>>();
            out.tokens.push_back(std::move(t));
        }
        return out;
    }

    static void push_offset(std::vector<std::size_t>& offsets, const json& o) {
        if (!o.is_number()) throw malformed_response("non-numeric text offset");
        offsets.push_back(o.get<std::size_t>());
    }

    static json expect_array(const json& j, const char* field) {
        if (!j.contains(field) || !j[field].is_array())
            throw malformed_response(std::string("missing array field '") + field + "'");
        return j[field];
    }

    json post(const json& body) {
        gate_.acquire();
        struct Release {
            std::counting_semaphore<64>& s;
            ~Release() { s.release(); }
        } release{gate_};

        std::string payload = body.dump();
        std::string last_error;
        for (int attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(
                    cfg_.initial_backoff_ms << (attempt - 1)));
            httplib::Client client(cfg_.base_url);
            client.set_connection_timeout(cfg_.timeout_s);
            client.set_read_timeout(cfg_.timeout_s);
            client.set_write_timeout(cfg_.timeout_s);
            httplib::Headers headers;
            if (!api_key_.empty())
                headers.emplace("Authorization", "Bearer " + api_key_);

            auto res = client.Post(cfg_.completions_path, headers, payload,
                                   "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "server status " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw backend_error("completion request failed with status " +
                                    std::to_string(res->status) + ": " + res->body);
            json parsed = json::parse(res->body, nullptr, false);
            if (parsed.is_discarded())
                throw malformed_response("response body is not valid JSON");
            return parsed;
        }
        throw transport_error("request failed after " +
                              std::to_string(cfg_.max_attempts) +
                              " attempts: " + last_error);
    }

    HttpBackendConfig cfg_;
    std::counting_semaphore<64> gate_;
    std::string api_key_;
};

} // namespace numcast
