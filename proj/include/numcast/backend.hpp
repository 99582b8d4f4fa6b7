#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "numcast/codec.hpp"
#include "numcast/common.hpp"
#include "numcast/decimal_ar.hpp"
#include "numcast/digit_density.hpp"
#include "numcast/errors.hpp"

namespace numcast {

using json = nlohmann::json;

struct SamplingParams {
    int n_samples = 20;
    int max_new_tokens = 0;        // 0 = derived from the horizon by the caller
    double temperature = 0.7;
    double top_p = 1.0;
    std::map<std::string, double> allowed_token_bias;   // token -> logit bias
    std::string stop;              // empty = no stop sequence
    int logprob_top_k = 5;         // top-k logprobs requested from the backend
    std::uint64_t token_budget = 1000000;   // cap on n_samples * max_new_tokens

    void validate() const {
        if (n_samples < 1) throw invalid_config("n_samples must be >= 1");
        if (max_new_tokens < 0) throw invalid_config("max_new_tokens must be >= 0");
        if (!(temperature > 0.0)) throw invalid_config("temperature must be > 0");
        if (!(top_p > 0.0 && top_p <= 1.0)) throw invalid_config("top_p must be in (0, 1]");
        if (static_cast<std::uint64_t>(n_samples) *
                static_cast<std::uint64_t>(max_new_tokens) > token_budget)
            throw budget_exceeded("n_samples * max_new_tokens exceeds the token budget");
    }

    json to_json() const {
        json j;
        j["n_samples"] = n_samples;
        j["max_new_tokens"] = max_new_tokens;
        j["temperature"] = temperature;
        j["top_p"] = top_p;
        j["allowed_token_bias"] = allowed_token_bias;
        j["stop"] = stop;
        j["logprob_top_k"] = logprob_top_k;
        return j;
    }

    static SamplingParams from_json(const json& j) {
        SamplingParams p;
        p.n_samples = j.at("n_samples").get<int>();
        p.max_new_tokens = j.at("max_new_tokens").get<int>();
        p.temperature = j.at("temperature").get<double>();
        p.top_p = j.at("top_p").get<double>();
        p.allowed_token_bias =
            j.at("allowed_token_bias").get<std::map<std::string, double>>();
        p.stop = j.at("stop").get<std::string>();
        p.logprob_top_k = j.at("logprob_top_k").get<int>();
        return p;
    }
};

enum class FinishReason { length, stop, error };

inline const char* to_string(FinishReason r) {
    switch (r) {
        case FinishReason::length: return "length";
        case FinishReason::stop: return "stop";
        default: return "error";
    }
}

inline FinishReason finish_reason_from_string(const std::string& s) {
    if (s == "stop") return FinishReason::stop;
    if (s == "error") return FinishReason::error;
    return FinishReason::length;
}

struct CompletionResult {
    std::string text;
    std::optional<std::vector<ScoredToken>> token_logprobs;
    FinishReason finish_reason = FinishReason::length;
};

namespace detail {

inline json scored_token_to_json(const ScoredToken& t) {
    return json{{"token", t.token}, {"logprob", t.logprob}, {"top", t.top}};
}

inline ScoredToken scored_token_from_json(const json& j) {
    ScoredToken t;
    t.token = j.at("token").get<std::string>();
    t.logprob = j.at("logprob").get<double>();
    t.top = j.at("top").get<std::map<std::string, double>>();
    return t;
}

inline json completion_to_json(const CompletionResult& r) {
    json j;
    j["text"] = r.text;
    j["finish_reason"] = to_string(r.finish_reason);
    if (r.token_logprobs) {
        json toks = json::array();
        for (const auto& t : *r.token_logprobs) toks.push_back(scored_token_to_json(t));
        j["token_logprobs"] = toks;
    } else {
        j["token_logprobs"] = nullptr;
    }
    return j;
}

inline CompletionResult completion_from_json(const json& j) {
    CompletionResult r;
    r.text = j.at("text").get<std::string>();
    r.finish_reason = finish_reason_from_string(j.at("finish_reason").get<std::string>());
    if (!j.at("token_logprobs").is_null()) {
        std::vector<ScoredToken> toks;
        for (const auto& t : j.at("token_logprobs")) toks.push_back(scored_token_from_json(t));
        r.token_logprobs = std::move(toks);
    }
    return r;
}

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace detail

/**
 * Uniform interface to autoregressive text models. Implementations must be
 * safe for concurrent callers; repeated identical call sequences must yield
 * identical results so that recorded runs replay bit-exactly.
 */
class Backend {
public:
    virtual ~Backend() = default;

    virtual std::string identity() const = 0;

    // Token-count estimation ratio for prompt budgeting.
    virtual double chars_per_token() const { return 1.0; }

    virtual std::vector<CompletionResult> complete(const std::string& prompt,
                                                   const SamplingParams& params) = 0;

    virtual bool supports_scoring() const = 0;

    // Per-token logprobs with top-k context for the target region only.
    virtual std::vector<ScoredToken> score(const std::string& prompt,
                                           const std::string& target,
                                           const SamplingParams& params) = 0;
};

// ---------------------------------------------------------------------------
// Decimal AR backend: fully offline, deterministic given its seed and the
// sequence of calls made on it.
// ---------------------------------------------------------------------------

class DecimalARBackend : public Backend {
public:
    DecimalARBackend(DecimalARModel model, EncodingConfig encoding)
        : model_(std::move(model)), encoding_(std::move(encoding)) {}

    const DecimalARModel& model() const { return model_; }

    std::string identity() const override {
        const auto& cfg = model_.config();
        return "decimal-ar(order=" + std::to_string(cfg.order) +
               ",smoothing=" + std::to_string(cfg.smoothing) +
               ",seed=" + std::to_string(cfg.seed) + ")";
    }

    std::vector<CompletionResult> complete(const std::string& prompt,
                                           const SamplingParams& params) override {
        params.validate();
        std::uint64_t call;
        {
            std::lock_guard lock(mutex_);
            call = calls_++;
        }
        std::map<char, double> bias;
        for (const auto& [token, b] : params.allowed_token_bias)
            if (token.size() == 1) bias[token[0]] = b;

        DecimalARModel::SampleOptions opt;
        opt.max_chars = static_cast<std::size_t>(params.max_new_tokens);
        opt.temperature = params.temperature;
        opt.top_p = params.top_p;
        if (!bias.empty()) opt.logit_bias = &bias;

        std::vector<CompletionResult> out;
        out.reserve(static_cast<std::size_t>(params.n_samples));
        for (int i = 0; i < params.n_samples; ++i) {
            std::uint64_t mix = detail::fnv1a64(prompt) ^ (call * 0x9e3779b97f4a7c15ull) ^
                                static_cast<std::uint64_t>(i);
            std::mt19937_64 rng(model_.config().seed ^ mix);
            CompletionResult res;
            res.text = model_.sample(prompt, opt, rng);
            if (!params.stop.empty()) {
                auto pos = res.text.find(params.stop);
                if (pos != std::string::npos) {
                    res.text.resize(pos);
                    res.finish_reason = FinishReason::stop;
                }
            }
            out.push_back(std::move(res));
        }
        return out;
    }

    bool supports_scoring() const override { return true; }

    std::vector<ScoredToken> score(const std::string& prompt, const std::string& target,
                                   const SamplingParams&) override {
        return model_.score(prompt, target);
    }

private:
    DecimalARModel model_;
    EncodingConfig encoding_;
    std::mutex mutex_;
    std::uint64_t calls_ = 0;
};

// ---------------------------------------------------------------------------
// Record / replay fixtures. One JSON document per request/response pair,
// keyed by a content hash of (kind, prompt, params) plus a per-key sequence
// number, so a replayed run consumes responses in the order they were
// recorded even when the same request repeats (top-up retries).
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fixture_key(const std::string& kind, const std::string& prompt,
                               const std::string& target, const SamplingParams& params) {
    json j;
    j["kind"] = kind;
    j["prompt"] = prompt;
    j["target"] = target;
    j["params"] = params.to_json();
    return hex64(fnv1a64(j.dump()));
}

} // namespace detail

class RecordingBackend : public Backend {
public:
    RecordingBackend(std::shared_ptr<Backend> inner, std::filesystem::path dir)
        : inner_(std::move(inner)), dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    std::string identity() const override { return inner_->identity(); }
    double chars_per_token() const override { return inner_->chars_per_token(); }
    bool supports_scoring() const override { return inner_->supports_scoring(); }

    std::vector<CompletionResult> complete(const std::string& prompt,
                                           const SamplingParams& params) override {
        auto results = inner_->complete(prompt, params);
        json doc = make_doc("complete", prompt, {}, params);
        json arr = json::array();
        for (const auto& r : results) arr.push_back(detail::completion_to_json(r));
        doc["results"] = arr;
        write(doc);
        return results;
    }

    std::vector<ScoredToken> score(const std::string& prompt, const std::string& target,
                                   const SamplingParams& params) override {
        auto results = inner_->score(prompt, target, params);
        json doc = make_doc("score", prompt, target, params);
        json arr = json::array();
        for (const auto& t : results) arr.push_back(detail::scored_token_to_json(t));
        doc["results"] = arr;
        write(doc);
        return results;
    }

    std::vector<std::string> recorded_keys() const {
        std::lock_guard lock(mutex_);
        return keys_;
    }

private:
    json make_doc(const std::string& kind, const std::string& prompt,
                  const std::string& target, const SamplingParams& params) {
        std::string key = detail::fixture_key(kind, prompt, target, params);
        std::uint64_t seq;
        {
            std::lock_guard lock(mutex_);
            seq = seq_[key]++;
            keys_.push_back(key + "-" + std::to_string(seq));
        }
        json doc;
        doc["schema"] = "numcast-fixture/1";
        doc["kind"] = kind;
        doc["key"] = key;
        doc["seq"] = seq;
        doc["prompt"] = prompt;
        doc["target"] = target;
        doc["params"] = params.to_json();
        doc["backend"] = inner_->identity();
        return doc;
    }

    void write(const json& doc) {
        auto path = dir_ / (doc["key"].get<std::string>() + "-" +
                            std::to_string(doc["seq"].get<std::uint64_t>()) + ".json");
        std::ofstream out(path);
        if (!out) throw io_error("cannot write fixture: " + path.string());
        out << doc.dump(2) << "\n";
    }

    std::shared_ptr<Backend> inner_;
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    std::map<std::string, std::uint64_t> seq_;
    std::vector<std::string> keys_;
};

class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(const std::filesystem::path& dir) {
        if (!std::filesystem::is_directory(dir))
            throw io_error("fixture directory not found: " + dir.string());
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (entry.path().extension() != ".json") continue;
            std::ifstream in(entry.path());
            json doc = json::parse(in, nullptr, true);
            if (doc.value("schema", "") != "numcast-fixture/1")
                throw io_error("unrecognized fixture schema in " + entry.path().string());
            auto key = doc.at("key").get<std::string>();
            auto seq = doc.at("seq").get<std::uint64_t>();
            fixtures_[key][seq] = std::move(doc);
        }
        if (fixtures_.empty())
            throw io_error("no fixtures found under " + dir.string());
    }

    std::string identity() const override { return "replay"; }

    std::vector<CompletionResult> complete(const std::string& prompt,
                                           const SamplingParams& params) override {
        json doc = next("complete", prompt, {}, params);
        std::vector<CompletionResult> out;
        for (const auto& r : doc.at("results")) out.push_back(detail::completion_from_json(r));
        return out;
    }

    bool supports_scoring() const override { return true; }

    std::vector<ScoredToken> score(const std::string& prompt, const std::string& target,
                                   const SamplingParams& params) override {
        json doc = next("score", prompt, target, params);
        std::vector<ScoredToken> out;
        for (const auto& t : doc.at("results")) out.push_back(detail::scored_token_from_json(t));
        return out;
    }

private:
    json next(const std::string& kind, const std::string& prompt,
              const std::string& target, const SamplingParams& params) {
        std::string key = detail::fixture_key(kind, prompt, target, params);
        std::lock_guard lock(mutex_);
        auto it = fixtures_.find(key);
        if (it == fixtures_.end())
            throw backend_error("no recorded fixture for this request (key " + key + ")");
        std::uint64_t seq = cursor_[key]++;
        auto doc = it->second.find(seq);
        if (doc == it->second.end())
            throw backend_error("fixture sequence exhausted for key " + key);
        return doc->second;
    }

    std::map<std::string, std::map<std::uint64_t, json>> fixtures_;
    std::map<std::string, std::uint64_t> cursor_;
    std::mutex mutex_;
};

} // namespace numcast
