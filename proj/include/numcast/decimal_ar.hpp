#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "numcast/codec.hpp"
#include "numcast/common.hpp"
#include "numcast/digit_density.hpp"
#include "numcast/errors.hpp"

namespace numcast {

/**
 * Decimal AR: an interpolated additively-smoothed character n-gram over
 * encoded numeric strings. Trains in closed form, scores with exact
 * likelihoods, and samples reproducibly, which makes it both a flexible 1-D
 * density estimator and a fully offline stand-in backend for pipeline tests.
 *
 * Conditionals interpolate across context lengths 0..order:
 *   P_L(c | ctx) = (count_L(ctx, c) + m * P_{L-1}(c | ctx[1:])) / (total_L(ctx) + m)
 * with P_{-1} uniform over the alphabet, so every context sums to 1 exactly.
 * Contexts near the start of a string are padded with a reserved BOS byte.
 */
struct DecimalARConfig {
    int order = 5;            // max context length in characters
    double smoothing = 0.1;   // interpolation pseudo-count mass (m)
    std::string alphabet;     // emission characters; see EncodingConfig::alphabet()
    std::uint64_t seed = 0;   // base seed used by backend wrappers

    void validate() const {
        if (order < 1 || order > 16)
            throw invalid_config("decimal-ar order must be in [1, 16]");
        if (!(smoothing > 0.0))
            throw invalid_config("decimal-ar smoothing must be > 0");
        if (alphabet.empty())
            throw invalid_config("decimal-ar alphabet must be nonempty");
        for (char c : alphabet)
            if (c == kBos) throw invalid_config("alphabet may not contain the BOS byte");
        std::string sorted = alphabet;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw invalid_config("alphabet characters must be unique");
    }

    static constexpr char kBos = '\x02';
};

class DecimalARModel {
public:
    DecimalARModel() = default;
    explicit DecimalARModel(DecimalARConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
    }

    const DecimalARConfig& config() const { return cfg_; }

    void add_string(const std::string& s) {
        for (char c : s)
            if (cfg_.alphabet.find(c) == std::string::npos)
                throw invalid_input(std::string("training character '") + c +
                                    "' outside the model alphabet");
        std::string padded(static_cast<std::size_t>(cfg_.order), DecimalARConfig::kBos);
        padded += s;
        for (std::size_t i = static_cast<std::size_t>(cfg_.order); i < padded.size(); ++i) {
            for (int len = 0; len <= cfg_.order; ++len) {
                auto ctx = padded.substr(i - static_cast<std::size_t>(len),
                                         static_cast<std::size_t>(len));
                auto& slot = counts_[ctx];
                ++slot.by_char[padded[i]];
                ++slot.total;
            }
        }
    }

    // Conditional next-character distribution given the raw preceding text.
    std::map<char, double> conditional(std::string_view context) const {
        std::string padded(static_cast<std::size_t>(cfg_.order), DecimalARConfig::kBos);
        padded += context;
        std::string_view ctx(padded);
        ctx = ctx.substr(ctx.size() - static_cast<std::size_t>(cfg_.order));

        std::map<char, double> probs;
        double uniform = 1.0 / static_cast<double>(cfg_.alphabet.size());
        for (char c : cfg_.alphabet) probs[c] = uniform;
        for (int len = 0; len <= cfg_.order; ++len) {
            auto key = std::string(ctx.substr(ctx.size() - static_cast<std::size_t>(len)));
            const CountSlot* slot = find_counts(key);
            double total = slot ? static_cast<double>(slot->total) : 0.0;
            double denom = total + cfg_.smoothing;
            for (auto& [c, p] : probs) {
                double count = 0.0;
                if (slot) {
                    auto it = slot->by_char.find(c);
                    if (it != slot->by_char.end()) count = static_cast<double>(it->second);
                }
                p = (count + cfg_.smoothing * p) / denom;
            }
        }
        return probs;
    }

    double char_logprob(std::string_view context, char c) const {
        auto probs = conditional(context);
        auto it = probs.find(c);
        if (it == probs.end())
            throw invalid_input("character outside the model alphabet");
        return std::log(it->second);
    }

    // Exact per-character distributions over `target`, conditioned on
    // `prompt` plus the preceding target characters.
    std::vector<ScoredToken> score(std::string_view prompt, std::string_view target) const {
        std::vector<ScoredToken> out;
        out.reserve(target.size());
        std::string context(prompt);
        for (char c : target) {
            auto probs = conditional(context);
            auto it = probs.find(c);
            if (it == probs.end())
                throw invalid_input("scored character outside the model alphabet");
            ScoredToken tok;
            tok.token = std::string(1, c);
            tok.logprob = std::log(it->second);
            for (const auto& [ch, p] : probs) tok.top[std::string(1, ch)] = std::log(p);
            out.push_back(std::move(tok));
            context += c;
        }
        return out;
    }

    std::vector<ScoredToken> logprobs(std::string_view text) const {
        return score({}, text);
    }

    struct SampleOptions {
        std::size_t max_chars = 64;
        double temperature = 1.0;
        double top_p = 1.0;
        const std::map<char, double>* logit_bias = nullptr;  // added before temperature
    };

    // Autoregressive sampling: logit bias, then temperature, then nucleus
    // truncation, then renormalization. temperature -> 0 is greedy argmax.
    std::string sample(std::string_view prompt, const SampleOptions& opt,
                       std::mt19937_64& rng) const {
        if (!(opt.temperature >= 0.0)) throw invalid_input("temperature must be >= 0");
        if (!(opt.top_p > 0.0 && opt.top_p <= 1.0))
            throw invalid_input("top_p must be in (0, 1]");
        std::string context(prompt);
        std::string generated;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t i = 0; i < opt.max_chars; ++i) {
            auto probs = conditional(context);
            std::vector<std::pair<char, double>> weighted(probs.begin(), probs.end());
            if (opt.logit_bias) {
                double norm = 0.0;
                for (auto& [c, p] : weighted) {
                    auto it = opt.logit_bias->find(c);
                    if (it != opt.logit_bias->end()) p = std::exp(std::log(p) + it->second);
                    norm += p;
                }
                for (auto& [c, p] : weighted) p /= norm;
            }

            char next;
            if (opt.temperature < 1e-9) {
                next = std::max_element(weighted.begin(), weighted.end(),
                                        [](const auto& a, const auto& b) {
                                            if (a.second != b.second)
                                                return a.second < b.second;
                                            return a.first > b.first;
                                        })
                           ->first;
            } else {
                double norm = 0.0;
                for (auto& [c, p] : weighted) {
                    p = std::pow(p, 1.0 / opt.temperature);
                    norm += p;
                }
                for (auto& [c, p] : weighted) p /= norm;
                // Nucleus: smallest prefix of the sorted distribution with
                // cumulative mass >= top_p.
                std::sort(weighted.begin(), weighted.end(), [](const auto& a, const auto& b) {
                    if (a.second != b.second) return a.second > b.second;
                    return a.first < b.first;
                });
                double cum = 0.0;
                std::size_t keep = weighted.size();
                for (std::size_t k = 0; k < weighted.size(); ++k) {
                    cum += weighted[k].second;
                    if (cum >= opt.top_p - 1e-15) {
                        keep = k + 1;
                        break;
                    }
                }
                weighted.resize(keep);
                double kept_mass = 0.0;
                for (auto& [c, p] : weighted) kept_mass += p;
                double u = unit(rng) * kept_mass;
                next = weighted.back().first;
                double acc = 0.0;
                for (auto& [c, p] : weighted) {
                    acc += p;
                    if (u < acc) {
                        next = c;
                        break;
                    }
                }
            }
            generated += next;
            context += next;
        }
        return generated;
    }

    // ---- versioned flat-file serialization (counts table) ----

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw io_error("cannot write model file: " + path);
        out << "numcast-decimal-ar 1\n";
        out << "order " << cfg_.order << "\n";
        out.precision(17);
        out << "smoothing " << cfg_.smoothing << "\n";
        out << "alphabet " << escape(cfg_.alphabet) << "\n";
        out << "rows " << count_rows() << "\n";
        std::vector<std::string> keys;
        keys.reserve(counts_.size());
        for (const auto& [ctx, slot] : counts_) keys.push_back(ctx);
        std::sort(keys.begin(), keys.end());
        for (const auto& ctx : keys) {
            const auto& slot = counts_.at(ctx);
            for (const auto& [c, n] : slot.by_char)
                out << escape(ctx) << " " << escape(std::string(1, c)) << " " << n << "\n";
        }
        if (!out) throw io_error("failed writing model file: " + path);
    }

    static DecimalARModel load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw io_error("cannot open model file: " + path);
        std::string magic;
        int version = 0;
        in >> magic >> version;
        if (magic != "numcast-decimal-ar" || version != 1)
            throw io_error("unrecognized model file format: " + path);
        DecimalARConfig cfg;
        std::string key;
        std::uint64_t rows = 0;
        while (in >> key) {
            if (key == "order") in >> cfg.order;
            else if (key == "smoothing") in >> cfg.smoothing;
            else if (key == "alphabet") {
                std::string esc;
                in >> esc;
                cfg.alphabet = unescape(esc);
            } else if (key == "rows") {
                in >> rows;
                break;
            } else {
                throw io_error("unexpected model header field: " + key);
            }
        }
        DecimalARModel model(cfg);
        for (std::uint64_t i = 0; i < rows; ++i) {
            std::string ctx_esc, char_esc;
            std::uint64_t n = 0;
            if (!(in >> ctx_esc >> char_esc >> n))
                throw io_error("truncated model file: " + path);
            std::string ctx = unescape(ctx_esc);
            std::string ch = unescape(char_esc);
            if (ch.size() != 1) throw io_error("bad character entry in model file");
            auto& slot = model.counts_[ctx];
            slot.by_char[ch[0]] += n;
            slot.total += n;
        }
        return model;
    }

    bool operator==(const DecimalARModel& other) const {
        if (cfg_.order != other.cfg_.order || cfg_.alphabet != other.cfg_.alphabet)
            return false;
        if (counts_.size() != other.counts_.size()) return false;
        for (const auto& [ctx, slot] : counts_) {
            auto it = other.counts_.find(ctx);
            if (it == other.counts_.end() || it->second.by_char != slot.by_char)
                return false;
        }
        return true;
    }

private:
    struct CountSlot {
        std::map<char, std::uint64_t> by_char;
        std::uint64_t total = 0;
    };

    const CountSlot* find_counts(const std::string& ctx) const {
        auto it = counts_.find(ctx);
        return it == counts_.end() ? nullptr : &it->second;
    }

    std::uint64_t count_rows() const {
        std::uint64_t n = 0;
        for (const auto& [ctx, slot] : counts_) n += slot.by_char.size();
        return n;
    }

    static std::string escape(const std::string& s) {
        static const char* hex = "0123456789ABCDEF";
        std::string out;
        for (unsigned char c : s) {
            if (c > 32 && c < 127 && c != '%') {
                out += static_cast<char>(c);
            } else {
                out += '%';
                out += hex[c >> 4];
                out += hex[c & 0xF];
            }
        }
        if (out.empty()) out = "%";   // empty context marker
        return out;
    }

    static std::string unescape(const std::string& s) {
        if (s == "%") return {};
        std::string out;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '%' && i + 2 < s.size()) {
                out += static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16));
                i += 2;
            } else {
                out += s[i];
            }
        }
        return out;
    }

    DecimalARConfig cfg_;
    std::unordered_map<std::string, CountSlot> counts_;
};

inline DecimalARModel train_decimal_ar(const std::vector<std::string>& strings,
                                       const DecimalARConfig& cfg) {
    DecimalARModel model(cfg);
    for (const auto& s : strings) model.add_string(s);
    return model;
}

// Log-probability that the model emits the full encoding of `x` followed by
// the time separator, starting at a value boundary after `context`.
inline double value_logprob(const DecimalARModel& model, double x,
                            const EncodingConfig& cfg, std::string_view context = {}) {
    std::string token = encode_value(x, cfg) + cfg.time_sep;
    if (cfg.spaced) token = cfg.digit_sep + token;
    std::string ctx(context);
    double logp = 0.0;
    for (char c : token) {
        logp += model.char_logprob(ctx, c);
        ctx += c;
    }
    return logp;
}

struct ValueBin {
    double value = 0.0;   // decoded bin representative (k * base^-n)
    double prob = 0.0;    // model probability of the bin's canonical string
};

/**
 * Enumerate the model's value distribution at a value boundary: depth-first
 * search over canonical digit strings (no leading zeros), each terminated by
 * the time separator. Branches with prefix probability below `min_branch`
 * are pruned, so the returned probabilities sum to 1 minus pruned/malformed
 * mass. Used for quadrature over the implied continuous density.
 */
inline std::vector<ValueBin> enumerate_value_distribution(
    const DecimalARModel& model, const EncodingConfig& cfg,
    double min_branch = 1e-10, std::string_view context = {}) {
    cfg.validate();
    std::vector<ValueBin> bins;
    const std::string lead = cfg.spaced ? cfg.digit_sep : std::string();
    const std::string& sep = cfg.spaced ? cfg.digit_sep : std::string();

    // Probability of emitting `chars` starting from `ctx`.
    auto extend = [&model](std::string& ctx, const std::string& chars, double logp) {
        for (char c : chars) {
            logp += model.char_logprob(ctx, c);
            ctx += c;
        }
        return logp;
    };

    struct Node {
        std::string digits;
        std::string ctx;
        double logp;
        bool negative;
    };
    std::vector<Node> stack;
    auto push_first = [&](bool negative) {
        std::string ctx(context);
        double logp = 0.0;
        if (!lead.empty()) logp = extend(ctx, lead, logp);
        if (negative) {
            logp = extend(ctx, std::string(1, '-') + sep, logp);
            if (logp < std::log(min_branch)) return;
        }
        for (char d = '0'; d <= '9'; ++d) {
            Node n{std::string(1, d), ctx, logp, negative};
            n.logp = extend(n.ctx, std::string(1, d), n.logp);
            if (n.logp >= std::log(min_branch)) stack.push_back(std::move(n));
        }
    };
    push_first(false);
    if (cfg.signed_values) push_first(true);

    const double scale = std::pow(10.0, cfg.precision);
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();

        // Terminate this digit string with the time separator.
        {
            std::string ctx = node.ctx;
            double logp = extend(ctx, cfg.time_sep, node.logp);
            if (logp >= std::log(min_branch)) {
                double magnitude = std::stod(node.digits) / scale;
                bins.push_back({node.negative ? -magnitude : magnitude, std::exp(logp)});
            }
        }
        // Extend with one more digit; "0" cannot be extended (no leading zeros).
        if (node.digits == "0" ||
            static_cast<int>(node.digits.size()) >= cfg.max_digits)
            continue;
        for (char d = '0'; d <= '9'; ++d) {
            Node n{node.digits + d, node.ctx, node.logp, node.negative};
            std::string piece = sep.empty() ? std::string(1, d) : sep + d;
            n.logp = extend(n.ctx, piece, n.logp);
            if (n.logp >= std::log(min_branch)) stack.push_back(std::move(n));
        }
    }
    std::sort(bins.begin(), bins.end(),
              [](const ValueBin& a, const ValueBin& b) { return a.value < b.value; });
    return bins;
}

} // namespace numcast
