#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "numcast/codec.hpp"
#include "numcast/common.hpp"
#include "numcast/errors.hpp"
#include "numcast/scaler.hpp"
#include "numcast/series.hpp"

namespace numcast {

// One scored token as a backend reports it: the realized token, its
// log-probability, and the top-k alternatives at that position.
struct ScoredToken {
    std::string token;
    double logprob = 0.0;
    std::map<std::string, double> top;
};

// Per-position distributions restricted to the numeric alphabet. Each
// position keeps the raw retained log-probs plus the observed log-mass of
// tokens outside the encoding alphabet (l0), applied lazily by
// adjust_logprobs when the sequence is scored.
struct PositionLogprobs {
    std::string token;                 // realized token at this position
    std::map<std::string, double> retained;
    double excluded_logmass = -std::numeric_limits<double>::infinity();
};

struct DigitDistribution {
    std::vector<PositionLogprobs> positions;
    int base = 10;
    int precision = 2;

    std::string text() const {
        std::string out;
        for (const auto& p : positions) out += p.token;
        return out;
    }
};

// Renormalize top-k log-probs for the mass l0 observed on tokens outside the
// numeric alphabet: log p~ = log p - log(1 - e^{l0}). l0 = -inf is the
// identity (no excluded mass observed).
inline std::map<std::string, double> adjust_logprobs(
    const std::map<std::string, double>& raw, double excluded_logmass) {
    if (!(excluded_logmass < 0.0))
        throw invalid_input("excluded log-mass must be negative (e^{l0} < 1)");
    double shift = -log1mexp(excluded_logmass);
    std::map<std::string, double> out;
    for (const auto& [token, lp] : raw) out[token] = lp + shift;
    return out;
}

inline double adjusted_logprob(const PositionLogprobs& pos, const std::string& token) {
    auto it = pos.retained.find(token);
    if (it == pos.retained.end())
        throw coverage_error("token '" + token + "' missing from position log-probs");
    if (std::isinf(pos.excluded_logmass) && pos.excluded_logmass < 0) return it->second;
    return it->second - log1mexp(pos.excluded_logmass);
}

// Tokens made only of encoding-alphabet characters belong to the numeric
// scheme; everything else counts toward the excluded mass.
inline bool token_in_alphabet(const std::string& token, const std::string& alphabet) {
    if (token.empty()) return false;
    for (char c : token)
        if (alphabet.find(c) == std::string::npos) return false;
    return true;
}

inline DigitDistribution make_digit_distribution(const std::vector<ScoredToken>& scored,
                                                 const EncodingConfig& cfg) {
    const std::string alphabet = cfg.alphabet();
    DigitDistribution dist;
    dist.base = cfg.base;
    dist.precision = cfg.precision;
    dist.positions.reserve(scored.size());
    for (const auto& s : scored) {
        PositionLogprobs pos;
        pos.token = s.token;
        std::vector<double> excluded;
        for (const auto& [token, lp] : s.top) {
            if (token_in_alphabet(token, alphabet)) pos.retained[token] = lp;
            else excluded.push_back(lp);
        }
        if (token_in_alphabet(s.token, alphabet)) pos.retained[s.token] = s.logprob;
        else excluded.push_back(s.logprob);
        if (!excluded.empty()) pos.excluded_logmass = logsumexp(excluded);
        dist.positions.push_back(std::move(pos));
    }
    return dist;
}

// Autoregressive sequence log-likelihood: sum of adjusted per-position
// log-probs of the realized tokens.
inline double sequence_log_likelihood(const DigitDistribution& dist) {
    double total = 0.0;
    for (const auto& pos : dist.positions) total += adjusted_logprob(pos, pos.token);
    return total;
}

inline double sequence_log_likelihood(const std::string& target_text,
                                      const DigitDistribution& dist) {
    if (dist.text() != target_text)
        throw invalid_input("digit distribution does not cover the target text");
    return sequence_log_likelihood(dist);
}

// Log-likelihood of one value's occupied bin, with the pieces needed to turn
// it into a continuous density: log p(x) = log_pk + n log B + jacobian_logdet.
struct BinLikelihood {
    double log_pk = 0.0;
    int n = 0;
    int base = 10;
    double jacobian_logdet = 0.0;

    double log_density() const {
        return log_pk + static_cast<double>(n) * std::log(static_cast<double>(base)) +
               jacobian_logdet;
    }
};

/**
 * Average negative log continuous density per observed dimension, in the
 * original data space:
 *   NLL/D = -(1/T) * sum_t [ log p_k(t) + n log B - log scale_a ]
 * The token log-probs of signs and separators count toward log p_k; only the
 * n fractional digits contribute bin width. Missing test entries contribute
 * their token probability but no dimension.
 */
inline double continuous_nll_per_dim(const TimeSeries& series,
                                     const DigitDistribution& dist,
                                     const ScalerParams& scaler,
                                     const EncodingConfig& cfg) {
    if (dist.base != cfg.base || dist.precision != cfg.precision)
        throw invalid_input("digit distribution and encoding config disagree");
    std::size_t dims = series.present_count();
    if (dims == 0) throw empty_series_error("no observed dimensions to score");
    double loglik = sequence_log_likelihood(dist);
    double bin_bonus = static_cast<double>(cfg.precision) *
                       std::log(static_cast<double>(cfg.base));
    double jacobian = -std::log(scaler.scale_a);
    return -(loglik / static_cast<double>(dims) + bin_bonus + jacobian);
}

} // namespace numcast
