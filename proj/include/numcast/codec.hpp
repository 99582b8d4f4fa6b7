#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "numcast/common.hpp"
#include "numcast/errors.hpp"
#include "numcast/series.hpp"

namespace numcast {

/**
 * Wire format for numeric series. A value is rounded half-away-from-zero to
 * `precision` fractional digits, the decimal point is dropped, and the digits
 * of the resulting integer are emitted without leading zeros (zero itself is
 * the single digit "0"). In spaced mode every symbol of a value is prefixed
 * with digit_sep so tokenizers see one digit at a time. Values are each
 * followed by time_sep; missing observations emit missing_token verbatim.
 *
 * With precision 2, spaced:  [0.123, 1.23, 12.3]  ->  " 1 2 , 1 2 3 , 1 2 3 0 ,"
 */
struct EncodingConfig {
    int base = 10;                    // digit radix; only 10 is implemented
    int precision = 2;                // fractional digits kept (n)
    bool spaced = true;               // separate every symbol with digit_sep
    std::string time_sep = " ,";      // between time steps
    std::string digit_sep = " ";      // between symbols of one value (spaced mode)
    bool signed_values = true;        // emit "-" for negatives
    std::string missing_token = "NaN";
    int max_digits = 12;              // cap on digits per value

    void validate() const {
        if (base != 10)
            throw invalid_config("only base 10 encoding is implemented");
        if (precision < 0)
            throw invalid_config("precision must be >= 0");
        if (time_sep.empty())
            throw invalid_config("time_sep must be nonempty");
        if (time_sep.find_first_of("0123456789") != std::string::npos)
            throw invalid_config("time_sep must not contain digits");
        if (missing_token.empty() ||
            missing_token.find_first_of("0123456789") != std::string::npos)
            throw invalid_config("missing_token must be nonempty and digit-free");
        if (missing_token == time_sep)
            throw invalid_config("missing_token must differ from time_sep");
        // max_digits <= 15 keeps decoded integers exactly representable in a double.
        if (max_digits < 1 || max_digits > 15)
            throw invalid_config("max_digits must be in [1, 15]");
        if (precision > max_digits)
            throw invalid_config("precision exceeds max_digits");
    }

    // Every character a well-formed encoding can contain.
    std::string alphabet() const {
        std::string chars = "0123456789";
        if (signed_values) chars += '-';
        auto add = [&chars](const std::string& s) {
            for (char c : s)
                if (chars.find(c) == std::string::npos) chars += c;
        };
        add(time_sep);
        if (spaced) add(digit_sep);
        add(missing_token);
        return chars;
    }
};

namespace detail {

// Decompose the shortest round-trip decimal representation of x into sign,
// mantissa digits and a power-of-ten exponent: |x| = mantissa * 10^exp10.
struct DecimalRepr {
    bool negative = false;
    std::string mantissa;   // digits only, no dot
    int exp10 = 0;
};

inline DecimalRepr shortest_decimal(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    std::string_view s(buf, static_cast<std::size_t>(res.ptr - buf));

    DecimalRepr out;
    if (!s.empty() && s.front() == '-') {
        out.negative = true;
        s.remove_prefix(1);
    }
    int exp_part = 0;
    if (auto e = s.find('e'); e != std::string_view::npos) {
        exp_part = std::stoi(std::string(s.substr(e + 1)));
        s = s.substr(0, e);
    }
    int frac_len = 0;
    for (char c : s) {
        if (c == '.') {
            frac_len = static_cast<int>(s.size() - out.mantissa.size() - 1);
            continue;
        }
        out.mantissa += c;
    }
    out.exp10 = exp_part - frac_len;
    // Normalize away leading zeros ("0.05" parses to mantissa "005").
    auto nz = out.mantissa.find_first_not_of('0');
    if (nz == std::string::npos) {
        out.mantissa = "0";
        out.exp10 = 0;
        out.negative = false;
    } else {
        out.mantissa.erase(0, nz);
    }
    return out;
}

inline void increment_digit_string(std::string& digits) {
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (*it != '9') {
            ++*it;
            return;
        }
        *it = '0';
    }
    digits.insert(digits.begin(), '1');
}

// Digits of round-half-away-from-zero(|x| * 10^precision), as a string.
inline std::string rounded_magnitude_digits(double x, int precision, int max_digits) {
    DecimalRepr r = shortest_decimal(x);
    if (r.mantissa == "0") return "0";

    int shift = r.exp10 + precision;
    std::string digits;
    if (shift >= 0) {
        if (static_cast<int>(r.mantissa.size()) + shift > max_digits)
            throw overflow_error("encoded value needs more than max_digits digits");
        digits = r.mantissa + std::string(static_cast<std::size_t>(shift), '0');
    } else {
        std::size_t drop = static_cast<std::size_t>(-shift);
        if (drop >= r.mantissa.size()) {
            // Everything is fractional; rounds to 0 or 1 on the target grid.
            bool up = drop == r.mantissa.size() && r.mantissa[0] >= '5';
            digits = up ? "1" : "0";
        } else {
            digits = r.mantissa.substr(0, r.mantissa.size() - drop);
            if (r.mantissa[r.mantissa.size() - drop] >= '5')
                increment_digit_string(digits);
        }
    }
    auto nz = digits.find_first_not_of('0');
    digits = nz == std::string::npos ? "0" : digits.substr(nz);
    if (static_cast<int>(digits.size()) > max_digits)
        throw overflow_error("encoded value needs more than max_digits digits");
    return digits;
}

} // namespace detail

inline std::string encode_value(double x, const EncodingConfig& cfg) {
    cfg.validate();
    if (!std::isfinite(x)) throw invalid_input("encode_value: value is not finite");

    std::string digits = detail::rounded_magnitude_digits(x, cfg.precision, cfg.max_digits);
    bool negative = std::signbit(x) && digits != "0";
    if (negative && !cfg.signed_values)
        throw invalid_input("negative value under an unsigned encoding");

    const std::string& sep = cfg.spaced ? cfg.digit_sep : std::string();
    std::string out;
    if (negative) out += '-';
    for (char d : digits) {
        if (!out.empty()) out += sep;
        out += d;
    }
    return out;
}

// Encoded series: each value prefixed with digit_sep in spaced mode and
// followed by time_sep, so a prompt always ends on a value boundary. Trailing
// whitespace of the whole string is dropped.
inline std::string encode_series(const TimeSeries& ts, const EncodingConfig& cfg) {
    cfg.validate();
    ts.validate();
    std::string out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (cfg.spaced) out += cfg.digit_sep;
        out += ts.missing[i] ? cfg.missing_token : encode_value(ts.values[i], cfg);
        out += cfg.time_sep;
    }
    return std::string(detail::rtrim(out));
}

struct DecodeResult {
    TimeSeries series;        // one entry per recovered step
    std::size_t valid_steps = 0;
    bool clean = true;        // false if parsing stopped at an invalid chunk
};

namespace detail {

// One chunk between time separators -> value, or missing, or invalid.
enum class ChunkKind { value, missing, invalid };

inline ChunkKind parse_chunk(std::string_view chunk, const EncodingConfig& cfg, double& out) {
    std::string body(trim(chunk));
    if (body == cfg.missing_token) return ChunkKind::missing;
    if (cfg.spaced && !cfg.digit_sep.empty())
        body = replace_all(body, cfg.digit_sep, "");
    if (body.empty()) return ChunkKind::invalid;

    bool negative = false;
    std::string_view digits(body);
    if (digits.front() == '-') {
        negative = true;
        digits.remove_prefix(1);
    }
    if (digits.empty() || digits.size() > static_cast<std::size_t>(cfg.max_digits))
        return ChunkKind::invalid;
    std::int64_t magnitude = 0;
    for (char c : digits) {
        if (c < '0' || c > '9') return ChunkKind::invalid;
        magnitude = magnitude * 10 + (c - '0');
    }
    double scale = std::pow(10.0, cfg.precision);
    out = (negative ? -1.0 : 1.0) * static_cast<double>(magnitude) / scale;
    return ChunkKind::value;
}

} // namespace detail

/**
 * Greedy inverse of encode_series over arbitrary model output: chunks are
 * consumed until the first one that is neither a number nor missing_token.
 * Never throws; the caller checks valid_steps to decide whether to retry.
 */
inline DecodeResult decode_series(std::string_view text, const EncodingConfig& cfg) {
    cfg.validate();
    DecodeResult res;
    auto chunks = detail::split(text, cfg.time_sep);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        std::string_view chunk = chunks[i];
        if (detail::trim(chunk).empty()) {
            if (i + 1 == chunks.size()) break;   // trailing separator
            res.clean = false;
            break;
        }
        double v = 0.0;
        switch (detail::parse_chunk(chunk, cfg, v)) {
            case detail::ChunkKind::value:
                res.series.push(v);
                ++res.valid_steps;
                break;
            case detail::ChunkKind::missing:
                res.series.push_missing();
                ++res.valid_steps;
                break;
            case detail::ChunkKind::invalid:
                res.clean = false;
                return res;
        }
    }
    return res;
}

} // namespace numcast
