#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "numcast/common.hpp"
#include "numcast/errors.hpp"

namespace numcast {

/**
 * Ordered numeric observations with a missingness mask and optional
 * timestamp metadata. `values` and `missing` always have equal length;
 * timestamps are either empty or the same length and are never used in
 * any computation.
 */
struct TimeSeries {
    std::vector<double> values;
    std::vector<bool> missing;
    std::vector<std::string> timestamps;

    TimeSeries() = default;

    explicit TimeSeries(std::vector<double> vals)
        : values(std::move(vals)), missing(values.size(), false) {}

    TimeSeries(std::vector<double> vals, std::vector<bool> mask)
        : values(std::move(vals)), missing(std::move(mask)) {}

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }

    bool is_missing(std::size_t i) const { return missing[i]; }

    void push(double v, bool miss = false) {
        values.push_back(v);
        missing.push_back(miss);
    }

    void push_missing() { push(std::numeric_limits<double>::quiet_NaN(), true); }

    // Entries that are non-finite (NaN/inf) are recorded as missing.
    static TimeSeries from_values(const std::vector<double>& vals) {
        TimeSeries ts;
        ts.values.reserve(vals.size());
        ts.missing.reserve(vals.size());
        for (double v : vals) {
            if (std::isfinite(v)) ts.push(v);
            else ts.push_missing();
        }
        return ts;
    }

    std::vector<double> present_values() const {
        std::vector<double> out;
        out.reserve(values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!missing[i]) out.push_back(values[i]);
        return out;
    }

    std::size_t present_count() const {
        std::size_t n = 0;
        for (bool m : missing) n += !m;
        return n;
    }

    TimeSeries slice(std::size_t begin, std::size_t end) const {
        TimeSeries out;
        for (std::size_t i = begin; i < end && i < size(); ++i) {
            out.push(values[i], missing[i]);
            if (!timestamps.empty()) out.timestamps.push_back(timestamps[i]);
        }
        return out;
    }

    void validate() const {
        if (values.size() != missing.size())
            throw invalid_input("TimeSeries: values and missing mask differ in length");
        if (!timestamps.empty() && timestamps.size() != values.size())
            throw invalid_input("TimeSeries: timestamps length mismatch");
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!missing[i] && !std::isfinite(values[i]))
                throw invalid_input("TimeSeries: non-missing entry is not finite");
    }
};

// ---------------------------------------------------------------------------
// CSV ingestion. Accepted layouts:
//   value                    one value per line
//   timestamp,value          leading non-numeric column kept as metadata
//   [timestamp,]v1,v2,...    multivariate; each value column becomes a series
// An optional header row names the columns. Empty fields and the literal
// "NaN" mark missing observations.
// ---------------------------------------------------------------------------

struct NamedSeries {
    std::string name;
    TimeSeries series;
};

namespace detail {

inline bool parse_double(std::string_view field, double& out) {
    std::string s(trim(field));
    if (s.empty()) return false;
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) return false;
        out = v;
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

inline bool is_missing_field(std::string_view field) {
    auto t = trim(field);
    return t.empty() || t == "NaN";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    auto fields = split(std::string_view(line), ",");
    for (auto& f : fields) f = std::string(trim(f));
    return fields;
}

} // namespace detail

inline std::vector<NamedSeries> read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open input file: " + path);

    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        rows.push_back(detail::split_csv_line(line));
    }
    if (rows.empty()) throw invalid_input("empty CSV: " + path);

    std::size_t ncols = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != ncols)
            throw invalid_input("ragged CSV row in " + path);

    // Header row: any field that is neither numeric nor a missing marker.
    bool has_header = false;
    for (const auto& f : rows[0]) {
        double v;
        if (!detail::parse_double(f, v) && !detail::is_missing_field(f)) {
            has_header = true;
            break;
        }
    }
    std::vector<std::string> names(ncols);
    std::size_t first_data = has_header ? 1 : 0;
    if (has_header) names = rows[0];
    if (first_data >= rows.size()) throw invalid_input("CSV has a header but no data: " + path);

    // First column is a timestamp column if it is non-numeric in the data
    // rows, or if its header says so.
    bool ts_col = false;
    if (ncols > 1) {
        double v;
        if (!detail::parse_double(rows[first_data][0], v) &&
            !detail::is_missing_field(rows[first_data][0]))
            ts_col = true;
        if (has_header) {
            std::string h = names[0];
            for (auto& c : h) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            if (h == "timestamp" || h == "time" || h == "date" || h == "t" || h == "index")
                ts_col = true;
        }
    }

    std::size_t value_begin = ts_col ? 1 : 0;
    std::vector<NamedSeries> out;
    for (std::size_t c = value_begin; c < ncols; ++c) {
        NamedSeries ns;
        ns.name = has_header && !names[c].empty()
                      ? names[c]
                      : (ncols - value_begin == 1 ? "value" : "value" + std::to_string(c - value_begin));
        out.push_back(std::move(ns));
    }

    for (std::size_t r = first_data; r < rows.size(); ++r) {
        for (std::size_t c = value_begin; c < ncols; ++c) {
            auto& ts = out[c - value_begin].series;
            const std::string& f = rows[r][c];
            double v;
            if (detail::is_missing_field(f)) {
                ts.push_missing();
            } else if (detail::parse_double(f, v)) {
                if (std::isfinite(v)) ts.push(v);
                else ts.push_missing();
            } else {
                throw invalid_input("non-numeric value field '" + f + "' in " + path);
            }
            if (ts_col) ts.timestamps.push_back(rows[r][0]);
        }
    }
    return out;
}

inline void write_series_csv(const std::string& path, const TimeSeries& ts,
                             const std::string& name = "value") {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open output file: " + path);
    bool with_ts = !ts.timestamps.empty();
    if (with_ts) out << "timestamp,";
    out << name << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (with_ts) out << ts.timestamps[i] << ",";
        if (ts.missing[i]) out << "NaN";
        else out << ts.values[i];
        out << "\n";
    }
    if (!out) throw io_error("failed writing " + path);
}

inline void write_matrix_csv(const std::string& path,
                             const std::vector<std::vector<double>>& rows,
                             const std::vector<std::string>& col_names = {}) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open output file: " + path);
    out.precision(17);
    if (!col_names.empty()) {
        for (std::size_t c = 0; c < col_names.size(); ++c)
            out << (c ? "," : "") << col_names[c];
        out << "\n";
    }
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "");
            if (std::isnan(row[c])) out << "NaN";
            else out << row[c];
        }
        out << "\n";
    }
    if (!out) throw io_error("failed writing " + path);
}

} // namespace numcast
