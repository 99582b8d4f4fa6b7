#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "numcast/common.hpp"
#include "numcast/errors.hpp"
#include "numcast/series.hpp"

namespace numcast {

// Deterministic and probabilistic forecast evaluation. Every metric skips
// steps where the truth is missing; per-step vectors keep the full horizon
// length with NaN at skipped steps.

inline double mae(const std::vector<double>& point, const TimeSeries& truth) {
    if (point.size() != truth.size())
        throw invalid_input("mae: length mismatch");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < point.size(); ++i) {
        if (truth.missing[i]) continue;
        sum += std::fabs(point[i] - truth.values[i]);
        ++n;
    }
    if (n == 0) throw empty_series_error("mae: no observed truth steps");
    return sum / static_cast<double>(n);
}

inline double mae(const std::vector<double>& point, const std::vector<double>& truth) {
    return mae(point, TimeSeries(truth));
}

struct CrpsResult {
    std::vector<double> per_step;   // NaN where truth is missing
    double mean = 0.0;
};

// CRPS of the empirical step CDF against the indicator at y, in closed form:
//   CRPS = E|X - y| - (1/2) E|X - X'|
// with the all-pairs 1/m^2 estimator for the second term, which equals the
// exact integral of (F_hat(z) - 1[z > y])^2 dz.
inline double crps_step(std::vector<double> samples, double y) {
    if (samples.empty()) throw invalid_input("crps: no samples");
    std::sort(samples.begin(), samples.end());
    const auto m = static_cast<double>(samples.size());
    double mean_abs_dev = 0.0;
    for (double s : samples) mean_abs_dev += std::fabs(s - y);
    mean_abs_dev /= m;

    // sum_{i,j} |s_i - s_j| = 2 * sum_j (j * s_j - prefix_{j})
    double pairwise = 0.0, prefix = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
        pairwise += static_cast<double>(j) * samples[j] - prefix;
        prefix += samples[j];
    }
    pairwise *= 2.0;
    return mean_abs_dev - pairwise / (2.0 * m * m);
}

inline CrpsResult crps(const std::vector<std::vector<double>>& samples,
                       const TimeSeries& truth) {
    if (samples.empty()) throw invalid_input("crps: empty sample matrix");
    const std::size_t horizon = truth.size();
    for (const auto& row : samples)
        if (row.size() != horizon) throw invalid_input("crps: sample row length mismatch");

    CrpsResult res;
    res.per_step.assign(horizon, std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0;
    std::size_t n = 0;
    std::vector<double> column(samples.size());
    for (std::size_t t = 0; t < horizon; ++t) {
        if (truth.missing[t]) continue;
        for (std::size_t i = 0; i < samples.size(); ++i) column[i] = samples[i][t];
        res.per_step[t] = crps_step(column, truth.values[t]);
        sum += res.per_step[t];
        ++n;
    }
    if (n == 0) throw empty_series_error("crps: no observed truth steps");
    res.mean = sum / static_cast<double>(n);
    return res;
}

// Exact 1-D Wasserstein-1 distance between equal-weight samples: the mean
// absolute difference of sorted samples. Unequal sizes are reduced by
// deterministic quantile thinning of the larger set.
inline double wasserstein1(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw invalid_input("wasserstein1: empty sample set");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a.size() != b.size()) {
        auto thin = [](const std::vector<double>& big, std::size_t m) {
            std::vector<double> out(m);
            for (std::size_t i = 0; i < m; ++i) {
                auto j = static_cast<std::size_t>(
                    (static_cast<double>(i) + 0.5) * static_cast<double>(big.size()) /
                    static_cast<double>(m));
                out[i] = big[std::min(j, big.size() - 1)];
            }
            return out;
        };
        if (a.size() > b.size()) a = thin(a, b.size());
        else b = thin(b, a.size());
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::fabs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

// MAE normalized by the naive predictor that repeats the last observed value.
inline double normalized_mae(double model_mae, const std::vector<double>& train_tail,
                             const TimeSeries& truth) {
    double last = std::numeric_limits<double>::quiet_NaN();
    for (auto it = train_tail.rbegin(); it != train_tail.rend(); ++it) {
        if (std::isfinite(*it)) {
            last = *it;
            break;
        }
    }
    if (!std::isfinite(last))
        throw invalid_input("normalized_mae: no observed value in train tail");
    double naive = mae(std::vector<double>(truth.size(), last), truth);
    if (naive == 0.0)
        throw error("degenerate-naive", "naive baseline MAE is zero");
    return model_mae / naive;
}

struct Aggregate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t count = 0;
};

// Arithmetic mean with its standard error, for cross-dataset reporting.
inline Aggregate aggregate_mean(const std::vector<double>& xs) {
    if (xs.empty()) throw invalid_input("aggregate over empty vector");
    Aggregate a;
    a.count = xs.size();
    for (double x : xs) a.mean += x;
    a.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - a.mean) * (x - a.mean);
        double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        a.stderr_ = sd / std::sqrt(static_cast<double>(xs.size()));
    }
    return a;
}

struct MetricReport {
    double mae = 0.0;
    double crps_mean = 0.0;
    std::optional<double> nll_per_dim;
    std::optional<double> normalized_mae;
    std::vector<double> per_step_abs_err;
    std::vector<double> per_step_crps;

    std::string to_text() const {
        std::ostringstream out;
        out.precision(17);
        out << "schema = numcast-metrics/1\n";
        out << "mae = " << mae << "\n";
        out << "crps_mean = " << crps_mean << "\n";
        if (nll_per_dim) out << "nll_per_dim = " << *nll_per_dim << "\n";
        if (normalized_mae) out << "normalized_mae = " << *normalized_mae << "\n";
        return out.str();
    }
};

inline MetricReport evaluate_point_forecast(const std::vector<std::vector<double>>& samples,
                                            const std::vector<double>& point,
                                            const TimeSeries& truth) {
    MetricReport report;
    report.mae = mae(point, truth);
    auto c = crps(samples, truth);
    report.crps_mean = c.mean;
    report.per_step_crps = std::move(c.per_step);
    report.per_step_abs_err.assign(truth.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = 0; t < truth.size(); ++t)
        if (!truth.missing[t])
            report.per_step_abs_err[t] = std::fabs(point[t] - truth.values[t]);
    return report;
}

} // namespace numcast
