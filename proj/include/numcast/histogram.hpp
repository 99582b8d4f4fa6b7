#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "numcast/errors.hpp"

namespace numcast {

// Fixed-resolution flat binning density estimator: the reference point for
// the Decimal AR Wasserstein comparison. Samples a bin proportionally to its
// training count, then uniformly within the bin.
class FlatHistogram {
public:
    FlatHistogram(const std::vector<double>& samples, int n_bins) {
        if (samples.empty()) throw invalid_input("histogram: no training samples");
        if (n_bins < 1) throw invalid_input("histogram: need at least one bin");
        lo_ = *std::min_element(samples.begin(), samples.end());
        hi_ = *std::max_element(samples.begin(), samples.end());
        if (hi_ <= lo_) hi_ = lo_ + 1e-9;
        counts_.assign(static_cast<std::size_t>(n_bins), 0);
        for (double x : samples) {
            auto b = static_cast<std::size_t>((x - lo_) / (hi_ - lo_) *
                                              static_cast<double>(n_bins));
            counts_[std::min(b, counts_.size() - 1)] += 1;
        }
        total_ = samples.size();
    }

    double sample(std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double u = unit(rng) * static_cast<double>(total_);
        std::size_t bin = counts_.size() - 1;
        double acc = 0.0;
        for (std::size_t b = 0; b < counts_.size(); ++b) {
            acc += static_cast<double>(counts_[b]);
            if (u < acc) {
                bin = b;
                break;
            }
        }
        double width = (hi_ - lo_) / static_cast<double>(counts_.size());
        return lo_ + (static_cast<double>(bin) + unit(rng)) * width;
    }

    std::vector<double> sample_many(std::size_t n, std::mt19937_64& rng) const {
        std::vector<double> out(n);
        for (auto& x : out) x = sample(rng);
        return out;
    }

private:
    double lo_ = 0.0, hi_ = 1.0;
    std::vector<std::size_t> counts_;
    std::size_t total_ = 0;
};

} // namespace numcast
