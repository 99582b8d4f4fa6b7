#include "numcast/scaler.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <random>

#include "testutil.hpp"

using namespace numcast;

TEST_CASE("fit uses the linear-interpolated percentile", "[scaler]") {
    std::vector<double> vals(100);
    std::iota(vals.begin(), vals.end(), 1.0);   // 1..100
    ScalerConfig cfg{0.9, 0.0, false};
    auto p = fit_scaler(TimeSeries(vals), cfg);
    CHECK(p.offset_b == Catch::Approx(1.0));
    CHECK(p.scale_a == Catch::Approx(89.1));
    CHECK(p.scale_a ==
          Catch::Approx(testutil::reference_quantile({vals.begin(), vals.end()}, 0.9) - 1.0));
}

TEST_CASE("constant series hits the scale floor", "[scaler]") {
    auto p = fit_scaler(TimeSeries({5.0, 5.0, 5.0}), ScalerConfig{0.99, 0.0, false});
    CHECK(p.offset_b == Catch::Approx(5.0));
    CHECK(p.scale_a == kEpsilonScale);
}

TEST_CASE("basic scaler uses absolute values", "[scaler]") {
    auto p = fit_scaler(TimeSeries({2.0, 4.0}), ScalerConfig{1.0, 0.0, true});
    CHECK(p.offset_b == 0.0);
    CHECK(p.scale_a == Catch::Approx(4.0));

    auto tiny = fit_scaler(TimeSeries({1e-6, -2e-6}), ScalerConfig{1.0, 0.0, true});
    CHECK(tiny.scale_a == kEpsilonScale);
}

TEST_CASE("fit ignores missing values and rejects all-missing", "[scaler]") {
    TimeSeries ts({1.0, 0.0, 3.0}, {false, true, false});
    auto p = fit_scaler(ts, ScalerConfig{1.0, 0.0, false});
    CHECK(p.offset_b == Catch::Approx(1.0));
    CHECK(p.scale_a == Catch::Approx(2.0));

    TimeSeries gone;
    gone.push_missing();
    CHECK_THROWS_AS(fit_scaler(gone, ScalerConfig{}), empty_series_error);
}

TEST_CASE("transform arithmetic and missing passthrough", "[scaler]") {
    ScalerParams p;
    p.offset_b = 1.0;
    p.scale_a = 5.0;
    TimeSeries ts({6.0, 0.0}, {false, true});
    auto out = transform(ts, p);
    CHECK(out.values[0] == Catch::Approx(1.0));
    CHECK(out.missing[1]);
}

TEST_CASE("inverse_transform is the exact inverse", "[scaler][property]") {
    auto gen = testutil::rng(99);
    std::uniform_real_distribution<double> unit(-100.0, 100.0);
    std::uniform_real_distribution<double> alpha_dist(0.1, 1.0);
    std::uniform_real_distribution<double> beta_dist(0.0, 0.5);
    for (int iter = 0; iter < 300; ++iter) {
        TimeSeries ts;
        for (int i = 0; i < 30; ++i) ts.push(unit(gen));
        ScalerConfig cfg{alpha_dist(gen), beta_dist(gen), iter % 3 == 0};
        auto p = fit_scaler(ts, cfg);
        REQUIRE(p.scale_a >= kEpsilonScale);
        auto rt = inverse_transform(transform(ts, p), p);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            double tol = 1e-12 * std::max(1.0, std::fabs(ts.values[i]));
            CHECK(std::fabs(rt.values[i] - ts.values[i]) <= tol);
        }
    }
}

TEST_CASE("alpha percentile of the transformed series is 1", "[scaler][property]") {
    auto gen = testutil::rng(1234);
    std::uniform_real_distribution<double> unit(0.0, 1000.0);
    std::uniform_real_distribution<double> alpha_dist(0.3, 0.99);
    for (int iter = 0; iter < 200; ++iter) {
        TimeSeries ts;
        for (int i = 0; i < 50; ++i) ts.push(unit(gen));
        double alpha = alpha_dist(gen);
        auto p = fit_scaler(ts, ScalerConfig{alpha, 0.0, false});
        auto scaled = transform(ts, p);
        double q = testutil::reference_quantile(scaled.present_values(), alpha);
        CHECK(std::fabs(q - 1.0) <= 1e-9);
    }
}

TEST_CASE("transform preserves ordering", "[scaler][property]") {
    auto gen = testutil::rng(5);
    std::uniform_real_distribution<double> unit(-10.0, 10.0);
    TimeSeries ts;
    for (int i = 0; i < 40; ++i) ts.push(unit(gen));
    auto p = fit_scaler(ts, ScalerConfig{0.9, 0.15, false});
    auto scaled = transform(ts, p);
    for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t j = 0; j < ts.size(); ++j)
            if (ts.values[i] < ts.values[j])
                CHECK(scaled.values[i] < scaled.values[j]);
}

TEST_CASE("scaler config validation", "[scaler]") {
    CHECK_THROWS_AS(fit_scaler(TimeSeries({1.0}), ScalerConfig{0.0, 0.0, false}),
                    invalid_config);
    CHECK_THROWS_AS(fit_scaler(TimeSeries({1.0}), ScalerConfig{0.5, -0.1, false}),
                    invalid_config);
}
