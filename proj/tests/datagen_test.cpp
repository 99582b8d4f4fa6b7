#include "numcast/datagen.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "testutil.hpp"

using namespace numcast;

namespace {

SyntheticSpec clean_spec(const std::string& name, int n = 200) {
    SyntheticSpec spec;
    spec.name = name;
    spec.n_points = n;
    spec.t_jitter_sd = 0.0;
    spec.noise_sd = 0.0;
    return spec;
}

} // namespace

TEST_CASE("noise-free generators are exact transcriptions", "[datagen]") {
    auto linear = generate(clean_spec("linear"));
    CHECK(linear.values.front() == Catch::Approx(-0.2).margin(1e-12));   // 0.3 + 0.5*(-1)
    CHECK(linear.values.back() == Catch::Approx(0.8).margin(1e-12));     // 0.3 + 0.5*(+1)

    // Spot values at t = 0 (index 100 of linspace(-1, 1, 201)).
    auto probe = [](const std::string& name) {
        auto ts = generate(clean_spec(name, 201));
        return ts.values[100];
    };
    CHECK(probe("sine") == Catch::Approx(std::sin(3.0)).margin(1e-12));
    CHECK(probe("sigmoid") == Catch::Approx(0.5).margin(1e-12));
    CHECK(probe("square") == Catch::Approx(3.0 * 0.36).margin(1e-12));
    CHECK(probe("exp") == Catch::Approx(1.0).margin(1e-12));
    CHECK(probe("beat") == Catch::Approx(0.0).margin(1e-12));
    CHECK(probe("gaussian_wave") ==
          Catch::Approx(std::exp(-5.0 * 0.36) * std::sin(-120.0)).margin(1e-12));
    CHECK(probe("x_times_sine") == Catch::Approx(4.0 * std::sin(14.0)).margin(1e-12));
    CHECK(probe("linear_cos") == Catch::Approx(0.3 + 0.2 * std::cos(3.0)).margin(1e-12));
    CHECK(probe("composite_linear_plus_cosine") == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("sine stays within its range and square is nonnegative", "[datagen]") {
    for (double v : generate(clean_spec("sine")).values) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
    for (double v : generate(clean_spec("square")).values) CHECK(v >= 0.0);
}

TEST_CASE("generation is deterministic under a fixed seed", "[datagen]") {
    SyntheticSpec spec;
    spec.name = "linear_cos";
    spec.noise_sd = 0.05;
    spec.seed = 321;
    auto a = generate(spec), b = generate(spec);
    CHECK(a.values == b.values);
    spec.seed = 322;
    CHECK(generate(spec).values != a.values);
}

TEST_CASE("log at the left edge becomes a missing entry", "[datagen]") {
    auto ts = generate(clean_spec("log"));
    CHECK(ts.missing.front());          // log(0) is not finite
    CHECK_FALSE(ts.missing.back());
    ts.validate();
}

TEST_CASE("unknown names are rejected", "[datagen]") {
    CHECK_THROWS_AS(generate(clean_spec("mystery")), invalid_input);
    CHECK(synthetic_names().size() == 12);
}

TEST_CASE("corrupt_missing masks interior points at rate p", "[datagen][statistical]") {
    auto ts = generate(clean_spec("sine", 2000));
    CHECK(corrupt_missing(ts, 0.0, 1).present_count() == ts.size());

    double p = 0.3;
    std::size_t masked = 0, interior = ts.size() - 2;
    auto corrupted = corrupt_missing(ts, p, 99);
    CHECK_FALSE(corrupted.missing.front());
    CHECK_FALSE(corrupted.missing.back());
    for (std::size_t i = 1; i + 1 < corrupted.size(); ++i) masked += corrupted.missing[i];
    double sigma = std::sqrt(p * (1 - p) * double(interior));
    CHECK(std::fabs(double(masked) - p * double(interior)) <= 3.0 * sigma);

    CHECK_THROWS_AS(corrupt_missing(ts, 1.0, 1), invalid_input);
    CHECK_THROWS_AS(corrupt_missing(ts, -0.1, 1), invalid_input);
}

TEST_CASE("interpolate_linear fills gaps", "[datagen]") {
    TimeSeries ts({0.0, 0.0, 2.0}, {false, true, false});
    auto filled = interpolate_linear(ts);
    CHECK(filled.values == std::vector<double>{0.0, 1.0, 2.0});
    CHECK(filled.present_count() == 3);

    TimeSeries two_gap({0.0, 0.0, 0.0, 3.0}, {false, true, true, false});
    auto f2 = interpolate_linear(two_gap);
    CHECK(f2.values == std::vector<double>{0.0, 1.0, 2.0, 3.0});

    // No missing entries: identity; and idempotence.
    auto ident = interpolate_linear(f2);
    CHECK(ident.values == f2.values);

    TimeSeries bad({0.0, 1.0}, {true, false});
    CHECK_THROWS_AS(interpolate_linear(bad), invalid_input);
}

TEST_CASE("corrupt then interpolate restores affine series", "[datagen][property]") {
    TimeSeries affine;
    for (int i = 0; i < 100; ++i) affine.push(2.0 + 0.25 * i);
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        auto repaired = interpolate_linear(corrupt_missing(affine, 0.4, seed));
        for (std::size_t i = 0; i < affine.size(); ++i)
            CHECK(repaired.values[i] == Catch::Approx(affine.values[i]).margin(1e-12));
    }
}
