#include "numcast/decimal_ar.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "testutil.hpp"

using namespace numcast;

namespace {

DecimalARConfig ar_config(int order = 5, double smoothing = 0.1) {
    DecimalARConfig cfg;
    cfg.order = order;
    cfg.smoothing = smoothing;
    EncodingConfig enc;
    cfg.alphabet = enc.alphabet();
    return cfg;
}

EncodingConfig unspaced(int precision) {
    EncodingConfig cfg;
    cfg.precision = precision;
    cfg.spaced = false;
    cfg.time_sep = ",";
    return cfg;
}

} // namespace

TEST_CASE("memorizes a constant training string", "[decimal_ar]") {
    std::vector<std::string> corpus(200, "5 0 ,");
    auto model = train_decimal_ar(corpus, ar_config());
    auto start = model.conditional("");
    CHECK(start.at('5') >= 0.99);

    // Total log-prob of the training string is ~0 for a memorizing model.
    auto scored = model.logprobs("5 0 ,");
    double total = 0.0;
    for (const auto& t : scored) total += t.logprob;
    CHECK(total >= -1e-6);
}

TEST_CASE("empty training set yields uniform conditionals", "[decimal_ar]") {
    auto cfg = ar_config();
    auto model = train_decimal_ar({}, cfg);
    auto probs = model.conditional("12");
    double uniform = 1.0 / static_cast<double>(cfg.alphabet.size());
    REQUIRE(probs.size() == cfg.alphabet.size());
    for (const auto& [c, p] : probs) CHECK(p == Catch::Approx(uniform));
}

TEST_CASE("conditionals are exactly normalized", "[decimal_ar][property]") {
    auto gen = testutil::rng(17);
    EncodingConfig enc = unspaced(2);
    DecimalARConfig cfg = ar_config(4, 0.3);
    cfg.alphabet = enc.alphabet();

    std::vector<std::string> corpus;
    std::uniform_real_distribution<double> unit(0.0, 9.99);
    for (int i = 0; i < 100; ++i)
        corpus.push_back(encode_series(TimeSeries({unit(gen)}), enc));
    auto model = train_decimal_ar(corpus, cfg);

    std::vector<std::string> contexts{"", "1", "42,", "999999", ",,", "NaN"};
    for (const auto& ctx : contexts) {
        double total = 0.0;
        for (const auto& [c, p] : model.conditional(ctx)) {
            CHECK(p > 0.0);
            total += p;
        }
        CHECK(std::fabs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("training rejects characters outside the alphabet", "[decimal_ar]") {
    auto model = DecimalARModel(ar_config());
    CHECK_THROWS_AS(model.add_string("12x"), invalid_input);
}

TEST_CASE("temperature zero is the greedy continuation", "[decimal_ar]") {
    std::vector<std::string> corpus(50, "123,");
    auto model = train_decimal_ar(corpus, ar_config());
    DecimalARModel::SampleOptions greedy;
    greedy.max_chars = 4;
    greedy.temperature = 0.0;
    auto rng1 = testutil::rng(1), rng2 = testutil::rng(999);
    CHECK(model.sample("", greedy, rng1) == "123,");
    CHECK(model.sample("", greedy, rng2) == "123,");
}

TEST_CASE("sampling is reproducible under a fixed seed", "[decimal_ar]") {
    std::vector<std::string> corpus;
    for (int i = 0; i < 50; ++i) corpus.push_back(i % 2 ? "12,34," : "56,78,");
    auto model = train_decimal_ar(corpus, ar_config());
    DecimalARModel::SampleOptions opt;
    opt.max_chars = 12;
    auto a = testutil::rng(31337), b = testutil::rng(31337);
    CHECK(model.sample("", opt, a) == model.sample("", opt, b));
}

TEST_CASE("full-nucleus unit-temperature sampling follows the conditionals",
          "[decimal_ar][statistical]") {
    // Two-character model with known start probabilities; chi-square
    // goodness of fit on 10k single-character draws, df = 1, p > 0.001.
    DecimalARConfig cfg;
    cfg.order = 1;
    cfg.smoothing = 0.5;
    cfg.alphabet = "ab";
    std::vector<std::string> corpus;
    for (int i = 0; i < 30; ++i) corpus.push_back(i % 10 < 3 ? "a" : "b");
    auto model = train_decimal_ar(corpus, cfg);
    auto expected = model.conditional("");

    DecimalARModel::SampleOptions opt;
    opt.max_chars = 1;
    auto gen = testutil::rng(20240);
    const int n = 10000;
    std::map<char, int> observed{{'a', 0}, {'b', 0}};
    for (int i = 0; i < n; ++i) ++observed[model.sample("", opt, gen)[0]];

    double chi2 = 0.0;
    for (const auto& [c, p] : expected) {
        double e = p * n;
        double d = observed[c] - e;
        chi2 += d * d / e;
    }
    // Critical value of chi-square with 1 dof at p = 0.001.
    CHECK(chi2 < 10.828);
}

TEST_CASE("nucleus truncation restricts to the head of the distribution", "[decimal_ar]") {
    DecimalARConfig cfg;
    cfg.order = 1;
    cfg.smoothing = 0.01;
    cfg.alphabet = "abc";
    std::vector<std::string> corpus;
    for (int i = 0; i < 100; ++i) corpus.push_back(i < 60 ? "a" : (i < 95 ? "b" : "c"));
    auto model = train_decimal_ar(corpus, cfg);

    DecimalARModel::SampleOptions opt;
    opt.max_chars = 1;
    opt.top_p = 0.9;   // keeps 'a' and 'b', drops 'c'
    auto gen = testutil::rng(5);
    for (int i = 0; i < 500; ++i) {
        char c = model.sample("", opt, gen)[0];
        CHECK(c != 'c');
    }
}

TEST_CASE("logit bias confines sampling to the favored set", "[decimal_ar]") {
    auto model = train_decimal_ar({}, ar_config());   // uniform model
    std::map<char, double> bias;
    for (char c : std::string("0123456789")) bias[c] = 25.0;
    DecimalARModel::SampleOptions opt;
    opt.max_chars = 40;
    opt.logit_bias = &bias;
    auto gen = testutil::rng(8);
    auto text = model.sample("", opt, gen);
    for (char c : text) CHECK(std::isdigit(static_cast<unsigned char>(c)));
}

TEST_CASE("extends periodic structure", "[decimal_ar]") {
    EncodingConfig enc = unspaced(1);
    TimeSeries period({4.2, 8.6, 1.0});
    TimeSeries history;
    for (int rep = 0; rep < 50; ++rep)
        for (std::size_t i = 0; i < period.size(); ++i) history.push(period.values[i]);
    auto model = train_decimal_ar({encode_series(history, enc)}, ar_config());

    // Prompt "4.2, 8.6, 1.0, 4.2, 8.6" should lead to a 1.0.
    TimeSeries prompt_series = history.slice(0, 5);
    std::string prompt = encode_series(prompt_series, enc);
    DecimalARModel::SampleOptions greedy;
    greedy.max_chars = 3;
    greedy.temperature = 0.0;
    auto gen = testutil::rng(0);
    auto next = decode_series(model.sample(prompt, greedy, gen), enc);
    REQUIRE(next.valid_steps >= 1);
    CHECK(next.series.values[0] == Catch::Approx(1.0));
}

TEST_CASE("score distributions match direct sequence likelihood", "[decimal_ar]") {
    EncodingConfig enc = unspaced(2);
    DecimalARConfig cfg = ar_config();
    cfg.alphabet = enc.alphabet();
    std::vector<std::string> corpus;
    auto gen = testutil::rng(404);
    std::uniform_real_distribution<double> unit(0.0, 5.0);
    for (int i = 0; i < 100; ++i)
        corpus.push_back(encode_series(TimeSeries({unit(gen)}), enc));
    auto model = train_decimal_ar(corpus, cfg);

    std::string prompt = "123,";
    std::string target = "45,6,";
    auto scored = model.score(prompt, target);

    double direct = 0.0;
    for (const auto& t : scored) {
        direct += t.logprob;
        double mass = 0.0;
        for (const auto& [tok, lp] : t.top) mass += std::exp(lp);
        CHECK(std::fabs(mass - 1.0) <= 1e-12);
    }
    auto dist = make_digit_distribution(scored, enc);
    CHECK(sequence_log_likelihood(target, dist) == Catch::Approx(direct));
    // Full conditionals mean no excluded mass anywhere.
    for (const auto& pos : dist.positions)
        CHECK(std::isinf(pos.excluded_logmass));
}

TEST_CASE("implied density is near one on uniform data", "[decimal_ar][statistical]") {
    EncodingConfig enc = unspaced(2);
    enc.signed_values = false;
    DecimalARConfig cfg = ar_config(5, 0.1);
    cfg.alphabet = enc.alphabet();

    auto gen = testutil::rng(24);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::string> corpus;
    for (int i = 0; i < 200; ++i)
        corpus.push_back(encode_series(TimeSeries({unit(gen)}), enc));
    auto model = train_decimal_ar(corpus, cfg);

    auto bins = enumerate_value_distribution(model, enc, 1e-12);
    // Density averaged over a +-0.15 window around each of 10 probe points;
    // narrower windows mostly measure the 200-sample training noise.
    for (int d = 0; d < 10; ++d) {
        double probe = 0.05 + d * 0.1;
        double lo = std::max(0.0, probe - 0.15), hi = std::min(1.0, probe + 0.15);
        double mass = 0.0;
        for (const auto& b : bins)
            if (b.value >= lo && b.value < hi) mass += b.prob;
        double density = mass / (hi - lo);
        INFO("window [" << lo << ", " << hi << ")");
        CHECK(std::fabs(density - 1.0) <= 0.15);
    }
}

TEST_CASE("enumerated bin probabilities agree with value_logprob", "[decimal_ar]") {
    EncodingConfig enc = unspaced(2);
    enc.signed_values = false;
    DecimalARConfig cfg = ar_config();
    cfg.alphabet = enc.alphabet();
    std::vector<std::string> corpus(100, "42,");
    auto model = train_decimal_ar(corpus, cfg);

    auto bins = enumerate_value_distribution(model, enc, 1e-12);
    double total = 0.0;
    bool found = false;
    for (const auto& b : bins) {
        total += b.prob;
        if (std::fabs(b.value - 0.42) < 1e-12) {
            found = true;
            CHECK(std::log(b.prob) ==
                  Catch::Approx(value_logprob(model, 0.42, enc)).margin(1e-9));
            CHECK(b.prob > 0.99);
        }
    }
    REQUIRE(found);
    CHECK(total == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("model round-trips through the flat file format", "[decimal_ar]") {
    EncodingConfig enc;   // spaced: alphabet includes the space
    DecimalARConfig cfg = ar_config(3, 0.25);
    cfg.alphabet = enc.alphabet();
    std::vector<std::string> corpus;
    auto gen = testutil::rng(77);
    std::uniform_real_distribution<double> unit(-3.0, 3.0);
    for (int i = 0; i < 40; ++i)
        corpus.push_back(encode_series(TimeSeries({unit(gen), unit(gen)}), enc));
    auto model = train_decimal_ar(corpus, cfg);

    auto path = std::filesystem::temp_directory_path() / "numcast_model_test.dar";
    model.save(path.string());
    auto loaded = DecimalARModel::load(path.string());
    CHECK(loaded == model);
    CHECK(loaded.config().smoothing == Catch::Approx(0.25));
    for (const auto& ctx : {"", " 1 2 ,", " -"}) {
        auto a = model.conditional(ctx), b = loaded.conditional(ctx);
        for (const auto& [c, p] : a) CHECK(b.at(c) == Catch::Approx(p));
    }
    std::filesystem::remove(path);
}

TEST_CASE("config validation", "[decimal_ar]") {
    DecimalARConfig cfg = ar_config();
    cfg.order = 0;
    CHECK_THROWS_AS(cfg.validate(), invalid_config);
    cfg = ar_config();
    cfg.order = 17;
    CHECK_THROWS_AS(cfg.validate(), invalid_config);
    cfg = ar_config();
    cfg.smoothing = 0.0;
    CHECK_THROWS_AS(cfg.validate(), invalid_config);
    cfg = ar_config();
    cfg.alphabet = "aa";
    CHECK_THROWS_AS(cfg.validate(), invalid_config);
}
