#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wiser/synth.hpp"

using namespace wiser;

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Gumbel scores back to pivots: y = 1 - exp(-x).
double to_pivot(double score) { return -std::expm1(-score); }

}  // namespace

TEST_CASE("pure null Gumbel stream has mean 1") {
    StreamSpec spec;
    spec.n = 5000;
    spec.seed = 3;
    const Stream s = generate_stream(spec);
    REQUIRE(s.pivots.size() == spec.n);
    CHECK(s.pivots.mu0() == 1.0);
    CHECK(std::abs(mean_of(s.pivots.scores) - 1.0) <= 3.0 / std::sqrt(5000.0));
    CHECK(std::count(s.decoded.begin(), s.decoded.end(), 1) == 0);
}

TEST_CASE("fully watermarked Gumbel stream clears the separation bound") {
    StreamSpec spec;
    spec.n = 5000;
    spec.true_segments = SegmentSet{{1, 5000}};
    spec.seed = 4;
    const Stream s = generate_stream(spec);
    const double sigma = sd_of(s.pivots.scores);
    CHECK(mean_of(s.pivots.scores) >= 1.5 - 3.0 * sigma / std::sqrt(5000.0));
}

TEST_CASE("streams replay exactly from the seed") {
    StreamSpec spec;
    spec.n = 300;
    spec.true_segments = SegmentSet{{50, 120}, {200, 260}};
    for (Scheme scheme : {Scheme::gumbel, Scheme::inverse_transform, Scheme::red_green}) {
        spec.scheme.scheme = scheme;
        const Stream a = generate_stream(spec);
        const Stream b = generate_stream(spec);
        CHECK(a.tokens == b.tokens);
        CHECK(a.keys == b.keys);
        CHECK(a.pivots.scores == b.pivots.scores);
        spec.seed += 1;
        CHECK(generate_stream(spec).tokens != a.tokens);
    }
}

TEST_CASE("decoder positions are exactly the planted union") {
    StreamSpec spec;
    spec.n = 400;
    spec.true_segments = SegmentSet{{10, 19}, {100, 200}, {390, 400}};
    const Stream s = generate_stream(spec);
    CHECK(static_cast<std::size_t>(std::count(s.decoded.begin(), s.decoded.end(), 1)) ==
          spec.true_segments.total_length());
    for (std::size_t t = 1; t <= spec.n; ++t) {
        bool inside = false;
        for (const auto& iv : spec.true_segments) inside = inside || iv.contains(t);
        CHECK(static_cast<bool>(s.decoded[t - 1]) == inside);
    }
}

TEST_CASE("verifier reconstructs the generator's keys") {
    StreamSpec spec;
    spec.n = 1000;
    spec.true_segments = SegmentSet{{200, 700}};
    for (Scheme scheme : {Scheme::gumbel, Scheme::inverse_transform, Scheme::red_green}) {
        spec.scheme.scheme = scheme;
        const Stream s = generate_stream(spec);
        CHECK(reconstruct_keys(s.tokens, spec.seed) == s.keys);
        CHECK(score_tokens(s.tokens, spec.seed, spec.scheme).scores == s.pivots.scores);
    }
}

TEST_CASE("hash sensitivity") {
    SUBCASE("editing the previous token changes every Gumbel uniform") {
        const auto a = expand_gumbel_key(derive_key(5, 99), 100);
        const auto b = expand_gumbel_key(derive_key(6, 99), 100);
        for (std::size_t w = 0; w < 100; ++w) CHECK(a.uniforms[w] != b.uniforms[w]);
    }
    SUBCASE("different master seeds disagree at every position") {
        StreamSpec spec;
        spec.n = 1000;
        const Stream s = generate_stream(spec);
        const auto k1 = reconstruct_keys(s.tokens, 1);
        const auto k2 = reconstruct_keys(s.tokens, 2);
        for (std::size_t t = 0; t < spec.n; ++t) CHECK(k1[t] != k2[t]);
    }
    SUBCASE("the sentinel context keys position 1") {
        const std::vector<Token> tokens{7, 8};
        CHECK(reconstruct_keys(tokens, 3).front() == derive_key(kSentinelToken, 3));
    }
}

TEST_CASE("edits") {
    const std::vector<Token> tokens{1, 2, 3, 4, 5};
    CHECK(apply_edits(tokens, {}) == tokens);

    const std::vector<Edit> del{{Edit::Kind::remove, 2, 0}};
    CHECK(apply_edits(tokens, del) == std::vector<Token>{1, 3, 4, 5});

    const std::vector<Edit> ins{{Edit::Kind::insert, 1, 9}, {Edit::Kind::insert, 7, 8}};
    CHECK(apply_edits(tokens, ins) == std::vector<Token>{9, 1, 2, 3, 4, 5, 8});

    const std::vector<Edit> sub{{Edit::Kind::substitute, 5, 7}};
    CHECK(apply_edits(tokens, sub) == std::vector<Token>{1, 2, 3, 4, 7});

    const std::vector<Edit> bad_sub{{Edit::Kind::substitute, 6, 7}};
    CHECK_THROWS_AS(apply_edits(tokens, bad_sub), std::out_of_range);
    const std::vector<Edit> bad_ins{{Edit::Kind::insert, 7, 7}};
    CHECK_THROWS_AS(apply_edits(tokens, bad_ins), std::out_of_range);
    const std::vector<Edit> bad_del{{Edit::Kind::remove, 0, 0}};
    CHECK_THROWS_AS(apply_edits(tokens, bad_del), std::out_of_range);
}

TEST_CASE("a substitution nulls its own position and the next one only") {
    const std::size_t streams = 3000;
    const std::size_t t = 10;
    std::vector<double> at_t, after, two_after;
    Rng rng(77);
    for (std::size_t r = 0; r < streams; ++r) {
        StreamSpec spec;
        spec.n = 20;
        spec.true_segments = SegmentSet{{1, 20}};
        spec.seed = 1000 + r;
        const Stream s = generate_stream(spec);
        const Token replacement = static_cast<Token>(1 + rng() % spec.scheme.vocab_size);
        const std::vector<Edit> edit{{Edit::Kind::substitute, t, replacement}};
        const auto edited = apply_edits(s.tokens, edit);
        const auto scores = score_tokens(edited, spec.seed, spec.scheme).scores;
        at_t.push_back(to_pivot(scores[t - 1]));
        after.push_back(to_pivot(scores[t]));
        two_after.push_back(scores[t + 1]);
        CHECK(scores[t + 1] == s.pivots.scores[t + 1]);
    }
    const auto uniform = [](double y) { return y; };
    CHECK(oracle::ks_distance(at_t, uniform) < oracle::ks_critical_01(streams));
    CHECK(oracle::ks_distance(after, uniform) < oracle::ks_critical_01(streams));
    CHECK(mean_of(two_after) > 1.0 + 0.5 - 3.0 * sd_of(two_after) / std::sqrt(double(streams)));
}

TEST_CASE("pooled null and watermarked positions across 200 streams") {
    std::vector<double> null_pivots, marked_scores;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        StreamSpec spec;
        spec.n = 500;
        spec.true_segments = SegmentSet{{100, 200}, {325, 400}};
        spec.seed = seed;
        const Stream s = generate_stream(spec);
        for (std::size_t t = 0; t < spec.n; ++t) {
            if (s.decoded[t]) {
                marked_scores.push_back(s.pivots.scores[t]);
            } else {
                null_pivots.push_back(to_pivot(s.pivots.scores[t]));
            }
        }
    }
    CHECK(oracle::ks_distance(null_pivots, [](double y) { return y; }) <
          oracle::ks_critical_01(null_pivots.size()));
    const double se = sd_of(marked_scores) / std::sqrt(double(marked_scores.size()));
    CHECK(mean_of(marked_scores) > 1.0 + gumbel_d_lower_bound(0.5) - 3.0 * se);
}

TEST_CASE("null streams of the other schemes centre on their null means") {
    for (Scheme scheme : {Scheme::inverse_transform, Scheme::red_green}) {
        StreamSpec spec;
        spec.n = 20000;
        spec.scheme.scheme = scheme;
        const Stream s = generate_stream(spec);
        const double sigma = sd_of(s.pivots.scores);
        CHECK(std::abs(mean_of(s.pivots.scores) - s.pivots.mu0()) <=
              4.0 * sigma / std::sqrt(20000.0));
        spec.true_segments = SegmentSet{{1, spec.n}};
        CHECK(mean_of(generate_stream(spec).pivots.scores) > s.pivots.mu0() + 0.02);
    }
}

TEST_CASE("NTP models respect the cap") {
    Rng rng(5);
    for (auto kind : {NtpModel::Kind::dirichlet, NtpModel::Kind::zipf}) {
        for (double delta : {0.1, 0.5, 0.9}) {
            NtpModel model;
            model.kind = kind;
            model.delta_cap = delta;
            model.concentration = 0.05;
            model.exponent = 3.0;
            for (std::size_t t = 1; t <= 200; ++t) {
                const NtpVector p = model.sample(t, 100, rng);
                CHECK(p.within_cap(delta));
            }
        }
    }
    NtpModel fixed;
    fixed.kind = NtpModel::Kind::fixed;
    fixed.fixed = {NtpVector({0.5, 0.5}), NtpVector({0.25, 0.75})};
    fixed.delta_cap = 0.2;
    CHECK_NOTHROW(fixed.validate(2));
    CHECK(fixed.sample(1, 2, rng).prob(2) == 0.5);
    CHECK(fixed.sample(2, 2, rng).prob(2) == 0.75);
    CHECK(fixed.sample(3, 2, rng).prob(2) == 0.5);
    fixed.delta_cap = 0.3;
    CHECK_THROWS_AS(fixed.validate(2), std::invalid_argument);
    CHECK_THROWS_AS(fixed.validate(3), std::invalid_argument);
}

TEST_CASE("capping redistributes mass in proportion") {
    const NtpVector p = cap_probabilities({8, 1, 1}, 0.5);
    CHECK(p.prob(1) == doctest::Approx(0.5));
    CHECK(p.prob(2) == doctest::Approx(0.25));
    CHECK(p.prob(3) == doctest::Approx(0.25));
    const NtpVector q = cap_probabilities({10, 9, 1, 0}, 0.4);
    CHECK(q.max_prob() <= 0.4 + 1e-12);
    CHECK(q.prob(4) == 0.0);
    CHECK_THROWS_AS(cap_probabilities({1, 1}, 0.4), std::invalid_argument);
}

TEST_CASE("invalid stream specs") {
    StreamSpec spec;
    spec.n = 100;
    spec.true_segments = SegmentSet{{50, 101}};
    CHECK_THROWS_AS(generate_stream(spec), std::out_of_range);
    spec.true_segments = SegmentSet{};
    spec.ntp.delta_cap = 1.0;
    CHECK_THROWS_AS(generate_stream(spec), std::invalid_argument);
    spec.ntp.delta_cap = 0.5;
    spec.scheme.vocab_size = 1;
    CHECK_THROWS_AS(generate_stream(spec), std::invalid_argument);
    spec.scheme.vocab_size = 100;
    spec.n = 0;
    CHECK_THROWS_AS(generate_stream(spec), std::invalid_argument);
}
