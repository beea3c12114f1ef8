#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "psr/affect_stats.hpp"
#include "psr/error.hpp"
#include "psr/random.hpp"
#include "support/oracle.hpp"

using namespace psr;
using namespace psr::stats;

namespace {

WeightedEmotionSet make(std::initializer_list<std::pair<Emotion, double>> items) {
    WeightedEmotionSet s;
    for (auto [e, w] : items) s.add(e, w);
    return s;
}

std::vector<oracle::Weighted> to_oracle(const WeightedEmotionSet& s) {
    std::vector<oracle::Weighted> out;
    for (const auto& e : s.entries()) out.push_back({{e.point.v, e.point.a, e.point.d}, e.weight});
    return out;
}

void check_point(const VadPoint& p, double v, double a, double d, double tol = 1e-12) {
    CHECK(std::abs(p.v - v) <= tol);
    CHECK(std::abs(p.a - a) <= tol);
    CHECK(std::abs(p.d - d) <= tol);
}

} // namespace

TEST_CASE("centroid examples") {
    check_point(weighted_centroid(make({{Emotion::joy, 1}})), 0.92, 0.72, 0.70, 0);
    check_point(weighted_centroid(make({{Emotion::joy, 1}, {Emotion::sadness, 1}})), 0.52, 0.535, 0.475);
    check_point(weighted_centroid(make({{Emotion::joy, 3}, {Emotion::sadness, 1}})), 0.72, 0.6275, 0.5875);
}

TEST_CASE("covariance examples") {
    CHECK(weighted_covariance(make({{Emotion::joy, 5}})) == Mat3::Zero());
    CHECK(weighted_covariance(make({{Emotion::fear, 1}, {Emotion::fear, 4}})) == Mat3::Zero());

    const Mat3 s = weighted_covariance(make({{Emotion::joy, 1}, {Emotion::sadness, 1}}));
    const double d[3] = {0.80, 0.37, 0.45};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(s(i, j) - 0.25 * d[i] * d[j]) <= 1e-12);
}

TEST_CASE("regularize") {
    CHECK(regularize(Mat3::Zero(), 1e-6) == Mat3::Identity() * 1e-6);
    const Mat3 s = weighted_covariance(make({{Emotion::joy, 1}, {Emotion::sadness, 1}}));
    CHECK(regularize(s, 0.0) == s);

    const Mat3 r = regularize(s, 1e-6);
    oracle::M3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = r(i, j);
    // Two zero eigenvalues of the rank-1 matrix lift to eps; allow for
    // rounding in the closed-form eigenvalue.
    CHECK(oracle::min_eigenvalue(m) >= 1e-6 - 1e-12);
    CHECK_THROWS_AS(regularize(s, -1.0), Error);
}

TEST_CASE("summarize") {
    const auto s = summarize(make({{Emotion::neutral, 2}}));
    CHECK(s.centroid == kNeutralPoint);
    CHECK(s.covariance == Mat3::Zero());
    CHECK(s.total_weight == 2.0);
    CHECK(s.count == 1);

    check_point(summarize(make({{Emotion::joy, 1}, {Emotion::sadness, 1}})).centroid, 0.52, 0.535, 0.475);

    try {
        summarize(WeightedEmotionSet{});
        FAIL("expected EmptySet");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptySet);
    }
}

TEST_CASE("invalid weights are rejected") {
    WeightedEmotionSet s;
    CHECK_THROWS_AS(s.add(Emotion::joy, 0.0), Error);
    CHECK_THROWS_AS(s.add(Emotion::joy, -1.0), Error);
    CHECK_THROWS_AS(s.add(Emotion::joy, std::numeric_limits<double>::infinity()), Error);
    CHECK_THROWS_AS(s.add(Emotion::joy, std::nan("")), Error);
    CHECK(s.empty());
}

TEST_CASE("from_scores sums per label in taxonomy order") {
    const std::vector<EmotionScore> scores{
        {Emotion::sadness, 0.5}, {Emotion::joy, 0.25}, {Emotion::sadness, 0.25}};
    const auto s = WeightedEmotionSet::from_scores(scores);
    REQUIRE(s.size() == 2);
    CHECK(s.entries()[0].label == Emotion::joy);
    CHECK(s.entries()[0].weight == 0.25);
    CHECK(s.entries()[1].label == Emotion::sadness);
    CHECK(s.entries()[1].weight == 0.75);
    CHECK(s.distinct_labels() == 2);
}

TEST_CASE("random sets agree with the naive reference and stay PSD") {
    Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        WeightedEmotionSet s;
        const int n = 1 + static_cast<int>(rng.below(6));
        for (int i = 0; i < n; ++i)
            s.add(all_emotions()[rng.below(kEmotionCount)], 0.01 + rng.uniform());

        const auto ref = to_oracle(s);
        const auto mu = oracle::centroid(ref);
        const auto sigma = oracle::covariance(ref);
        const auto c = weighted_centroid(s);
        const Mat3 cov = weighted_covariance(s);
        check_point(c, mu[0], mu[1], mu[2]);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(std::abs(cov(i, j) - sigma[i][j]) <= 1e-12);

        oracle::M3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] = cov(i, j);
        CHECK(oracle::min_eigenvalue(m) >= -1e-12);
    }
}

TEST_CASE("weight scaling and reordering leave the summary unchanged") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<Emotion, double>> items;
        const int n = 1 + static_cast<int>(rng.below(6));
        for (int i = 0; i < n; ++i)
            items.emplace_back(all_emotions()[rng.below(kEmotionCount)], 0.05 + rng.uniform());

        WeightedEmotionSet base, scaled, shuffled;
        const double c = 0.001 + 100 * rng.uniform();
        for (auto [e, w] : items) {
            base.add(e, w);
            scaled.add(e, w * c);
        }
        auto perm = items;
        for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
        for (auto [e, w] : perm) shuffled.add(e, w);

        const auto a = summarize(base), b = summarize(scaled), p = summarize(shuffled);
        check_point(b.centroid, a.centroid.v, a.centroid.a, a.centroid.d);
        CHECK((b.covariance - a.covariance).cwiseAbs().maxCoeff() <= 1e-12);
        check_point(p.centroid, a.centroid.v, a.centroid.a, a.centroid.d, 1e-15);
        CHECK((p.covariance - a.covariance).cwiseAbs().maxCoeff() <= 1e-15);
    }
}
