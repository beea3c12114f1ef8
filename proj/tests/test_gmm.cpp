#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "psr/error.hpp"
#include "psr/gmm.hpp"
#include "psr/random.hpp"
#include "support/oracle.hpp"

using namespace psr;
using namespace psr::gmm;

namespace {

oracle::P3 p3(const Vec3& x) { return {x[0], x[1], x[2]}; }
oracle::M3 m3(const Mat3& m) {
    oracle::M3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = m(i, j);
    return r;
}

Mat3 random_spd(Rng& rng) {
    Mat3 a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = rng.normal() * 0.3;
    return a * a.transpose() + Mat3::Identity() * (0.01 + 0.1 * rng.uniform());
}

GmmModel random_model(Rng& rng, std::size_t k) {
    std::vector<GaussianComponent> comps(k);
    double total = 0;
    for (auto& c : comps) {
        c.weight = 0.05 + rng.uniform();
        total += c.weight;
        c.mean = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
        c.covariance = random_spd(rng);
    }
    for (auto& c : comps) c.weight /= total;
    return GmmModel(std::move(comps));
}

GmmModel two_cluster_truth() {
    return GmmModel({{0.5, Vec3::Constant(0.2), Mat3::Identity() * 0.02},
                     {0.5, Vec3::Constant(0.8), Mat3::Identity() * 0.02}});
}

const double kNormalizer = std::pow(2 * std::numbers::pi, -1.5);

} // namespace

TEST_CASE("density examples") {
    const Vec3 x(0.3, 0.4, 0.5);
    const GmmModel one({{1.0, x, Mat3::Identity()}});
    CHECK(density(one, x) == doctest::Approx(kNormalizer).epsilon(1e-14));

    const GmmModel twin({{0.5, x, Mat3::Identity()}, {0.5, x, Mat3::Identity()}});
    const Vec3 y(0.9, 0.1, 0.0);
    CHECK(density(twin, y) == doctest::Approx(density(one, y)).epsilon(1e-14));
}

TEST_CASE("posterior and predict examples") {
    const GmmModel one({{1.0, Vec3::Zero(), Mat3::Identity()}});
    CHECK(posterior(one, Vec3(1, 2, 3)) == std::vector<double>{1.0});
    CHECK(predict(one, Vec3(1, 2, 3)) == 0);

    const GmmModel twin({{0.5, Vec3::Zero(), Mat3::Identity()}, {0.5, Vec3::Zero(), Mat3::Identity()}});
    const auto pt = posterior(twin, Vec3(0.4, 0.1, 0.2));
    CHECK(pt[0] == doctest::Approx(0.5));
    CHECK(pt[1] == doctest::Approx(0.5));
    CHECK(predict(twin, Vec3(0.4, 0.1, 0.2)) == 0);

    const Vec3 mu1 = Vec3::Zero(), mu2(10, 0, 0);
    const GmmModel far({{0.5, mu1, Mat3::Identity()}, {0.5, mu2, Mat3::Identity()}});
    CHECK(posterior(far, mu1)[0] > 0.999);
    CHECK(predict(far, mu2) == 1);
}

TEST_CASE("log_likelihood") {
    const Vec3 x(0.2, 0.2, 0.2);
    const GmmModel one({{1.0, x, Mat3::Identity()}});
    const std::vector<Vec3> pts{x};
    const std::vector<double> w{1.0};
    CHECK(log_likelihood(one, pts, w) == doctest::Approx(-2.7568155996140185).epsilon(1e-14));
    CHECK_THROWS_AS(log_likelihood(one, {}, {}), Error);
    const std::vector<double> w2{1.0, 2.0};
    CHECK_THROWS_AS(log_likelihood(one, pts, w2), Error);
}

TEST_CASE("model construction is validated") {
    CHECK_THROWS_AS(GmmModel({}), Error);
    CHECK_THROWS_AS(GmmModel({{0.7, Vec3::Zero(), Mat3::Identity()}}), Error);
    Mat3 bad = Mat3::Identity();
    bad(0, 0) = -1;
    CHECK_THROWS_AS(GmmModel({{1.0, Vec3::Zero(), bad}}), Error);
}

TEST_CASE("log-space evaluation matches the textbook formula") {
    Rng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        const auto model = random_model(rng, 1 + rng.below(4));
        const Vec3 x(rng.uniform(), rng.uniform(), rng.uniform());
        double ref = 0;
        std::vector<double> joint;
        for (const auto& c : model.components()) {
            joint.push_back(c.weight * oracle::gaussian(p3(x), p3(c.mean), m3(c.covariance)));
            ref += joint.back();
        }
        CHECK(density(model, x) == doctest::Approx(ref).epsilon(1e-9));
        const auto post = posterior(model, x);
        for (std::size_t c = 0; c < post.size(); ++c) CHECK(std::abs(post[c] - joint[c] / ref) <= 1e-9);
    }
}

TEST_CASE("posterior is a probability vector") {
    Rng rng(22);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto model = random_model(rng, 1 + rng.below(5));
        const Vec3 x(4 * rng.normal(), 4 * rng.normal(), 4 * rng.normal());
        const auto post = posterior(model, x);
        double sum = 0;
        for (double p : post) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("predict is invariant under prior rescaling") {
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const auto model = random_model(rng, 3);
        const double c = 0.1 + 10 * rng.uniform();
        std::vector<GaussianComponent> comps(model.components().begin(), model.components().end());
        double total = 0;
        for (auto& comp : comps) total += comp.weight * c;
        for (auto& comp : comps) comp.weight = comp.weight * c / total;
        const GmmModel rescaled(comps);
        const Vec3 x(rng.uniform(), rng.uniform(), rng.uniform());
        CHECK(predict(model, x) == predict(rescaled, x));
    }
}

TEST_CASE("parallel and reference E-step kernels agree") {
    Rng rng(24);
    const auto model = random_model(rng, 3);
    std::vector<Vec3> pts(2000);
    for (auto& p : pts) p = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
    const std::size_t k = model.k();
    std::vector<double> j1(pts.size() * k), j2(pts.size() * k), d1(pts.size()), d2(pts.size());
    e_step_parallel(pts, model.evals(), j1, d1);
    e_step_serial_reference(pts, model.components(), j2, d2);
    for (std::size_t i = 0; i < j1.size(); ++i) CHECK(std::abs(j1[i] - j2[i]) <= 1e-9);
    for (std::size_t i = 0; i < d1.size(); ++i) CHECK(std::abs(d1[i] - d2[i]) <= 1e-9);
}

TEST_CASE("log_sum_exp survives extreme inputs") {
    const std::vector<double> big{1000.0, 1000.0};
    CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
    const std::vector<double> tiny{-1000.0, -1001.0};
    CHECK(std::isfinite(log_sum_exp(tiny)));
}

TEST_CASE("EM log-likelihood never decreases") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(100 + seed);
        const auto truth = random_model(rng, 3);
        const auto pts = sample(truth, 200, seed);
        std::vector<double> w(pts.size());
        for (auto& x : w) x = 0.1 + rng.uniform();
        EmConfig cfg;
        cfg.k = 1 + static_cast<int>(seed % 3);
        cfg.seed = seed;
        const auto fit = fit_em(pts, w, cfg);
        for (const auto& trace : fit.restarts) {
            CHECK(trace.rescues.empty());
            for (std::size_t i = 1; i < trace.log_likelihood.size(); ++i)
                CHECK(trace.log_likelihood[i] >= trace.log_likelihood[i - 1] - 1e-9);
        }
    }
}

TEST_CASE("two-cluster recovery and K selection") {
    const auto truth = two_cluster_truth();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto pts = sample(truth, 500, seed);
        const std::vector<double> w(pts.size(), 1.0);
        EmConfig cfg;
        cfg.k = 2;
        cfg.seed = seed;
        const auto fit = fit_em(pts, w, cfg);
        REQUIRE(fit.model.k() == 2);
        const Vec3 a = fit.model.components()[0].mean, b = fit.model.components()[1].mean;
        const Vec3 lo = Vec3::Constant(0.2), hi = Vec3::Constant(0.8);
        const double straight = std::max((a - lo).norm(), (b - hi).norm());
        const double swapped = std::max((a - hi).norm(), (b - lo).norm());
        CHECK(std::min(straight, swapped) <= 0.05);

        EmConfig autocfg;
        autocfg.seed = seed;
        CHECK(select_k(pts, w, 3, autocfg) == 2);
    }
}

TEST_CASE("select_k on one tight cluster and on a single point") {
    const GmmModel tight({{1.0, Vec3(0.6, 0.4, 0.5), Mat3::Identity() * 0.001}});
    const auto pts = sample(tight, 300, 9);
    const std::vector<double> w(pts.size(), 1.0);
    CHECK(select_k(pts, w, 3, EmConfig{}) == 1);

    const std::vector<Vec3> single{Vec3(0.1, 0.2, 0.3)};
    const std::vector<double> w1{1.0};
    CHECK(select_k(single, w1, 3, EmConfig{}) == 1);
}

TEST_CASE("degenerate inputs") {
    const std::vector<Vec3> same(6, Vec3(0.3, 0.3, 0.9));
    const std::vector<double> w(6, 1.0);
    EmConfig cfg;
    cfg.k = 1;
    const auto fit = fit_em(same, w, cfg);
    CHECK((fit.model.components()[0].mean - same[0]).norm() <= 1e-15);
    CHECK((fit.model.components()[0].covariance - Mat3::Identity() * cfg.covariance_floor)
              .cwiseAbs()
              .maxCoeff() <= 1e-15);
    CHECK_FALSE(fit.degenerate);

    cfg.k = 3;
    const auto flagged = fit_em(same, w, cfg);
    CHECK(flagged.degenerate);
    CHECK(flagged.model.k() == 1);

    const std::vector<Vec3> two{Vec3::Zero(), Vec3::Ones()};
    const std::vector<double> w2(2, 1.0);
    try {
        fit_em(two, w2, cfg);
        FAIL("expected TooFewPoints");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooFewPoints);
    }
}

TEST_CASE("config validation") {
    EmConfig cfg;
    cfg.max_iterations = 0;
    CHECK_THROWS_AS(validate(cfg), Error);
    cfg = {};
    cfg.tolerance = 0;
    CHECK_THROWS_AS(validate(cfg), Error);
    cfg = {};
    cfg.restarts = 0;
    CHECK_THROWS_AS(validate(cfg), Error);
    CHECK_NOTHROW(validate(EmConfig{}));
}

TEST_CASE("fit_em is deterministic") {
    const auto pts = sample(two_cluster_truth(), 400, 3);
    const std::vector<double> w(pts.size(), 1.0);
    EmConfig cfg;
    cfg.seed = 17;
    const auto a = fit_em(pts, w, cfg), b = fit_em(pts, w, cfg);
    CHECK(to_json(a.model).dump() == to_json(b.model).dump());
    CHECK(a.log_likelihood == b.log_likelihood);
}

TEST_CASE("sampling") {
    const auto truth = two_cluster_truth();
    CHECK(sample(truth, 0, 1).empty());
    CHECK(sample(truth, 50, 4) == sample(truth, 50, 4));

    const auto draws = sample(truth, 10000, 5);
    Vec3 mean = Vec3::Zero();
    for (const auto& x : draws) mean += x;
    mean /= static_cast<double>(draws.size());
    CHECK((mean - Vec3::Constant(0.5)).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("density integrates to one") {
    // Midpoint rule over a box covering ~6 sigma of both components.
    const GmmModel model({{0.3, Vec3(0.2, 0.3, 0.4), Mat3::Identity() * 0.01},
                          {0.7, Vec3(0.6, 0.5, 0.4), Mat3::Identity() * 0.02}});
    const int n = 60;
    const double lo = -0.5, hi = 1.5, h = (hi - lo) / n;
    double total = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                total += density(model, Vec3(lo + (i + 0.5) * h, lo + (j + 0.5) * h, lo + (k + 0.5) * h));
    CHECK(total * h * h * h == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("model json round-trip") {
    Rng rng(31);
    const auto model = random_model(rng, 2);
    const auto j = to_json(model);
    CHECK(j["format"] == "psr-gmm");
    const auto back = model_from_json(j);
    CHECK(to_json(back).dump() == j.dump());
    auto broken = j;
    broken["version"] = 99;
    CHECK_THROWS_AS(model_from_json(broken), Error);
}

TEST_CASE("bic penalty") {
    CHECK(bic(-10.0, 1, 100.0) == doctest::Approx(20.0 + 9 * std::log(100.0)));
    CHECK(bic(-10.0, 2, 100.0) == doctest::Approx(20.0 + 19 * std::log(100.0)));
}
