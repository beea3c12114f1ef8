#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "psr/error.hpp"
#include "psr/profile.hpp"
#include "psr/random.hpp"
#include "support/oracle.hpp"

using namespace psr;

namespace {

constexpr double kTau = 0.35;

void check_point(const VadPoint& p, double v, double a, double d, double tol = 1e-12) {
    CHECK(std::abs(p.v - v) <= tol);
    CHECK(std::abs(p.a - a) <= tol);
    CHECK(std::abs(p.d - d) <= tol);
}

InteractionContext context(std::string comment, std::string post, std::vector<EmotionScore> c,
                           std::vector<EmotionScore> s) {
    return {std::move(comment), "me", std::move(post), "them", std::move(c), std::move(s), std::nullopt};
}

BehaviorType t(BehaviorKind k) { return {k, std::nullopt}; }
BehaviorType t5(Resolution r) { return {BehaviorKind::Type5, r}; }

// Written out from the documented procedure, indexed by (PS low, PR low, SR low).
const std::map<std::tuple<bool, bool, bool>, BehaviorType>& decision_table() {
    static const std::map<std::tuple<bool, bool, bool>, BehaviorType> table{
        {{true, true, true}, t(BehaviorKind::Type1)},
        {{true, true, false}, t(BehaviorKind::Type2)},
        {{true, false, true}, t(BehaviorKind::Type3)},
        {{true, false, false}, t(BehaviorKind::Type4)},
        {{false, true, false}, t5(Resolution::PersonaAligned)},
        {{false, false, true}, t5(Resolution::StimulusAligned)},
        {{false, true, true}, t5(Resolution::BothAligned)},
        {{false, false, false}, t(BehaviorKind::Type4)},
    };
    return table;
}

} // namespace

TEST_CASE("persona examples") {
    const std::vector<EmotionScore> curiosity{{Emotion::curiosity, 0.9}};
    check_point(build_persona("a", curiosity)->summary.centroid, 0.62, 0.45, 0.52, 0);
    CHECK_FALSE(build_persona("a", {}).has_value());
    const std::vector<EmotionScore> mixed{{Emotion::joy, 0.6}, {Emotion::optimism, 0.6}};
    check_point(build_persona("a", mixed)->summary.centroid, 0.88, 0.62, 0.71);
}

TEST_CASE("stimulus examples") {
    const std::vector<InteractionContext> one{
        context("c1", "p1", {{Emotion::neutral, 1}}, {{Emotion::anger, 0.8}})};
    check_point(build_stimulus("me", one)->summary.centroid, 0.15, 0.82, 0.72, 0);
    CHECK_FALSE(build_stimulus("me", {}).has_value());

    const std::vector<InteractionContext> two{
        context("c1", "p1", {{Emotion::neutral, 1}}, {{Emotion::joy, 1}}),
        context("c2", "p2", {{Emotion::neutral, 1}}, {{Emotion::sadness, 1}})};
    const auto s = build_stimulus("me", two);
    check_point(s->summary.centroid, 0.52, 0.535, 0.475);
    CHECK(s->post_ids == std::vector<std::string>{"p1", "p2"});
}

TEST_CASE("a post answered twice counts once in the stimulus") {
    const std::vector<InteractionContext> ctx{
        context("c1", "p1", {{Emotion::neutral, 1}}, {{Emotion::joy, 1}}),
        context("c2", "p1", {{Emotion::neutral, 1}}, {{Emotion::joy, 1}}),
        context("c3", "p2", {{Emotion::neutral, 1}}, {{Emotion::sadness, 1}})};
    const auto s = build_stimulus("me", ctx);
    check_point(s->summary.centroid, 0.52, 0.535, 0.475);
    CHECK(s->summary.total_weight == 2.0);
}

TEST_CASE("own-post stimulus") {
    const std::vector<PostEmotions> posts{{"p1", {{Emotion::anger, 0.5}}}};
    check_point(build_stimulus_own("me", posts)->summary.centroid, 0.15, 0.82, 0.72, 0);
    CHECK_FALSE(build_stimulus_own("me", {}).has_value());
}

TEST_CASE("reaction examples") {
    std::vector<InteractionContext> neutral;
    for (int i = 0; i < 3; ++i)
        neutral.push_back(context("c" + std::to_string(i), "p", {{Emotion::neutral, 1}}, {{Emotion::joy, 1}}));
    const auto r = build_reaction("me", neutral, gmm::EmConfig{});
    check_point(r->summary.centroid, 0.5, 0.5, 0.5, 0);
    CHECK_FALSE(r->mixture.has_value());
    CHECK(r->comment_ids.size() == 3);

    std::vector<InteractionContext> split;
    for (int i = 0; i < 10; ++i)
        split.push_back(context("c" + std::to_string(i), "p",
                                {{i < 5 ? Emotion::joy : Emotion::annoyance, 1.0}}, {{Emotion::joy, 1}}));
    const auto r2 = build_reaction("me", split, gmm::EmConfig{});
    REQUIRE(r2->mixture.has_value());
    REQUIRE(r2->mixture->k() == 2);
    std::vector<Vec3> means;
    for (const auto& c : r2->mixture->components()) means.push_back(c.mean);
    std::sort(means.begin(), means.end(), [](const Vec3& a, const Vec3& b) { return a[0] < b[0]; });
    CHECK((means[0] - Vec3(0.22, 0.65, 0.58)).norm() <= 0.05);
    CHECK((means[1] - Vec3(0.92, 0.72, 0.70)).norm() <= 0.05);

    CHECK_FALSE(build_reaction("me", {}, gmm::EmConfig{}).has_value());
}

TEST_CASE("distance examples") {
    const VadPoint joy = vad_of(Emotion::joy), sad = vad_of(Emotion::sadness);
    const auto same = psr_distances(joy, joy, joy);
    CHECK(same == PsrDistances{0.0, 0.0, 0.0});

    const double js = oracle::dist(oracle::point(oracle::row("Joy")), oracle::point(oracle::row("Sadness")));
    const auto d = psr_distances(joy, sad, joy);
    CHECK(*d.d_pr == 0.0);
    CHECK(*d.d_sr == doctest::Approx(js).epsilon(1e-15));
    CHECK(*d.d_ps == doctest::Approx(js).epsilon(1e-15));

    const auto partial = psr_distances(std::nullopt, sad, joy);
    CHECK_FALSE(partial.d_pr);
    CHECK_FALSE(partial.d_ps);
    CHECK(partial.d_sr.has_value());
}

TEST_CASE("classify examples") {
    const TypologyConfig cfg;
    CHECK(cfg.tau == kTau);
    CHECK(classify({0.0, 0.0, 0.0}, cfg) == t(BehaviorKind::Type1));
    CHECK(classify({0.0, 0.9896, 0.9896}, cfg) == t5(Resolution::PersonaAligned));
    CHECK(classify({std::nullopt, 0.1, 0.1}, cfg) == t(BehaviorKind::Unknown));
}

TEST_CASE("joy persona facing anger, reacting with anger") {
    const auto a = classify_agent("x", vad_of(Emotion::joy), vad_of(Emotion::anger), vad_of(Emotion::anger),
                                  TypologyConfig{});
    const double ja = oracle::dist(oracle::point(oracle::row("Joy")), oracle::point(oracle::row("Anger")));
    CHECK(ja == doctest::Approx(0.7767238891652554).epsilon(1e-12));
    CHECK(*a.distances.d_ps == doctest::Approx(ja).epsilon(1e-15));
    CHECK(*a.distances.d_pr == doctest::Approx(ja).epsilon(1e-15));
    CHECK(*a.distances.d_sr == 0.0);
    CHECK(a.type == t5(Resolution::StimulusAligned));
}

TEST_CASE("exhaustive decision table over low/high/absent patterns") {
    // -1 absent, 0 low, 1 high
    const TypologyConfig cfg;
    auto value = [](int s) -> std::optional<double> {
        if (s < 0) return std::nullopt;
        return s == 0 ? 0.1 : 0.9;
    };
    int checked = 0;
    for (int pr = -1; pr <= 1; ++pr)
        for (int sr = -1; sr <= 1; ++sr)
            for (int ps = -1; ps <= 1; ++ps) {
                const PsrDistances d{value(pr), value(sr), value(ps)};
                const auto got = classify(d, cfg);
                if (pr < 0 || sr < 0 || ps < 0) {
                    CHECK(got == t(BehaviorKind::Unknown));
                } else {
                    CHECK(got == decision_table().at({ps == 0, pr == 0, sr == 0}));
                }
                ++checked;
            }
    CHECK(checked == 27);
}

TEST_CASE("threshold boundary: distance equal to tau is high, zero is always low") {
    TypologyConfig cfg;
    CHECK_FALSE(is_low(cfg.tau, cfg.tau));
    CHECK(is_low(std::nextafter(cfg.tau, 0.0), cfg.tau));
    CHECK(is_low(0.0, 0.0));
    CHECK_FALSE(is_low(1e-300, 0.0));

    cfg.tau = 0.0;
    CHECK(classify({0.0, 0.0, 0.0}, cfg) == t(BehaviorKind::Type1));
    CHECK(classify({0.2, 0.3, 0.4}, cfg) == t(BehaviorKind::Type4));
    CHECK(classify({0.0, 0.3, 0.3}, cfg) == t5(Resolution::PersonaAligned));
}

TEST_CASE("Unknown exactly when a component is missing") {
    Rng rng(41);
    const std::optional<VadPoint> none;
    for (int i = 0; i < 1000; ++i) {
        auto maybe = [&]() -> std::optional<VadPoint> {
            if (rng.uniform() < 0.3) return none;
            return VadPoint{rng.uniform(), rng.uniform(), rng.uniform()};
        };
        const auto p = maybe(), s = maybe(), r = maybe();
        const auto a = classify_agent("x", p, s, r, TypologyConfig{});
        const bool missing = !p || !s || !r;
        CHECK((a.type.kind == BehaviorKind::Unknown) == missing);
        for (auto dist : {a.distances.d_pr, a.distances.d_sr, a.distances.d_ps})
            if (dist) CHECK((*dist >= 0.0 && *dist <= std::sqrt(3.0)));
    }
}

TEST_CASE("Type1 is preserved as tau grows") {
    Rng rng(42);
    for (int i = 0; i < 1000; ++i) {
        const PsrDistances d{rng.uniform() * 0.6, rng.uniform() * 0.6, rng.uniform() * 0.6};
        TypologyConfig lo, hi;
        lo.tau = rng.uniform() * 0.6;
        hi.tau = lo.tau + rng.uniform() * (std::sqrt(3.0) - lo.tau) * 0.999;
        if (classify(d, lo).kind == BehaviorKind::Type1) CHECK(classify(d, hi).kind == BehaviorKind::Type1);
    }
}

TEST_CASE("classification does not depend on context order") {
    Rng rng(43);
    std::vector<InteractionContext> ctx;
    for (int i = 0; i < 8; ++i) {
        const Emotion c = all_emotions()[rng.below(kEmotionCount)];
        const Emotion s = all_emotions()[rng.below(kEmotionCount)];
        ctx.push_back(context("c" + std::to_string(i), "p" + std::to_string(i % 3), {{c, 0.5 + 0.5 * rng.uniform()}},
                              {{s, 1.0}}));
    }
    // contexts answering the same post carry the same post emotions
    for (auto& c : ctx) c.post_emotions = ctx[std::stoi(c.post_id.substr(1))].post_emotions;

    const auto persona = vad_of(Emotion::joy);
    auto run = [&](const std::vector<InteractionContext>& order) {
        const auto s = build_stimulus("me", order);
        const auto r = build_reaction("me", order, gmm::EmConfig{});
        return classify_agent("me", persona, s->summary.centroid, r->summary.centroid, TypologyConfig{});
    };
    const auto base = run(ctx);
    for (int k = 0; k < 20; ++k) {
        auto perm = ctx;
        for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
        const auto other = run(perm);
        CHECK(other.type == base.type);
        CHECK(other.distances == base.distances);
    }
}

TEST_CASE("typology config validation and names") {
    TypologyConfig cfg;
    cfg.tau = -0.1;
    CHECK_THROWS_AS(validate(cfg), Error);
    cfg.tau = std::sqrt(3.0);
    CHECK_THROWS_AS(validate(cfg), Error);
    cfg.tau = 0.0;
    CHECK_NOTHROW(validate(cfg));

    for (auto k : {BehaviorKind::Type1, BehaviorKind::Type2, BehaviorKind::Type3, BehaviorKind::Type4,
                   BehaviorKind::Type5, BehaviorKind::Unknown})
        CHECK(parse_behavior_kind(to_string(k)) == k);
    for (auto r : {Resolution::PersonaAligned, Resolution::StimulusAligned, Resolution::BothAligned})
        CHECK(parse_resolution(to_string(r)) == r);
    CHECK(parse_stimulus_source("own-posts") == StimulusSource::OwnPosts);
    CHECK(to_string(StimulusSource::RespondedPosts) == "responded-posts");
    CHECK_THROWS_AS(parse_stimulus_source("posts"), Error);
}
