#include "psr/profile.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "psr/error.hpp"

namespace psr {

namespace {

std::vector<const InteractionContext*> own_comments(const std::string& agent_id,
                                                    std::span<const InteractionContext> contexts) {
    std::vector<const InteractionContext*> out;
    for (const auto& ctx : contexts) {
        if (ctx.commenting_agent_id == agent_id) out.push_back(&ctx);
    }
    std::ranges::sort(out, [](const auto* x, const auto* y) { return x->comment_id < y->comment_id; });
    return out;
}

} // namespace

void validate(const TypologyConfig& config) {
    if (!(config.tau >= 0.0) || !(config.tau < std::sqrt(3.0))) {
        throw Error(ErrorCode::InvalidArgument, "tau must lie in [0, sqrt(3))");
    }
}

std::string_view to_string(BehaviorKind kind) {
    switch (kind) {
    case BehaviorKind::Type1: return "Type1";
    case BehaviorKind::Type2: return "Type2";
    case BehaviorKind::Type3: return "Type3";
    case BehaviorKind::Type4: return "Type4";
    case BehaviorKind::Type5: return "Type5";
    case BehaviorKind::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::string_view behavior_class_name(BehaviorKind kind) {
    switch (kind) {
    case BehaviorKind::Type1: return "Aligned";
    case BehaviorKind::Type2: return "Persona-Consistent";
    case BehaviorKind::Type3: return "Stimulus-Driven";
    case BehaviorKind::Type4: return "Transformative";
    case BehaviorKind::Type5: return "Conflict-Resolving";
    case BehaviorKind::Unknown: return "Incomplete PSR";
    }
    return "Incomplete PSR";
}

std::string_view to_string(Resolution resolution) {
    switch (resolution) {
    case Resolution::PersonaAligned: return "persona-aligned";
    case Resolution::StimulusAligned: return "stimulus-aligned";
    case Resolution::BothAligned: return "both-aligned";
    }
    return "both-aligned";
}

std::string_view to_string(StimulusSource source) {
    return source == StimulusSource::RespondedPosts ? "responded-posts" : "own-posts";
}

BehaviorKind parse_behavior_kind(std::string_view text) {
    for (auto k : {BehaviorKind::Type1, BehaviorKind::Type2, BehaviorKind::Type3, BehaviorKind::Type4,
                   BehaviorKind::Type5, BehaviorKind::Unknown}) {
        if (text == to_string(k)) return k;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown behavior type '" + std::string(text) + "'");
}

Resolution parse_resolution(std::string_view text) {
    for (auto r : {Resolution::PersonaAligned, Resolution::StimulusAligned, Resolution::BothAligned}) {
        if (text == to_string(r)) return r;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown resolution '" + std::string(text) + "'");
}

StimulusSource parse_stimulus_source(std::string_view text) {
    if (text == "responded-posts") return StimulusSource::RespondedPosts;
    if (text == "own-posts") return StimulusSource::OwnPosts;
    throw Error(ErrorCode::InvalidArgument, "unknown stimulus source '" + std::string(text) + "'");
}

std::optional<PersonaProfile> build_persona(const std::string& agent_id,
                                            std::span<const EmotionScore> bio_emotions) {
    if (bio_emotions.empty()) return std::nullopt;
    auto set = stats::WeightedEmotionSet::from_scores(bio_emotions);
    auto summary = stats::summarize(set);
    return PersonaProfile{agent_id, std::move(set), summary};
}

std::optional<StimulusProfile> build_stimulus(const std::string& agent_id,
                                              std::span<const InteractionContext> contexts) {
    std::map<std::string, const std::vector<EmotionScore>*> posts;
    for (const auto* ctx : own_comments(agent_id, contexts)) {
        if (!ctx->post_emotions.empty()) posts.emplace(ctx->post_id, &ctx->post_emotions);
    }
    if (posts.empty()) return std::nullopt;

    StimulusProfile out{agent_id, {}, {}, {}};
    std::vector<EmotionScore> scores;
    for (const auto& [post_id, emotions] : posts) {
        out.post_ids.push_back(post_id);
        scores.insert(scores.end(), emotions->begin(), emotions->end());
    }
    out.emotions = stats::WeightedEmotionSet::from_scores(scores);
    out.summary = stats::summarize(out.emotions);
    return out;
}

std::optional<StimulusProfile> build_stimulus_own(const std::string& agent_id,
                                                  std::span<const PostEmotions> posts) {
    std::map<std::string, const std::vector<EmotionScore>*> by_id;
    for (const auto& p : posts) {
        if (!p.emotions.empty()) by_id.emplace(p.post_id, &p.emotions);
    }
    if (by_id.empty()) return std::nullopt;

    StimulusProfile out{agent_id, {}, {}, {}};
    std::vector<EmotionScore> scores;
    for (const auto& [post_id, emotions] : by_id) {
        out.post_ids.push_back(post_id);
        scores.insert(scores.end(), emotions->begin(), emotions->end());
    }
    out.emotions = stats::WeightedEmotionSet::from_scores(scores);
    out.summary = stats::summarize(out.emotions);
    return out;
}

std::optional<ReactionProfile> build_reaction(const std::string& agent_id,
                                              std::span<const InteractionContext> contexts,
                                              const gmm::EmConfig& config) {
    ReactionProfile out{agent_id, {}, {}, {}, std::nullopt};
    std::vector<EmotionScore> scores;
    for (const auto* ctx : own_comments(agent_id, contexts)) {
        if (ctx->comment_emotions.empty()) continue;
        out.comment_ids.push_back(ctx->comment_id);
        scores.insert(scores.end(), ctx->comment_emotions.begin(), ctx->comment_emotions.end());
    }
    if (scores.empty()) return std::nullopt;

    out.emotions = stats::WeightedEmotionSet::from_scores(scores);
    out.summary = stats::summarize(out.emotions);

    if (out.emotions.distinct_labels() >= 2) {
        std::vector<Vec3> points;
        std::vector<double> weights;
        for (const auto& e : out.emotions.entries()) {
            points.push_back(e.point.vec());
            weights.push_back(e.weight);
        }
        gmm::EmConfig auto_k = config;
        auto_k.k.reset();
        out.mixture = gmm::fit_em(points, weights, auto_k).model;
    }
    return out;
}

PsrDistances psr_distances(const std::optional<VadPoint>& persona,
                           const std::optional<VadPoint>& stimulus,
                           const std::optional<VadPoint>& reaction) {
    PsrDistances d;
    if (persona && reaction) d.d_pr = distance(*persona, *reaction);
    if (stimulus && reaction) d.d_sr = distance(*stimulus, *reaction);
    if (persona && stimulus) d.d_ps = distance(*persona, *stimulus);
    return d;
}

bool is_low(double distance, double tau) noexcept { return distance < tau || distance == 0.0; }

BehaviorType classify(const PsrDistances& d, const TypologyConfig& config) {
    if (!d.d_pr || !d.d_sr || !d.d_ps) return {BehaviorKind::Unknown, std::nullopt};
    const bool pr = is_low(*d.d_pr, config.tau);
    const bool sr = is_low(*d.d_sr, config.tau);
    const bool ps = is_low(*d.d_ps, config.tau);

    if (ps) {
        if (pr && sr) return {BehaviorKind::Type1, std::nullopt};
        if (pr) return {BehaviorKind::Type2, std::nullopt};
        if (sr) return {BehaviorKind::Type3, std::nullopt};
        return {BehaviorKind::Type4, std::nullopt};
    }
    // Persona and stimulus disagree.
    if (pr && sr) return {BehaviorKind::Type5, Resolution::BothAligned};
    if (pr) return {BehaviorKind::Type5, Resolution::PersonaAligned};
    if (sr) return {BehaviorKind::Type5, Resolution::StimulusAligned};
    return {BehaviorKind::Type4, std::nullopt};
}

ClassifiedAgent classify_agent(const std::string& agent_id,
                               const std::optional<VadPoint>& persona,
                               const std::optional<VadPoint>& stimulus,
                               const std::optional<VadPoint>& reaction,
                               const TypologyConfig& config) {
    validate(config);
    ClassifiedAgent out;
    out.agent_id = agent_id;
    out.distances = psr_distances(persona, stimulus, reaction);
    out.type = classify(out.distances, config);
    out.config = config;
    out.persona_centroid = persona;
    out.stimulus_centroid = stimulus;
    out.reaction_centroid = reaction;
    return out;
}

} // namespace psr
