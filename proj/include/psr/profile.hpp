#pragma once

// Persona / Stimulus / Reaction profiles per agent, the pairwise centroid
// distances between them, and the five-type behavioural typology.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psr/affect_stats.hpp"
#include "psr/gmm.hpp"
#include "psr/vad.hpp"

namespace psr {

// One comment joined with the post it answers.
struct InteractionContext {
    std::string comment_id;
    std::string commenting_agent_id;
    std::string post_id;
    std::string post_author_id;
    std::vector<EmotionScore> comment_emotions;  // C_c
    std::vector<EmotionScore> post_emotions;     // S_p
    std::optional<std::vector<EmotionScore>> author_persona_emotions;  // P_a

    friend bool operator==(const InteractionContext&, const InteractionContext&) = default;
};

struct PostEmotions {
    std::string post_id;
    std::vector<EmotionScore> emotions;
};

struct PersonaProfile {
    std::string agent_id;
    stats::WeightedEmotionSet emotions;
    stats::AffectSummary summary;
};

struct StimulusProfile {
    std::string agent_id;
    std::vector<std::string> post_ids;  // sorted, distinct
    stats::WeightedEmotionSet emotions;
    stats::AffectSummary summary;
};

struct ReactionProfile {
    std::string agent_id;
    std::vector<std::string> comment_ids;  // sorted
    stats::WeightedEmotionSet emotions;
    stats::AffectSummary summary;
    std::optional<gmm::GmmModel> mixture;  // only with >= 2 distinct emotions
};

enum class StimulusSource { RespondedPosts, OwnPosts };

struct TypologyConfig {
    double tau = 0.35;
    StimulusSource stimulus_source = StimulusSource::RespondedPosts;

    friend bool operator==(const TypologyConfig&, const TypologyConfig&) = default;
};

// tau must lie in [0, sqrt(3)). Throws Error{InvalidArgument}.
void validate(const TypologyConfig& config);

enum class BehaviorKind { Type1, Type2, Type3, Type4, Type5, Unknown };
enum class Resolution { PersonaAligned, StimulusAligned, BothAligned };

struct BehaviorType {
    BehaviorKind kind = BehaviorKind::Unknown;
    std::optional<Resolution> resolution;  // set for Type5 only

    friend bool operator==(const BehaviorType&, const BehaviorType&) = default;
};

struct PsrDistances {
    std::optional<double> d_pr;
    std::optional<double> d_sr;
    std::optional<double> d_ps;

    friend bool operator==(const PsrDistances&, const PsrDistances&) = default;
};

struct ClassifiedAgent {
    std::string agent_id;
    PsrDistances distances;
    BehaviorType type;
    TypologyConfig config;
    std::optional<VadPoint> persona_centroid;
    std::optional<VadPoint> stimulus_centroid;
    std::optional<VadPoint> reaction_centroid;
};

std::string_view to_string(BehaviorKind kind);
std::string_view behavior_class_name(BehaviorKind kind);
std::string_view to_string(Resolution resolution);
std::string_view to_string(StimulusSource source);
BehaviorKind parse_behavior_kind(std::string_view text);
Resolution parse_resolution(std::string_view text);
StimulusSource parse_stimulus_source(std::string_view text);

// Absent when there are no bio emotions.
std::optional<PersonaProfile> build_persona(const std::string& agent_id,
                                            std::span<const EmotionScore> bio_emotions);

// Stimulus from the posts the agent commented on. Each distinct post
// contributes its emotions once, however many times it was answered.
std::optional<StimulusProfile> build_stimulus(const std::string& agent_id,
                                              std::span<const InteractionContext> contexts);

// Stimulus from the agent's own posts.
std::optional<StimulusProfile> build_stimulus_own(const std::string& agent_id,
                                                  std::span<const PostEmotions> posts);

// Reaction from the agent's comments, with a BIC-selected mixture
// (K <= config.k_max) when at least two distinct emotions occur.
std::optional<ReactionProfile> build_reaction(const std::string& agent_id,
                                              std::span<const InteractionContext> contexts,
                                              const gmm::EmConfig& config);

PsrDistances psr_distances(const std::optional<VadPoint>& persona,
                           const std::optional<VadPoint>& stimulus,
                           const std::optional<VadPoint>& reaction);

// A distance is low when it is below tau; coincident centroids (distance
// exactly 0) count as low for every tau, including tau = 0.
bool is_low(double distance, double tau) noexcept;

BehaviorType classify(const PsrDistances& d, const TypologyConfig& config);

ClassifiedAgent classify_agent(const std::string& agent_id,
                               const std::optional<VadPoint>& persona,
                               const std::optional<VadPoint>& stimulus,
                               const std::optional<VadPoint>& reaction,
                               const TypologyConfig& config);

} // namespace psr
