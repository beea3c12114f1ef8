#pragma once

// Weighted statistics over multi-emotion sets: the confidence-weighted
// centroid and population covariance of a set of VAD points.

#include <cstddef>
#include <span>
#include <vector>

#include "psr/vad.hpp"

namespace psr::stats {

struct WeightedEmotion {
    Emotion label;
    VadPoint point;  // always vad_of(label)
    double weight;   // > 0

    friend bool operator==(const WeightedEmotion&, const WeightedEmotion&) = default;
};

// Ordered multiset of weighted emotions. May be empty as a value; the
// statistics below reject an empty set with Error{EmptySet}.
class WeightedEmotionSet {
public:
    WeightedEmotionSet() = default;

    // Throws Error{InvalidArgument} unless weight > 0 and finite.
    void add(Emotion label, double weight);

    // One entry per distinct label, weight = sum of the scores for that
    // label, entries ordered by taxonomy index. The per-label sums are
    // accumulated in input order.
    static WeightedEmotionSet from_scores(std::span<const EmotionScore> scores);

    std::span<const WeightedEmotion> entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    // Number of distinct labels present.
    std::size_t distinct_labels() const;

    friend bool operator==(const WeightedEmotionSet&, const WeightedEmotionSet&) = default;

private:
    std::vector<WeightedEmotion> entries_;
};

struct AffectSummary {
    VadPoint centroid;
    Mat3 covariance = Mat3::Zero();
    double total_weight = 0.0;
    std::size_t count = 0;
};

// mu = sum(w_j s_j) / sum(w_j)
VadPoint weighted_centroid(const WeightedEmotionSet& set);

// Population covariance: sum(w_j (s_j - mu)(s_j - mu)^T) / sum(w_j).
Mat3 weighted_covariance(const WeightedEmotionSet& set);

// sigma + eps * I.
Mat3 regularize(const Mat3& sigma, double eps);

AffectSummary summarize(const WeightedEmotionSet& set);

} // namespace psr::stats
