#include "psr/affect_stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "psr/error.hpp"

namespace psr::stats {

namespace {

// Sums run over entries sorted by (label, weight) so that the results do
// not depend on insertion order at all, not even in the last bit.
std::vector<const WeightedEmotion*> canonical_order(const WeightedEmotionSet& set) {
    if (set.empty()) throw Error(ErrorCode::EmptySet, "weighted emotion set is empty");
    std::vector<const WeightedEmotion*> order;
    order.reserve(set.size());
    for (const auto& e : set.entries()) order.push_back(&e);
    std::ranges::sort(order, [](const WeightedEmotion* x, const WeightedEmotion* y) {
        if (x->label != y->label) return x->label < y->label;
        return x->weight < y->weight;
    });
    return order;
}

struct Moments {
    Vec3 mean;
    Mat3 covariance;
    double total_weight;
};

Moments compute_moments(const WeightedEmotionSet& set, bool with_covariance) {
    const auto order = canonical_order(set);

    // Offsets from the first entry: coincident points then give exactly
    // that point as the centroid and exactly zero spread.
    const Vec3 origin = order.front()->point.vec();
    double total = 0.0;
    Vec3 acc = Vec3::Zero();
    for (const auto* e : order) {
        total += e->weight;
        acc += e->weight * (e->point.vec() - origin);
    }
    const Vec3 mean = origin + acc / total;

    Mat3 cov = Mat3::Zero();
    if (with_covariance) {
        for (const auto* e : order) {
            const Vec3 diff = e->point.vec() - mean;
            cov.noalias() += e->weight * (diff * diff.transpose());
        }
        cov /= total;
        // The outer product is symmetric per term; enforce it on the sum.
        cov = 0.5 * (cov + cov.transpose()).eval();
    }
    return {mean, cov, total};
}

} // namespace

void WeightedEmotionSet::add(Emotion label, double weight) {
    if (!(weight > 0.0) || !std::isfinite(weight)) {
        throw Error(ErrorCode::InvalidArgument, "emotion weight must be positive and finite");
    }
    entries_.push_back({label, vad_of(label), weight});
}

WeightedEmotionSet WeightedEmotionSet::from_scores(std::span<const EmotionScore> scores) {
    std::array<double, kEmotionCount> sums{};
    std::array<bool, kEmotionCount> seen{};
    for (const auto& s : scores) {
        sums[index_of(s.label)] += s.score;
        seen[index_of(s.label)] = true;
    }
    WeightedEmotionSet out;
    for (Emotion e : all_emotions()) {
        if (seen[index_of(e)]) out.add(e, sums[index_of(e)]);
    }
    return out;
}

std::size_t WeightedEmotionSet::distinct_labels() const {
    std::array<bool, kEmotionCount> seen{};
    for (const auto& e : entries_) seen[index_of(e.label)] = true;
    return static_cast<std::size_t>(std::ranges::count(seen, true));
}

VadPoint weighted_centroid(const WeightedEmotionSet& set) {
    return VadPoint::from(compute_moments(set, false).mean);
}

Mat3 weighted_covariance(const WeightedEmotionSet& set) {
    return compute_moments(set, true).covariance;
}

Mat3 regularize(const Mat3& sigma, double eps) {
    if (eps < 0.0) throw Error(ErrorCode::InvalidArgument, "regularization must be non-negative");
    return sigma + eps * Mat3::Identity();
}

AffectSummary summarize(const WeightedEmotionSet& set) {
    const auto m = compute_moments(set, true);
    return {VadPoint::from(m.mean), m.covariance, m.total_weight, set.size()};
}

} // namespace psr::stats
