#include "psr/report.hpp"

#include <algorithm>

#include "psr/error.hpp"

namespace psr::report {

Emotion EmotionHistogram::modal_label() const {
    const auto it = std::ranges::max_element(counts);  // first maximum
    return static_cast<Emotion>(std::distance(counts.begin(), it));
}

EmotionHistogram emotion_frequency(std::span<const ingest::AnnotationRecord> annotations,
                                   ingest::RecordKind kind) {
    EmotionHistogram h;
    h.kind = kind;
    for (const auto& record : annotations) {
        if (record.kind != kind) continue;
        for (const auto& e : record.emotions) {
            ++h.counts[index_of(e.label)];
            ++h.total;
        }
    }
    return h;
}

double TypologyDistribution::proportion(BehaviorKind kind) const {
    return total == 0 ? 0.0 : static_cast<double>(count(kind)) / static_cast<double>(total);
}

double TypologyDistribution::classified_fraction() const {
    if (total == 0) return 0.0;
    return static_cast<double>(total - count(BehaviorKind::Unknown)) / static_cast<double>(total);
}

BehaviorKind TypologyDistribution::modal_kind() const {
    const auto it = std::ranges::max_element(counts);
    return static_cast<BehaviorKind>(std::distance(counts.begin(), it));
}

TypologyDistribution typology_distribution(std::span<const ClassifiedAgent> records) {
    TypologyDistribution dist;
    if (!records.empty()) dist.config = records.front().config;

    std::array<std::size_t, 3> type5{};
    for (const auto& r : records) {
        if (!(r.config == dist.config)) {
            throw Error(ErrorCode::MixedConfig,
                        "classified records were produced with different tau or stimulus source");
        }
        ++dist.counts[static_cast<std::size_t>(r.type.kind)];
        if (r.type.kind == BehaviorKind::Type5 && r.type.resolution) {
            ++type5[static_cast<std::size_t>(*r.type.resolution)];
        }
    }
    dist.total = records.size();

    auto share = [&](std::size_t n) {
        return dist.total == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(dist.total);
    };
    for (auto kind : {BehaviorKind::Type1, BehaviorKind::Type2, BehaviorKind::Type3, BehaviorKind::Type4}) {
        dist.rows.push_back({kind, std::nullopt, dist.count(kind), share(dist.count(kind))});
    }
    for (auto res : {Resolution::PersonaAligned, Resolution::StimulusAligned, Resolution::BothAligned}) {
        const auto n = type5[static_cast<std::size_t>(res)];
        dist.rows.push_back({BehaviorKind::Type5, res, n, share(n)});
    }
    dist.rows.push_back({BehaviorKind::Unknown, std::nullopt, dist.count(BehaviorKind::Unknown),
                         share(dist.count(BehaviorKind::Unknown))});
    return dist;
}

} // namespace psr::report
