#pragma once

// Corpus-level report tables: emotion frequency histograms per record
// kind and the behaviour-type distribution.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "psr/ingest.hpp"
#include "psr/profile.hpp"

namespace psr::report {

struct EmotionHistogram {
    ingest::RecordKind kind = ingest::RecordKind::Comment;
    std::array<std::size_t, kEmotionCount> counts{};
    std::size_t total = 0;

    // Most frequent label; ties go to the lower taxonomy index.
    Emotion modal_label() const;
};

// Counts every emotion entry of every record of the given kind.
EmotionHistogram emotion_frequency(std::span<const ingest::AnnotationRecord> annotations,
                                   ingest::RecordKind kind);

// One row per reported category: Type1..Type4, Type5 split by
// resolution, and Unknown. Rows always appear, zero-filled.
struct TypologyRow {
    BehaviorKind kind;
    std::optional<Resolution> resolution;
    std::size_t count = 0;
    double proportion = 0.0;
};

struct TypologyDistribution {
    std::array<std::size_t, 6> counts{};  // indexed by BehaviorKind
    std::vector<TypologyRow> rows;
    std::size_t total = 0;
    TypologyConfig config;

    std::size_t count(BehaviorKind kind) const { return counts[static_cast<std::size_t>(kind)]; }
    double proportion(BehaviorKind kind) const;
    // Share of agents with a defined type (everything except Unknown).
    double classified_fraction() const;
    // Most frequent kind; ties go to the lower kind.
    BehaviorKind modal_kind() const;
};

// Throws Error{MixedConfig} when records disagree on tau or stimulus
// source. An empty input yields an all-zero distribution under the
// default config.
TypologyDistribution typology_distribution(std::span<const ClassifiedAgent> records);

} // namespace psr::report
