#pragma once

// Seeded generator for synthetic agent corpora with planted behaviour
// types. Anchor emotions are drawn from a mixture over VAD space and
// snapped to the nearest taxonomy label; texts are rendered from the
// stub lexicon so the stub annotator recovers the intended labels.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "psr/ingest.hpp"
#include "psr/profile.hpp"

namespace psr::synth {

struct PlantedCounts {
    int type1 = 6;
    int type2 = 5;
    int type3 = 14;
    int type4 = 7;
    int type5_persona = 4;
    int type5_stimulus = 4;
    int broadcasters = 6;  // posts only, no bio -> Unknown
    int bio_only = 4;      // bio only -> Unknown

    int total() const {
        return type1 + type2 + type3 + type4 + type5_persona + type5_stimulus + broadcasters + bio_only;
    }
};

struct SynthOptions {
    std::uint64_t seed = 7;
    PlantedCounts counts;
    // Designed distances keep at least `margin` away from tau.
    double tau = 0.35;
    double margin = 0.05;
};

struct PlantedAgent {
    std::string agent_id;
    BehaviorType type;
};

struct SynthFixture {
    ingest::Corpus corpus;
    std::vector<PlantedAgent> planted;  // by agent_id
};

// Throws Error{InvalidArgument} if no broadcaster is configured or a
// design cannot be met.
SynthFixture generate(const SynthOptions& options);

// Writes agents/posts/comments .jsonl and planted.jsonl into dir.
void write_fixture(const std::filesystem::path& dir, const SynthFixture& fixture);

std::vector<PlantedAgent> read_planted(const std::filesystem::path& path);

} // namespace psr::synth
