#pragma once

// Deterministic keyword annotator standing in for the transformer
// classifier. The lexicon is compiled from data/stub_lexicon.tsv.

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psr/ingest.hpp"
#include "psr/vad.hpp"

namespace psr::ingest {

// Lowercases ASCII and splits on every byte that is not an ASCII letter
// or digit. Bytes >= 0x80 stay inside tokens.
std::vector<std::string> tokenize(std::string_view text);

// One (label, 1.0) per distinct matched label, in taxonomy order;
// [(neutral, 1.0)] when nothing matches.
std::vector<EmotionScore> stub_annotate(std::string_view text);

// Trigger words for a label, in lexicon order (empty for neutral).
std::span<const std::string_view> trigger_words(Emotion label);

// Applied to every text before annotation.
using TranslateHook = std::function<std::string(std::string_view)>;
std::string identity_translation(std::string_view text);

// Annotates every non-blank bio, every post (title + body) and every
// comment. Records are ordered by kind (bio, post, comment), then id.
std::vector<AnnotationRecord> annotate_corpus(const Corpus& corpus,
                                              const TranslateHook& translate = identity_translation);

} // namespace psr::ingest
