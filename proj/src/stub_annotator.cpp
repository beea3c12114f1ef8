#include "psr/stub_annotator.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

namespace psr::ingest {

namespace {

struct Trigger {
    std::string_view word;
    Emotion label;
};

constexpr Trigger kTriggers[] = {
#define PSR_TRIGGER(word, label) {word, Emotion::label},
#include "psr/lexicon_table.inc"
#undef PSR_TRIGGER
};

const std::unordered_map<std::string_view, Emotion>& lexicon() {
    static const auto table = [] {
        std::unordered_map<std::string_view, Emotion> m;
        for (const auto& t : kTriggers) m.emplace(t.word, t.label);
        return m;
    }();
    return table;
}

const std::array<std::vector<std::string_view>, kEmotionCount>& words_by_label() {
    static const auto table = [] {
        std::array<std::vector<std::string_view>, kEmotionCount> out;
        for (const auto& t : kTriggers) out[index_of(t.label)].push_back(t.word);
        return out;
    }();
    return table;
}

bool is_token_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

} // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_token_char(c)) {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<EmotionScore> stub_annotate(std::string_view text) {
    std::array<bool, kEmotionCount> hit{};
    for (const auto& token : tokenize(text)) {
        const auto it = lexicon().find(token);
        if (it != lexicon().end()) hit[index_of(it->second)] = true;
    }
    std::vector<EmotionScore> out;
    for (Emotion e : all_emotions()) {
        if (hit[index_of(e)]) out.push_back({e, 1.0});
    }
    if (out.empty()) out.push_back({Emotion::neutral, 1.0});
    return out;
}

std::span<const std::string_view> trigger_words(Emotion label) {
    return words_by_label()[index_of(label)];
}

std::string identity_translation(std::string_view text) { return std::string(text); }

std::vector<AnnotationRecord> annotate_corpus(const Corpus& corpus, const TranslateHook& translate) {
    struct Job {
        RecordKind kind;
        const std::string* id;
        std::string text;
    };
    std::vector<Job> jobs;
    for (const auto& a : corpus.agents()) {
        if (a.bio && !is_blank(*a.bio)) jobs.push_back({RecordKind::Bio, &a.id, *a.bio});
    }
    for (const auto& p : corpus.posts()) jobs.push_back({RecordKind::Post, &p.id, post_annotation_text(p)});
    for (const auto& c : corpus.comments()) jobs.push_back({RecordKind::Comment, &c.id, c.text});
    std::ranges::sort(jobs, [](const Job& x, const Job& y) {
        if (x.kind != y.kind) return x.kind < y.kind;
        return *x.id < *y.id;
    });

    // The hook may not be thread-safe; translate serially, annotate in parallel.
    for (auto& job : jobs) job.text = translate(job.text);

    std::vector<AnnotationRecord> out(jobs.size());
    const auto n = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[i] = {*jobs[i].id, jobs[i].kind, stub_annotate(jobs[i].text)};
    }
    return out;
}

} // namespace psr::ingest
