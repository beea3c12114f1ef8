#include "psr/vad.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "psr/error.hpp"

namespace psr {

namespace {

struct TaxonomyRow {
    std::string_view name;
    std::string_view code;
    int v;
    int a;
    int d;
};

constexpr std::array<TaxonomyRow, kEmotionCount> kRows{{
#define PSR_EMOTION(name, code, v, a, d) {#name, code, v, a, d},
#include "psr/taxonomy_table.inc"
#undef PSR_EMOTION
}};

bool iequals(std::string_view lhs, std::string_view rhs) noexcept {
    return std::ranges::equal(lhs, rhs, [](char x, char y) {
        return std::tolower(static_cast<unsigned char>(x)) ==
               std::tolower(static_cast<unsigned char>(y));
    });
}

std::string_view trim(std::string_view s) noexcept {
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

} // namespace

const std::array<Emotion, kEmotionCount>& all_emotions() noexcept {
    static const auto table = [] {
        std::array<Emotion, kEmotionCount> out{};
        for (std::size_t i = 0; i < kEmotionCount; ++i) out[i] = static_cast<Emotion>(i);
        return out;
    }();
    return table;
}

std::string_view canonical_name(Emotion e) noexcept { return kRows[index_of(e)].name; }

std::string_view short_code(Emotion e) noexcept { return kRows[index_of(e)].code; }

VadPoint vad_of(Emotion e) noexcept {
    const auto& row = kRows[index_of(e)];
    return {row.v / 100.0, row.a / 100.0, row.d / 100.0};
}

std::optional<Emotion> try_parse_label(std::string_view text) noexcept {
    text = trim(text);
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
        if (iequals(text, kRows[i].name) || iequals(text, kRows[i].code)) {
            return static_cast<Emotion>(i);
        }
    }
    return std::nullopt;
}

Emotion parse_label(std::string_view text) {
    if (auto e = try_parse_label(text)) return *e;
    throw Error(ErrorCode::UnknownLabel, "unknown emotion label '" + std::string(text) + "'");
}

double magnitude(const VadPoint& p) noexcept {
    return std::sqrt(p.v * p.v + p.a * p.a + p.d * p.d);
}

double neutral_deviation(const VadPoint& p) noexcept { return distance(p, kNeutralPoint); }

double distance(const VadPoint& p, const VadPoint& q) noexcept {
    const double dv = p.v - q.v;
    const double da = p.a - q.a;
    const double dd = p.d - q.d;
    return std::sqrt(dv * dv + da * da + dd * dd);
}

Emotion nearest_emotion(const VadPoint& p) noexcept {
    Emotion best = Emotion::neutral;
    double best_d = INFINITY;
    for (Emotion e : all_emotions()) {
        const double dist = distance(p, vad_of(e));
        if (dist < best_d) {
            best_d = dist;
            best = e;
        }
    }
    return best;
}

} // namespace psr
