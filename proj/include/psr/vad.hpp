#pragma once

// The 28-category emotion taxonomy and elementary geometry in
// valence/arousal/dominance space. The coordinate table is compiled from
// data/taxonomy.csv.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Core>

namespace psr {

enum class Emotion : std::uint8_t {
#define PSR_EMOTION(name, code, v, a, d) name,
#include "psr/taxonomy_table.inc"
#undef PSR_EMOTION
};

inline constexpr std::size_t kEmotionCount = 0
#define PSR_EMOTION(name, code, v, a, d) +1
#include "psr/taxonomy_table.inc"
#undef PSR_EMOTION
    ;
static_assert(kEmotionCount == 28, "taxonomy must hold 27 emotions plus neutral");

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct VadPoint {
    double v = 0.0;
    double a = 0.0;
    double d = 0.0;

    friend bool operator==(const VadPoint&, const VadPoint&) = default;

    Vec3 vec() const { return {v, a, d}; }
    static VadPoint from(const Vec3& x) { return {x[0], x[1], x[2]}; }
};

// One classifier output: a label with its confidence.
struct EmotionScore {
    Emotion label;
    double score;

    friend bool operator==(const EmotionScore&, const EmotionScore&) = default;
};

inline constexpr std::size_t index_of(Emotion e) noexcept { return static_cast<std::size_t>(e); }

const std::array<Emotion, kEmotionCount>& all_emotions() noexcept;

std::string_view canonical_name(Emotion e) noexcept;
std::string_view short_code(Emotion e) noexcept;

// Exact table coordinates, converted from stored hundredths.
VadPoint vad_of(Emotion e) noexcept;

// Case-insensitive on the full name or the short code, surrounding
// whitespace ignored. Throws Error{UnknownLabel}.
Emotion parse_label(std::string_view text);
std::optional<Emotion> try_parse_label(std::string_view text) noexcept;

inline constexpr VadPoint kNeutralPoint{0.5, 0.5, 0.5};

// Distance from the origin (0,0,0); lies in [0, sqrt(3)] on the unit cube.
double magnitude(const VadPoint& p) noexcept;
// Distance from the neutral centre (0.5,0.5,0.5).
double neutral_deviation(const VadPoint& p) noexcept;
double distance(const VadPoint& p, const VadPoint& q) noexcept;

// Nearest taxonomy label to an arbitrary point; ties go to the lower index.
Emotion nearest_emotion(const VadPoint& p) noexcept;

} // namespace psr
