#pragma once

// Orchestration behind the command-line subcommands: per-agent profile
// building (OpenMP kernel plus serial reference), the profile and
// classified-agent record files, report emission and the standalone
// mixture fit.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "psr/gmm.hpp"
#include "psr/ingest.hpp"
#include "psr/profile.hpp"
#include "psr/report.hpp"

namespace psr::pipeline {

struct AgentProfiles {
    std::string agent_id;
    std::optional<PersonaProfile> persona;
    std::optional<StimulusProfile> stimulus_responded;
    std::optional<StimulusProfile> stimulus_own;
    std::optional<ReactionProfile> reaction;
};

AgentProfiles build_agent_profiles(const ingest::AgentInputs& inputs, const gmm::EmConfig& config);

// One slot per agent in join order. The parallel kernel writes each slot
// from exactly one iteration, so both produce identical profiles.
std::vector<AgentProfiles> build_profiles_parallel(std::span<const ingest::AgentInputs> agents,
                                                   const gmm::EmConfig& config);
std::vector<AgentProfiles> build_profiles_serial(std::span<const ingest::AgentInputs> agents,
                                                 const gmm::EmConfig& config);

// What classification needs from a profile record.
struct ProfileCentroids {
    std::string agent_id;
    std::optional<VadPoint> persona;
    std::optional<VadPoint> stimulus_responded;
    std::optional<VadPoint> stimulus_own;
    std::optional<VadPoint> reaction;
};

nlohmann::ordered_json profile_to_json(const AgentProfiles& profiles);
ProfileCentroids centroids_from_json(const nlohmann::ordered_json& j);

void write_profiles(std::ostream& out, std::span<const AgentProfiles> profiles);
std::vector<ProfileCentroids> read_profiles(std::istream& in, const std::string& source = "profiles");

// Output sorted by agent_id.
std::vector<ClassifiedAgent> classify_profiles(std::span<const ProfileCentroids> profiles,
                                               const TypologyConfig& config);

nlohmann::ordered_json classified_to_json(const ClassifiedAgent& agent);
ClassifiedAgent classified_from_json(const nlohmann::ordered_json& j);
void write_classified(std::ostream& out, std::span<const ClassifiedAgent> agents);
std::vector<ClassifiedAgent> read_classified(std::istream& in, const std::string& source = "classified");

enum class ReportFormat { Json, Csv };
ReportFormat parse_report_format(std::string_view text);

// Writes histograms, typology, centroids and summary tables into out_dir
// (".jsonl"/".json" or ".csv"). Every record carries tau and the
// stimulus source. Returns the written paths in a fixed order.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& out_dir,
                                                ReportFormat format,
                                                std::span<const ClassifiedAgent> classified,
                                                std::span<const ingest::AnnotationRecord> annotations);

// Line-delimited {"point":[v,a,d],"weight":w} records (weight optional).
struct WeightedPoints {
    std::vector<Vec3> points;
    std::vector<double> weights;
};
WeightedPoints read_points(std::istream& in, const std::string& source = "points");

nlohmann::ordered_json stats_to_json(const ingest::CorpusStats& stats);

// ---- subcommands ----------------------------------------------------------

enum class AnnotatorBackend { Stub, External };

struct AnnotateOptions {
    ingest::CorpusPaths corpus;
    std::filesystem::path out;
    AnnotatorBackend backend = AnnotatorBackend::Stub;
    std::optional<std::filesystem::path> external_annotations;
};
void run_annotate(const AnnotateOptions& options);

void run_profile(const std::filesystem::path& corpus_dir, const std::filesystem::path& annotations,
                 const std::filesystem::path& out, const gmm::EmConfig& config);

void run_classify(const std::filesystem::path& profiles, const std::filesystem::path& out,
                  const TypologyConfig& config);

std::vector<std::filesystem::path> run_report(const std::filesystem::path& classified,
                                              const std::filesystem::path& annotations,
                                              ReportFormat format,
                                              const std::filesystem::path& out_dir);

gmm::FitResult run_gmm_fit(const std::filesystem::path& points_file, const gmm::EmConfig& config,
                           const std::filesystem::path& out);

ingest::CorpusStats run_stats(const std::filesystem::path& corpus_dir,
                              const std::filesystem::path& annotations);

} // namespace psr::pipeline
