// psr: command-line front end for the affect profiling pipeline.
//
//   psr annotate  --agents A --posts P --comments C --out ANN [--backend stub|external]
//   psr profile   --corpus-dir DIR --annotations ANN --out PROFILES [--seed N]
//   psr classify  --profiles PROFILES --out CLASSIFIED [--tau 0.35]
//                 [--stimulus-source responded-posts|own-posts]
//   psr report    --classified CLASSIFIED --annotations ANN --format json|csv --out-dir DIR
//   psr gmm-fit   --points-file POINTS --out MODEL [--k auto|N] [--seed N]
//   psr stats     --corpus-dir DIR --annotations ANN
//   psr synth     --out-dir DIR [--seed N]
//
// Exit codes: 0 success, 1 usage error, 2 data error. Failures print one
// JSON error record on stderr.

#include <charconv>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "psr/error.hpp"
#include "psr/pipeline.hpp"
#include "psr/synth.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

int report_error(std::string_view kind, const std::string& message, const std::string& file = {},
                 std::size_t line = 0) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    if (!file.empty()) j["file"] = file;
    if (line > 0) j["line"] = line;
    std::cerr << j.dump() << '\n';
    return kind == "Usage" || kind == "InvalidArgument" ? kUsageError : kDataError;
}

std::optional<int> parse_k(const std::string& text) {
    if (text == "auto") return std::nullopt;
    int k = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), k);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || k < 1) {
        throw psr::Error(psr::ErrorCode::InvalidArgument, "--k must be 'auto' or a positive integer");
    }
    return k;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Persona/stimulus/reaction affect profiling for agent social-network corpora"};
    app.require_subcommand(1);

    // annotate
    psr::pipeline::AnnotateOptions annotate;
    std::string backend = "stub";
    std::string external;
    auto* annotate_cmd = app.add_subcommand("annotate", "Annotate bios, posts and comments with emotions");
    annotate_cmd->add_option("--agents", annotate.corpus.agents, "agents.jsonl")->required();
    annotate_cmd->add_option("--posts", annotate.corpus.posts, "posts.jsonl")->required();
    annotate_cmd->add_option("--comments", annotate.corpus.comments, "comments.jsonl")->required();
    annotate_cmd->add_option("--out", annotate.out, "Output annotations file")->required();
    annotate_cmd->add_option("--backend", backend, "stub (in-process) or external")
        ->check(CLI::IsMember({"stub", "external"}));
    annotate_cmd->add_option("--external-annotations", external,
                             "Pre-produced annotations file for the external backend");

    // profile
    std::filesystem::path corpus_dir;
    std::filesystem::path annotations;
    std::filesystem::path out;
    psr::gmm::EmConfig em;
    auto* profile_cmd = app.add_subcommand("profile", "Build persona/stimulus/reaction profiles per agent");
    profile_cmd->add_option("--corpus-dir", corpus_dir, "Directory with agents/posts/comments .jsonl")->required();
    profile_cmd->add_option("--annotations", annotations, "Annotations file")->required();
    profile_cmd->add_option("--out", out, "Output profiles file")->required();
    profile_cmd->add_option("--seed", em.seed, "Seed for mixture fitting");
    profile_cmd->add_option("--restarts", em.restarts, "EM restarts per fit");
    profile_cmd->add_option("--max-iterations", em.max_iterations, "EM iteration cap");

    // classify
    std::filesystem::path profiles;
    psr::TypologyConfig typology;
    std::string stimulus_source = "responded-posts";
    auto* classify_cmd = app.add_subcommand("classify", "Assign behaviour types from profile distances");
    classify_cmd->add_option("--profiles", profiles, "Profiles file")->required();
    classify_cmd->add_option("--out", out, "Output classified file")->required();
    classify_cmd->add_option("--tau", typology.tau, "Low/high distance threshold");
    classify_cmd->add_option("--stimulus-source", stimulus_source, "responded-posts or own-posts")
        ->check(CLI::IsMember({"responded-posts", "own-posts"}));

    // report
    std::filesystem::path classified;
    std::string format = "json";
    std::filesystem::path out_dir;
    auto* report_cmd = app.add_subcommand("report", "Emit histogram, typology and centroid tables");
    report_cmd->add_option("--classified", classified, "Classified agents file")->required();
    report_cmd->add_option("--annotations", annotations, "Annotations file")->required();
    report_cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    report_cmd->add_option("--out-dir", out_dir, "Output directory")->required();

    // gmm-fit
    std::filesystem::path points_file;
    std::string k_text = "auto";
    auto* gmm_cmd = app.add_subcommand("gmm-fit", "Fit a Gaussian mixture to weighted VAD points");
    gmm_cmd->add_option("--points-file", points_file, "Lines of {\"point\":[v,a,d],\"weight\":w}")->required();
    gmm_cmd->add_option("--k", k_text, "Component count or 'auto' (BIC)");
    gmm_cmd->add_option("--k-max", em.k_max, "Largest K tried by 'auto'");
    gmm_cmd->add_option("--seed", em.seed, "Seed for initialisation");
    gmm_cmd->add_option("--restarts", em.restarts, "EM restarts");
    gmm_cmd->add_option("--max-iterations", em.max_iterations, "EM iteration cap");
    gmm_cmd->add_option("--out", out, "Output model file")->required();

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Corpus activity summary");
    stats_cmd->add_option("--corpus-dir", corpus_dir, "Directory with agents/posts/comments .jsonl")->required();
    stats_cmd->add_option("--annotations", annotations, "Annotations file")->required();

    // synth
    psr::synth::SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with planted types");
    synth_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
    synth_cmd->add_option("--seed", synth.seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return report_error("Usage", e.what());
    }

    try {
        if (*annotate_cmd) {
            annotate.backend = backend == "stub" ? psr::pipeline::AnnotatorBackend::Stub
                                                 : psr::pipeline::AnnotatorBackend::External;
            if (!external.empty()) annotate.external_annotations = external;
            psr::pipeline::run_annotate(annotate);
        } else if (*profile_cmd) {
            psr::pipeline::run_profile(corpus_dir, annotations, out, em);
        } else if (*classify_cmd) {
            typology.stimulus_source = psr::parse_stimulus_source(stimulus_source);
            psr::pipeline::run_classify(profiles, out, typology);
        } else if (*report_cmd) {
            for (const auto& path : psr::pipeline::run_report(
                     classified, annotations, psr::pipeline::parse_report_format(format), out_dir)) {
                std::cout << path.string() << '\n';
            }
        } else if (*gmm_cmd) {
            em.k = parse_k(k_text);
            const auto fit = psr::pipeline::run_gmm_fit(points_file, em, out);
            nlohmann::ordered_json summary;
            summary["k"] = fit.model.k();
            summary["log_likelihood"] = fit.log_likelihood;
            summary["degenerate"] = fit.degenerate;
            std::cout << summary.dump() << '\n';
        } else if (*stats_cmd) {
            const auto stats = psr::pipeline::run_stats(corpus_dir, annotations);
            std::cout << psr::pipeline::stats_to_json(stats).dump(2) << '\n';
        } else if (*synth_cmd) {
            psr::synth::write_fixture(out_dir, psr::synth::generate(synth));
        }
    } catch (const psr::Error& e) {
        return report_error(psr::to_string(e.code()), e.what(), e.file(), e.line());
    } catch (const std::exception& e) {
        return report_error("Internal", e.what());
    }
    return 0;
}
