#include "psr/pipeline.hpp"

#include <charconv>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>

#include "psr/error.hpp"
#include "psr/stub_annotator.hpp"

namespace psr::pipeline {

namespace {

using Json = nlohmann::ordered_json;

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string(), path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string(), path.string());
    return out;
}

void write_line(std::ostream& out, const Json& j) { out << j.dump() << '\n'; }

Json point_json(const VadPoint& p) { return Json::array({p.v, p.a, p.d}); }

Json optional_point_json(const std::optional<VadPoint>& p) { return p ? point_json(*p) : Json(nullptr); }

Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

std::optional<VadPoint> point_from_json(const Json& j) {
    if (j.is_null()) return std::nullopt;
    const auto xs = j.get<std::vector<double>>();
    if (xs.size() != 3) throw Error(ErrorCode::MalformedLine, "centroid needs three values");
    return VadPoint{xs[0], xs[1], xs[2]};
}

Json summary_json(const stats::WeightedEmotionSet& emotions, const stats::AffectSummary& s) {
    Json cov = Json::array();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) cov.push_back(s.covariance(r, c));
    }
    Json entries = Json::array();
    for (const auto& e : emotions.entries()) {
        entries.push_back({{"label", canonical_name(e.label)}, {"weight", e.weight}});
    }
    return {{"centroid", point_json(s.centroid)},
            {"covariance", std::move(cov)},
            {"total_weight", s.total_weight},
            {"count", s.count},
            {"emotions", std::move(entries)}};
}

Json stimulus_json(const std::optional<StimulusProfile>& s) {
    if (!s) return nullptr;
    Json j = summary_json(s->emotions, s->summary);
    j["post_ids"] = s->post_ids;
    return j;
}

// Reads JSON records line by line, mapping parse failures to MalformedLine.
template <typename F>
void for_each_record(std::istream& in, const std::string& source, F&& f) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (ingest::is_blank(line)) continue;
        try {
            f(Json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedLine, source + ":" + std::to_string(line_no) + ": " + e.what(),
                        source, line_no);
        } catch (const Error& e) {
            throw Error(e.code(), source + ":" + std::to_string(line_no) + ": " + e.what(), source, line_no);
        }
    }
}

std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

// Emits the same logical table either as JSON lines or as CSV.
class TableWriter {
public:
    TableWriter(const std::filesystem::path& path, ReportFormat format, std::vector<std::string> columns)
        : out_(open_output(path)), format_(format), columns_(std::move(columns)) {
        if (format_ == ReportFormat::Csv) {
            for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
            out_ << '\n';
        }
    }

    // `row` holds one value per column; null cells are omitted from JSON
    // and left empty in CSV.
    void row(const Json& values) {
        if (format_ == ReportFormat::Json) {
            Json j;
            for (std::size_t i = 0; i < columns_.size(); ++i) {
                if (!values[i].is_null()) j[columns_[i]] = values[i];
            }
            write_line(out_, j);
            return;
        }
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) out_ << ',';
            const auto& v = values[i];
            if (v.is_null()) continue;
            if (v.is_string()) out_ << csv_field(v.get<std::string>());
            else if (v.is_number_float()) out_ << format_number(v.get<double>());
            else out_ << v.dump();
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
    ReportFormat format_;
    std::vector<std::string> columns_;
};

} // namespace

// ---- profiles -------------------------------------------------------------

AgentProfiles build_agent_profiles(const ingest::AgentInputs& inputs, const gmm::EmConfig& config) {
    AgentProfiles out;
    out.agent_id = inputs.agent_id;
    out.persona = build_persona(inputs.agent_id, inputs.bio_emotions);
    out.stimulus_responded = build_stimulus(inputs.agent_id, inputs.contexts);
    out.stimulus_own = build_stimulus_own(inputs.agent_id, inputs.own_posts);
    out.reaction = build_reaction(inputs.agent_id, inputs.contexts, config);
    return out;
}

std::vector<AgentProfiles> build_profiles_parallel(std::span<const ingest::AgentInputs> agents,
                                                   const gmm::EmConfig& config) {
    std::vector<AgentProfiles> out(agents.size());
    std::vector<std::exception_ptr> errors(agents.size());
    const auto n = static_cast<std::ptrdiff_t>(agents.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            out[i] = build_agent_profiles(agents[i], config);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

std::vector<AgentProfiles> build_profiles_serial(std::span<const ingest::AgentInputs> agents,
                                                 const gmm::EmConfig& config) {
    std::vector<AgentProfiles> out;
    out.reserve(agents.size());
    for (const auto& a : agents) out.push_back(build_agent_profiles(a, config));
    return out;
}

Json profile_to_json(const AgentProfiles& p) {
    Json persona = nullptr;
    if (p.persona) persona = summary_json(p.persona->emotions, p.persona->summary);

    Json reaction = nullptr;
    if (p.reaction) {
        reaction = summary_json(p.reaction->emotions, p.reaction->summary);
        reaction["comment_ids"] = p.reaction->comment_ids;
        reaction["mixture"] = p.reaction->mixture ? gmm::to_json(*p.reaction->mixture) : Json(nullptr);
    }
    return {{"agent_id", p.agent_id},
            {"persona", std::move(persona)},
            {"stimulus",
             {{"responded-posts", stimulus_json(p.stimulus_responded)},
              {"own-posts", stimulus_json(p.stimulus_own)}}},
            {"reaction", std::move(reaction)}};
}

ProfileCentroids centroids_from_json(const Json& j) {
    auto centroid = [](const Json& component) -> std::optional<VadPoint> {
        if (component.is_null()) return std::nullopt;
        return point_from_json(component.at("centroid"));
    };
    ProfileCentroids out;
    out.agent_id = j.at("agent_id").get<std::string>();
    out.persona = centroid(j.at("persona"));
    out.stimulus_responded = centroid(j.at("stimulus").at("responded-posts"));
    out.stimulus_own = centroid(j.at("stimulus").at("own-posts"));
    out.reaction = centroid(j.at("reaction"));
    return out;
}

void write_profiles(std::ostream& out, std::span<const AgentProfiles> profiles) {
    for (const auto& p : profiles) write_line(out, profile_to_json(p));
}

std::vector<ProfileCentroids> read_profiles(std::istream& in, const std::string& source) {
    std::vector<ProfileCentroids> out;
    for_each_record(in, source, [&](const Json& j) { out.push_back(centroids_from_json(j)); });
    return out;
}

// ---- classification -------------------------------------------------------

std::vector<ClassifiedAgent> classify_profiles(std::span<const ProfileCentroids> profiles,
                                               const TypologyConfig& config) {
    validate(config);
    std::vector<ClassifiedAgent> out;
    out.reserve(profiles.size());
    for (const auto& p : profiles) {
        const auto& stimulus = config.stimulus_source == StimulusSource::RespondedPosts
                                   ? p.stimulus_responded
                                   : p.stimulus_own;
        out.push_back(classify_agent(p.agent_id, p.persona, stimulus, p.reaction, config));
    }
    std::ranges::sort(out, [](const auto& x, const auto& y) { return x.agent_id < y.agent_id; });
    return out;
}

Json classified_to_json(const ClassifiedAgent& a) {
    return {{"agent_id", a.agent_id},
            {"type", to_string(a.type.kind)},
            {"resolution", a.type.resolution ? Json(to_string(*a.type.resolution)) : Json(nullptr)},
            {"d_PR", optional_number(a.distances.d_pr)},
            {"d_SR", optional_number(a.distances.d_sr)},
            {"d_PS", optional_number(a.distances.d_ps)},
            {"tau", a.config.tau},
            {"stimulus_source", to_string(a.config.stimulus_source)},
            {"centroids",
             {{"persona", optional_point_json(a.persona_centroid)},
              {"stimulus", optional_point_json(a.stimulus_centroid)},
              {"reaction", optional_point_json(a.reaction_centroid)}}}};
}

ClassifiedAgent classified_from_json(const Json& j) {
    auto number = [](const Json& x) -> std::optional<double> {
        if (x.is_null()) return std::nullopt;
        return x.get<double>();
    };
    ClassifiedAgent a;
    a.agent_id = j.at("agent_id").get<std::string>();
    a.type.kind = parse_behavior_kind(j.at("type").get<std::string>());
    if (!j.at("resolution").is_null()) a.type.resolution = parse_resolution(j.at("resolution").get<std::string>());
    a.distances = {number(j.at("d_PR")), number(j.at("d_SR")), number(j.at("d_PS"))};
    a.config.tau = j.at("tau").get<double>();
    a.config.stimulus_source = parse_stimulus_source(j.at("stimulus_source").get<std::string>());
    const auto& c = j.at("centroids");
    a.persona_centroid = point_from_json(c.at("persona"));
    a.stimulus_centroid = point_from_json(c.at("stimulus"));
    a.reaction_centroid = point_from_json(c.at("reaction"));
    return a;
}

void write_classified(std::ostream& out, std::span<const ClassifiedAgent> agents) {
    for (const auto& a : agents) write_line(out, classified_to_json(a));
}

std::vector<ClassifiedAgent> read_classified(std::istream& in, const std::string& source) {
    std::vector<ClassifiedAgent> out;
    for_each_record(in, source, [&](const Json& j) { out.push_back(classified_from_json(j)); });
    return out;
}

// ---- report ---------------------------------------------------------------

ReportFormat parse_report_format(std::string_view text) {
    if (text == "json") return ReportFormat::Json;
    if (text == "csv") return ReportFormat::Csv;
    throw Error(ErrorCode::InvalidArgument, "report format must be json or csv");
}

std::vector<std::filesystem::path> write_report(const std::filesystem::path& out_dir,
                                                ReportFormat format,
                                                std::span<const ClassifiedAgent> classified,
                                                std::span<const ingest::AnnotationRecord> annotations) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir.string(), out_dir.string());

    const auto typology = report::typology_distribution(classified);
    const double tau = typology.config.tau;
    const std::string source(to_string(typology.config.stimulus_source));
    const bool json = format == ReportFormat::Json;
    const std::string table_ext = json ? ".jsonl" : ".csv";
    std::vector<std::filesystem::path> written;

    const auto hist_path = out_dir / ("histograms" + table_ext);
    std::array<report::EmotionHistogram, 3> histograms;
    {
        TableWriter t(hist_path, format, {"kind", "label", "count", "tau", "stimulus_source"});
        const ingest::RecordKind kinds[] = {ingest::RecordKind::Bio, ingest::RecordKind::Post,
                                            ingest::RecordKind::Comment};
        for (std::size_t i = 0; i < 3; ++i) {
            histograms[i] = report::emotion_frequency(annotations, kinds[i]);
            for (Emotion e : all_emotions()) {
                t.row(Json::array({to_string(kinds[i]), canonical_name(e),
                                   histograms[i].counts[index_of(e)], tau, source}));
            }
        }
    }
    written.push_back(hist_path);

    const auto typology_path = out_dir / ("typology" + table_ext);
    {
        TableWriter t(typology_path, format,
                      {"type", "resolution", "count", "proportion", "tau", "stimulus_source"});
        for (const auto& row : typology.rows) {
            t.row(Json::array({to_string(row.kind),
                               row.resolution ? Json(to_string(*row.resolution)) : Json(nullptr),
                               row.count, row.proportion, tau, source}));
        }
    }
    written.push_back(typology_path);

    const auto centroid_path = out_dir / ("centroids" + table_ext);
    {
        TableWriter t(centroid_path, format,
                      {"agent_id", "component", "v", "a", "d", "magnitude", "neutral_deviation", "tau",
                       "stimulus_source"});
        for (const auto& a : classified) {
            const std::pair<const char*, const std::optional<VadPoint>*> parts[] = {
                {"persona", &a.persona_centroid},
                {"stimulus", &a.stimulus_centroid},
                {"reaction", &a.reaction_centroid}};
            for (const auto& [name, point] : parts) {
                if (!*point) continue;
                const auto& p = **point;
                t.row(Json::array({a.agent_id, name, p.v, p.a, p.d, magnitude(p), neutral_deviation(p),
                                   tau, source}));
            }
        }
    }
    written.push_back(centroid_path);

    const auto summary_path = out_dir / (json ? "summary.json" : "summary.csv");
    {
        const std::size_t classified_count = typology.total - typology.count(BehaviorKind::Unknown);
        const std::vector<std::string> columns = {
            "agents", "classified", "classified_fraction", "modal_type", "modal_label_bio",
            "modal_label_post", "modal_label_comment", "tau", "stimulus_source"};
        const Json values = Json::array(
            {typology.total, classified_count, typology.classified_fraction(),
             to_string(typology.modal_kind()), canonical_name(histograms[0].modal_label()),
             canonical_name(histograms[1].modal_label()), canonical_name(histograms[2].modal_label()),
             tau, source});
        if (json) {
            auto out = open_output(summary_path);
            Json j;
            for (std::size_t i = 0; i < columns.size(); ++i) j[columns[i]] = values[i];
            out << j.dump(2) << '\n';
        } else {
            TableWriter t(summary_path, format, columns);
            t.row(values);
        }
    }
    written.push_back(summary_path);
    return written;
}

WeightedPoints read_points(std::istream& in, const std::string& source) {
    WeightedPoints out;
    for_each_record(in, source, [&](const Json& j) {
        const auto p = j.at("point").get<std::vector<double>>();
        if (p.size() != 3) throw Error(ErrorCode::MalformedLine, "point needs three coordinates");
        out.points.emplace_back(p[0], p[1], p[2]);
        out.weights.push_back(j.contains("weight") ? j.at("weight").get<double>() : 1.0);
    });
    return out;
}

Json stats_to_json(const ingest::CorpusStats& s) {
    auto category = [](const ingest::CategoryCount& c) {
        return Json{{"count", c.total}, {"analyzed", c.analyzed}};
    };
    return {{"agents", category(s.agents)},
            {"posts", category(s.posts)},
            {"comments", category(s.comments)},
            {"submolts", category(s.submolts)},
            {"missing_bio_agents", s.missing_bio_agents},
            {"no_post_agents", s.no_post_agents},
            {"no_comment_agents", s.no_comment_agents},
            {"dangling_posts", s.dangling_posts},
            {"dangling_comments", s.dangling_comments}};
}

// ---- subcommands ----------------------------------------------------------

void run_annotate(const AnnotateOptions& options) {
    const auto corpus = ingest::load_corpus(options.corpus);
    std::vector<ingest::AnnotationRecord> records;
    if (options.backend == AnnotatorBackend::Stub) {
        records = ingest::annotate_corpus(corpus);
    } else {
        if (!options.external_annotations) {
            throw Error(ErrorCode::InvalidArgument, "external backend needs an annotations file");
        }
        const auto external = ingest::load_annotations(*options.external_annotations);
        records.assign(external.records().begin(), external.records().end());
    }
    auto out = open_output(options.out);
    ingest::write_annotations(out, records);
}

void run_profile(const std::filesystem::path& corpus_dir, const std::filesystem::path& annotations,
                 const std::filesystem::path& out, const gmm::EmConfig& config) {
    gmm::validate(config);
    const auto corpus = ingest::load_corpus(ingest::CorpusPaths::in_directory(corpus_dir));
    const auto ann = ingest::load_annotations(annotations);
    const auto joined = ingest::join_interactions(corpus, ann);
    const auto profiles = build_profiles_parallel(joined.agents, config);
    auto file = open_output(out);
    write_profiles(file, profiles);
}

void run_classify(const std::filesystem::path& profiles, const std::filesystem::path& out,
                  const TypologyConfig& config) {
    auto in = open_input(profiles);
    const auto records = read_profiles(in, profiles.string());
    const auto classified = classify_profiles(records, config);
    auto file = open_output(out);
    write_classified(file, classified);
}

std::vector<std::filesystem::path> run_report(const std::filesystem::path& classified,
                                              const std::filesystem::path& annotations,
                                              ReportFormat format,
                                              const std::filesystem::path& out_dir) {
    auto in = open_input(classified);
    const auto agents = read_classified(in, classified.string());
    const auto ann = ingest::load_annotations(annotations);
    return write_report(out_dir, format, agents, ann.records());
}

gmm::FitResult run_gmm_fit(const std::filesystem::path& points_file, const gmm::EmConfig& config,
                           const std::filesystem::path& out) {
    auto in = open_input(points_file);
    const auto data = read_points(in, points_file.string());
    auto fit = gmm::fit_em(data.points, data.weights, config);
    auto file = open_output(out);
    file << gmm::to_json(fit.model).dump() << '\n';
    return fit;
}

ingest::CorpusStats run_stats(const std::filesystem::path& corpus_dir,
                              const std::filesystem::path& annotations) {
    const auto corpus = ingest::load_corpus(ingest::CorpusPaths::in_directory(corpus_dir));
    const auto ann = ingest::load_annotations(annotations);
    return ingest::corpus_stats(corpus, ann);
}

} // namespace psr::pipeline
