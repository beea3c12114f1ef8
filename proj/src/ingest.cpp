#include "psr/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <future>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "json.hpp"
#include "psr/error.hpp"

namespace psr::ingest {

namespace {

using Json = nlohmann::ordered_json;

class LineReader {
public:
    LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    // Next non-blank line parsed as a JSON object.
    std::optional<Json> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (is_blank(line)) continue;
            Json j;
            try {
                j = Json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                fail(std::string("invalid JSON: ") + e.what());
            }
            if (!j.is_object()) fail("record is not a JSON object");
            return j;
        }
        if (in_.bad()) throw Error(ErrorCode::Io, "read error", source_, line_no_);
        return std::nullopt;
    }

    [[noreturn]] void fail(const std::string& message, ErrorCode code = ErrorCode::MalformedLine) const {
        throw Error(code, source_ + ":" + std::to_string(line_no_) + ": " + message, source_, line_no_);
    }

    std::string required(const Json& j, const char* field) const {
        const auto it = j.find(field);
        if (it == j.end() || it->is_null()) fail(std::string("missing required field \"") + field + "\"");
        if (!it->is_string()) fail(std::string("field \"") + field + "\" must be a string");
        return it->get<std::string>();
    }

    std::optional<std::string> optional(const Json& j, const char* field) const {
        const auto it = j.find(field);
        if (it == j.end() || it->is_null()) return std::nullopt;
        if (!it->is_string()) fail(std::string("field \"") + field + "\" must be a string");
        return it->get<std::string>();
    }

    void check_unique(std::set<std::string>& seen, const std::string& id) const {
        if (id.empty()) fail("empty id");
        if (!seen.insert(id).second) fail("duplicate id '" + id + "'", ErrorCode::DuplicateId);
    }

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_no_ = 0;
};

std::string annotation_key(RecordKind kind, const std::string& id) {
    return std::string(to_string(kind)) + '\x1f' + id;
}

void put_optional(Json& j, const char* field, const std::optional<std::string>& value) {
    if (value) j[field] = *value;
}

void write_line(std::ostream& out, const Json& j) {
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) << '\n';
}

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

} // namespace

std::string_view to_string(RecordKind kind) {
    switch (kind) {
    case RecordKind::Bio: return "bio";
    case RecordKind::Post: return "post";
    case RecordKind::Comment: return "comment";
    }
    return "comment";
}

std::optional<RecordKind> parse_record_kind(std::string_view text) {
    if (text == "bio") return RecordKind::Bio;
    if (text == "post") return RecordKind::Post;
    if (text == "comment") return RecordKind::Comment;
    return std::nullopt;
}

bool is_blank(std::string_view text) {
    return std::ranges::all_of(text, [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

std::string post_annotation_text(const PostRecord& post) {
    if (post.title && !is_blank(*post.title)) return *post.title + " " + post.text;
    return post.text;
}

// ---- Corpus ---------------------------------------------------------------

Corpus::Corpus(std::vector<AgentRecord> agents, std::vector<PostRecord> posts,
               std::vector<CommentRecord> comments)
    : agents_(std::move(agents)), posts_(std::move(posts)), comments_(std::move(comments)) {
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        if (!agent_index_.emplace(agents_[i].id, i).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate agent id '" + agents_[i].id + "'");
        }
    }
    for (std::size_t i = 0; i < posts_.size(); ++i) {
        if (!post_index_.emplace(posts_[i].id, i).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate post id '" + posts_[i].id + "'");
        }
    }
    std::set<std::string_view> comment_ids;
    for (const auto& c : comments_) {
        if (!comment_ids.insert(c.id).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate comment id '" + c.id + "'");
        }
    }
}

const AgentRecord* Corpus::find_agent(const std::string& id) const {
    const auto it = agent_index_.find(id);
    return it == agent_index_.end() ? nullptr : &agents_[it->second];
}

const PostRecord* Corpus::find_post(const std::string& id) const {
    const auto it = post_index_.find(id);
    return it == post_index_.end() ? nullptr : &posts_[it->second];
}

bool Corpus::is_dangling(const PostRecord& post) const { return find_agent(post.agent_id) == nullptr; }

bool Corpus::is_dangling(const CommentRecord& comment) const {
    return find_post(comment.post_id) == nullptr || find_agent(comment.agent_id) == nullptr;
}

std::size_t Corpus::dangling_post_count() const {
    return static_cast<std::size_t>(
        std::ranges::count_if(posts_, [&](const PostRecord& p) { return is_dangling(p); }));
}

std::size_t Corpus::dangling_comment_count() const {
    return static_cast<std::size_t>(
        std::ranges::count_if(comments_, [&](const CommentRecord& c) { return is_dangling(c); }));
}

// ---- AnnotationSet --------------------------------------------------------

AnnotationSet::AnnotationSet(std::vector<AnnotationRecord> records) : records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (!index_.emplace(annotation_key(r.kind, r.record_id), i).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate annotation for " +
                                                    std::string(to_string(r.kind)) + " '" +
                                                    r.record_id + "'");
        }
    }
}

const std::vector<EmotionScore>* AnnotationSet::find(RecordKind kind, const std::string& id) const {
    const auto it = index_.find(annotation_key(kind, id));
    return it == index_.end() ? nullptr : &records_[it->second].emotions;
}

CorpusPaths CorpusPaths::in_directory(const std::filesystem::path& dir) {
    return {dir / "agents.jsonl", dir / "posts.jsonl", dir / "comments.jsonl"};
}

// ---- readers --------------------------------------------------------------

std::vector<AgentRecord> read_agents(std::istream& in, const std::string& source) {
    LineReader reader(in, source);
    std::vector<AgentRecord> out;
    std::set<std::string> seen;
    while (auto j = reader.next()) {
        AgentRecord r{reader.required(*j, "id"), reader.required(*j, "name"),
                      reader.optional(*j, "bio"), reader.optional(*j, "created_at")};
        reader.check_unique(seen, r.id);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<PostRecord> read_posts(std::istream& in, const std::string& source) {
    LineReader reader(in, source);
    std::vector<PostRecord> out;
    std::set<std::string> seen;
    while (auto j = reader.next()) {
        PostRecord r{reader.required(*j, "id"),          reader.required(*j, "agent_id"),
                     reader.required(*j, "submolt"),     reader.optional(*j, "title"),
                     reader.required(*j, "text"),        reader.optional(*j, "created_at")};
        reader.check_unique(seen, r.id);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<CommentRecord> read_comments(std::istream& in, const std::string& source) {
    LineReader reader(in, source);
    std::vector<CommentRecord> out;
    std::set<std::string> seen;
    while (auto j = reader.next()) {
        CommentRecord r{reader.required(*j, "id"), reader.required(*j, "post_id"),
                        reader.required(*j, "agent_id"), reader.required(*j, "text"),
                        reader.optional(*j, "created_at")};
        reader.check_unique(seen, r.id);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<AnnotationRecord> read_annotations(std::istream& in, const std::string& source) {
    LineReader reader(in, source);
    std::vector<AnnotationRecord> out;
    std::set<std::string> seen;
    while (auto j = reader.next()) {
        AnnotationRecord r;
        r.record_id = reader.required(*j, "record_id");
        if (r.record_id.empty()) reader.fail("empty record_id");
        const auto kind = parse_record_kind(reader.required(*j, "record_kind"));
        if (!kind) reader.fail("record_kind must be bio, post or comment");
        r.kind = *kind;

        const auto it = j->find("emotions");
        if (it == j->end() || !it->is_array()) reader.fail("missing required array \"emotions\"");
        if (it->empty()) reader.fail("annotation needs at least one emotion");
        for (const auto& e : *it) {
            if (!e.is_object()) reader.fail("emotion entry is not an object");
            const auto label_text = reader.required(e, "label");
            const auto label = try_parse_label(label_text);
            if (!label) reader.fail("unknown emotion label '" + label_text + "'", ErrorCode::UnknownLabel);
            const auto score = e.find("score");
            if (score == e.end() || !score->is_number()) reader.fail("emotion score must be a number");
            const double s = score->get<double>();
            if (!(s > 0.0 && s <= 1.0)) reader.fail("emotion score must lie in (0, 1]");
            r.emotions.push_back({*label, s});
        }
        if (!seen.insert(annotation_key(r.kind, r.record_id)).second) {
            reader.fail("duplicate annotation for '" + r.record_id + "'", ErrorCode::DuplicateId);
        }
        out.push_back(std::move(r));
    }
    return out;
}

Corpus load_corpus(const CorpusPaths& paths) {
    auto read_file = [](const std::filesystem::path& path, auto reader) {
        auto in = open_input(path);
        return reader(in, path.string());
    };
    auto agents = std::async(std::launch::async, [&] {
        return read_file(paths.agents, [](std::istream& in, const std::string& s) { return read_agents(in, s); });
    });
    auto posts = std::async(std::launch::async, [&] {
        return read_file(paths.posts, [](std::istream& in, const std::string& s) { return read_posts(in, s); });
    });
    auto comments = std::async(std::launch::async, [&] {
        return read_file(paths.comments,
                         [](std::istream& in, const std::string& s) { return read_comments(in, s); });
    });
    // get() in a fixed order so the reported error is load-order independent.
    auto a = agents.get();
    auto p = posts.get();
    auto c = comments.get();
    return Corpus(std::move(a), std::move(p), std::move(c));
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
    auto in = open_input(path);
    return AnnotationSet(read_annotations(in, path.string()));
}

// ---- writers --------------------------------------------------------------

void write_agents(std::ostream& out, std::span<const AgentRecord> records) {
    for (const auto& r : records) {
        Json j;
        j["id"] = r.id;
        j["name"] = r.name;
        put_optional(j, "bio", r.bio);
        put_optional(j, "created_at", r.created_at);
        write_line(out, j);
    }
}

void write_posts(std::ostream& out, std::span<const PostRecord> records) {
    for (const auto& r : records) {
        Json j;
        j["id"] = r.id;
        j["agent_id"] = r.agent_id;
        j["submolt"] = r.submolt;
        put_optional(j, "title", r.title);
        j["text"] = r.text;
        put_optional(j, "created_at", r.created_at);
        write_line(out, j);
    }
}

void write_comments(std::ostream& out, std::span<const CommentRecord> records) {
    for (const auto& r : records) {
        Json j;
        j["id"] = r.id;
        j["post_id"] = r.post_id;
        j["agent_id"] = r.agent_id;
        j["text"] = r.text;
        put_optional(j, "created_at", r.created_at);
        write_line(out, j);
    }
}

void write_annotations(std::ostream& out, std::span<const AnnotationRecord> records) {
    for (const auto& r : records) {
        Json emotions = Json::array();
        for (const auto& e : r.emotions) {
            Json entry;
            entry["label"] = canonical_name(e.label);
            entry["score"] = e.score;
            emotions.push_back(std::move(entry));
        }
        Json j;
        j["record_id"] = r.record_id;
        j["record_kind"] = to_string(r.kind);
        j["emotions"] = std::move(emotions);
        write_line(out, j);
    }
}

void write_corpus(const CorpusPaths& paths, const Corpus& corpus) {
    auto agents = open_output(paths.agents);
    write_agents(agents, corpus.agents());
    auto posts = open_output(paths.posts);
    write_posts(posts, corpus.posts());
    auto comments = open_output(paths.comments);
    write_comments(comments, corpus.comments());
}

// ---- join -----------------------------------------------------------------

JoinResult join_interactions(const Corpus& corpus, const AnnotationSet& annotations) {
    JoinResult out;
    std::map<std::string, AgentInputs> by_agent;
    for (const auto& a : corpus.agents()) {
        AgentInputs inputs;
        inputs.agent_id = a.id;
        if (const auto* bio = annotations.find(RecordKind::Bio, a.id)) inputs.bio_emotions = *bio;
        by_agent.emplace(a.id, std::move(inputs));
    }

    for (const auto& c : corpus.comments()) {
        if (corpus.is_dangling(c)) continue;
        const auto* post = corpus.find_post(c.post_id);
        InteractionContext ctx;
        ctx.comment_id = c.id;
        ctx.commenting_agent_id = c.agent_id;
        ctx.post_id = post->id;
        ctx.post_author_id = post->agent_id;
        if (const auto* e = annotations.find(RecordKind::Comment, c.id)) ctx.comment_emotions = *e;
        if (const auto* e = annotations.find(RecordKind::Post, post->id)) ctx.post_emotions = *e;
        if (corpus.find_agent(post->agent_id) != nullptr) {
            if (const auto* e = annotations.find(RecordKind::Bio, post->agent_id)) {
                ctx.author_persona_emotions = *e;
            }
        }
        out.contexts.push_back(std::move(ctx));
    }
    std::ranges::sort(out.contexts, [](const auto& x, const auto& y) { return x.comment_id < y.comment_id; });

    for (const auto& ctx : out.contexts) by_agent.at(ctx.commenting_agent_id).contexts.push_back(ctx);

    for (const auto& p : corpus.posts()) {
        const auto it = by_agent.find(p.agent_id);
        if (it == by_agent.end()) continue;
        PostEmotions pe{p.id, {}};
        if (const auto* e = annotations.find(RecordKind::Post, p.id)) pe.emotions = *e;
        it->second.own_posts.push_back(std::move(pe));
    }

    out.agents.reserve(by_agent.size());
    for (auto& [id, inputs] : by_agent) {
        std::ranges::sort(inputs.own_posts, [](const auto& x, const auto& y) { return x.post_id < y.post_id; });
        const bool has_stimulus = std::ranges::any_of(
            inputs.contexts, [](const InteractionContext& c) { return !c.post_emotions.empty(); });
        const bool has_reaction = std::ranges::any_of(
            inputs.contexts, [](const InteractionContext& c) { return !c.comment_emotions.empty(); });
        inputs.incomplete = inputs.bio_emotions.empty() || !has_stimulus || !has_reaction;
        out.agents.push_back(std::move(inputs));
    }
    return out;
}

// ---- stats ----------------------------------------------------------------

CorpusStats corpus_stats(const Corpus& corpus, const AnnotationSet& annotations) {
    CorpusStats s;
    std::set<std::string_view> authors;
    std::set<std::string_view> commenters;
    std::set<std::string_view> submolts;
    std::set<std::string_view> analyzed_submolts;

    for (const auto& p : corpus.posts()) {
        authors.insert(p.agent_id);
        submolts.insert(p.submolt);
        if (annotations.find(RecordKind::Post, p.id)) {
            ++s.posts.analyzed;
            analyzed_submolts.insert(p.submolt);
        }
    }
    for (const auto& c : corpus.comments()) {
        commenters.insert(c.agent_id);
        if (annotations.find(RecordKind::Comment, c.id)) ++s.comments.analyzed;
    }
    for (const auto& a : corpus.agents()) {
        if (annotations.find(RecordKind::Bio, a.id)) ++s.agents.analyzed;
        if (!a.bio || is_blank(*a.bio)) ++s.missing_bio_agents;
        if (!authors.contains(a.id)) ++s.no_post_agents;
        if (!commenters.contains(a.id)) ++s.no_comment_agents;
    }
    s.agents.total = corpus.agents().size();
    s.posts.total = corpus.posts().size();
    s.comments.total = corpus.comments().size();
    s.submolts = {submolts.size(), analyzed_submolts.size()};
    s.dangling_posts = corpus.dangling_post_count();
    s.dangling_comments = corpus.dangling_comment_count();
    return s;
}

} // namespace psr::ingest
