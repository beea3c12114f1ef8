#pragma once

// Line-delimited corpus files (agents, posts, comments, annotations):
// loading with validation, canonical serialisation, the per-agent join
// that feeds profile building, and corpus counts.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "psr/profile.hpp"
#include "psr/vad.hpp"

namespace psr::ingest {

struct AgentRecord {
    std::string id;
    std::string name;
    std::optional<std::string> bio;
    std::optional<std::string> created_at;

    friend bool operator==(const AgentRecord&, const AgentRecord&) = default;
};

struct PostRecord {
    std::string id;
    std::string agent_id;
    std::string submolt;
    std::optional<std::string> title;
    std::string text;
    std::optional<std::string> created_at;

    friend bool operator==(const PostRecord&, const PostRecord&) = default;
};

struct CommentRecord {
    std::string id;
    std::string post_id;
    std::string agent_id;
    std::string text;
    std::optional<std::string> created_at;

    friend bool operator==(const CommentRecord&, const CommentRecord&) = default;
};

enum class RecordKind { Bio, Post, Comment };

std::string_view to_string(RecordKind kind);
std::optional<RecordKind> parse_record_kind(std::string_view text);

struct AnnotationRecord {
    std::string record_id;
    RecordKind kind = RecordKind::Comment;
    std::vector<EmotionScore> emotions;  // at least one, scores in (0, 1]

    friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

// Immutable validated corpus. Records keep file order; dangling
// references are recorded, not rejected.
class Corpus {
public:
    Corpus() = default;
    // Throws Error{DuplicateId} on a repeated id within one record kind.
    Corpus(std::vector<AgentRecord> agents, std::vector<PostRecord> posts,
           std::vector<CommentRecord> comments);

    std::span<const AgentRecord> agents() const noexcept { return agents_; }
    std::span<const PostRecord> posts() const noexcept { return posts_; }
    std::span<const CommentRecord> comments() const noexcept { return comments_; }

    const AgentRecord* find_agent(const std::string& id) const;
    const PostRecord* find_post(const std::string& id) const;

    // Posts whose author is not a loaded agent.
    bool is_dangling(const PostRecord& post) const;
    // Comments whose post or author is not loaded; excluded from joins.
    bool is_dangling(const CommentRecord& comment) const;
    std::size_t dangling_post_count() const;
    std::size_t dangling_comment_count() const;

private:
    std::vector<AgentRecord> agents_;
    std::vector<PostRecord> posts_;
    std::vector<CommentRecord> comments_;
    std::unordered_map<std::string, std::size_t> agent_index_;
    std::unordered_map<std::string, std::size_t> post_index_;
};

class AnnotationSet {
public:
    AnnotationSet() = default;
    // Throws Error{DuplicateId} on a repeated (kind, record_id).
    explicit AnnotationSet(std::vector<AnnotationRecord> records);

    std::span<const AnnotationRecord> records() const noexcept { return records_; }
    // Null when the record has no annotation.
    const std::vector<EmotionScore>* find(RecordKind kind, const std::string& id) const;

private:
    std::vector<AnnotationRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct CorpusPaths {
    std::filesystem::path agents;
    std::filesystem::path posts;
    std::filesystem::path comments;

    // <dir>/agents.jsonl, <dir>/posts.jsonl, <dir>/comments.jsonl
    static CorpusPaths in_directory(const std::filesystem::path& dir);
};

// Throws Error{MalformedLine | DuplicateId | Io} carrying file and line.
std::vector<AgentRecord> read_agents(std::istream& in, const std::string& source = "agents");
std::vector<PostRecord> read_posts(std::istream& in, const std::string& source = "posts");
std::vector<CommentRecord> read_comments(std::istream& in, const std::string& source = "comments");
std::vector<AnnotationRecord> read_annotations(std::istream& in,
                                               const std::string& source = "annotations");

// The three files are read concurrently.
Corpus load_corpus(const CorpusPaths& paths);
AnnotationSet load_annotations(const std::filesystem::path& path);

// Canonical form: one compact object per line, schema field order,
// absent optionals omitted.
void write_agents(std::ostream& out, std::span<const AgentRecord> records);
void write_posts(std::ostream& out, std::span<const PostRecord> records);
void write_comments(std::ostream& out, std::span<const CommentRecord> records);
void write_annotations(std::ostream& out, std::span<const AnnotationRecord> records);
void write_corpus(const CorpusPaths& paths, const Corpus& corpus);

// Inputs for profile building, one entry per agent in the corpus.
struct AgentInputs {
    std::string agent_id;
    std::vector<EmotionScore> bio_emotions;          // empty without an annotated bio
    std::vector<InteractionContext> contexts;        // the agent's comments, by comment_id
    std::vector<PostEmotions> own_posts;             // by post_id
    bool incomplete = false;                         // P, S or R input missing
};

struct JoinResult {
    std::vector<InteractionContext> contexts;  // one per non-dangling comment, by comment_id
    std::vector<AgentInputs> agents;           // by agent_id
};

JoinResult join_interactions(const Corpus& corpus, const AnnotationSet& annotations);

struct CategoryCount {
    std::size_t total = 0;
    std::size_t analyzed = 0;

    friend bool operator==(const CategoryCount&, const CategoryCount&) = default;
};

struct CorpusStats {
    CategoryCount agents;    // analyzed: annotated bio
    CategoryCount posts;     // analyzed: annotated post
    CategoryCount comments;  // analyzed: annotated comment
    CategoryCount submolts;  // analyzed: has an annotated post
    std::size_t missing_bio_agents = 0;
    std::size_t no_post_agents = 0;
    std::size_t no_comment_agents = 0;
    std::size_t dangling_posts = 0;
    std::size_t dangling_comments = 0;

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

CorpusStats corpus_stats(const Corpus& corpus, const AnnotationSet& annotations);

// True when the text is empty after trimming whitespace.
bool is_blank(std::string_view text);

// Title and body joined by one space; the body alone without a title.
std::string post_annotation_text(const PostRecord& post);

} // namespace psr::ingest
