#include "psr/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "psr/error.hpp"
#include "psr/gmm.hpp"
#include "psr/random.hpp"
#include "psr/stub_annotator.hpp"

namespace psr::synth {

namespace {

using Json = nlohmann::ordered_json;
using Labels = std::vector<Emotion>;

constexpr std::array<std::string_view, 14> kFiller = {
    "the", "thread", "update", "today", "about", "this", "agents", "new",
    "version", "logs", "shipping", "submolt", "notes", "running"};

constexpr std::array<std::string_view, 5> kSubmolts = {"general", "philosophy", "builders",
                                                       "agents", "meta"};

// Affect mood model: mostly near neutral, with positive and negative lobes.
gmm::GmmModel anchor_model() {
    auto iso = [](double s) { return Mat3(s * Mat3::Identity()); };
    return gmm::GmmModel({{0.45, Vec3(0.50, 0.50, 0.50), iso(0.004)},
                          {0.35, Vec3(0.85, 0.55, 0.68), iso(0.010)},
                          {0.20, Vec3(0.15, 0.60, 0.35), iso(0.010)}});
}

double dist(Emotion x, Emotion y) { return distance(vad_of(x), vad_of(y)); }

VadPoint weighted_mean(const std::vector<std::pair<Emotion, double>>& parts) {
    double total = 0.0;
    Vec3 acc = Vec3::Zero();
    for (const auto& [e, w] : parts) {
        acc += w * vad_of(e).vec();
        total += w;
    }
    return VadPoint::from(acc / total);
}

struct Comment {
    std::size_t post;  // index into Design::posts
    Labels labels;
};

struct Design {
    Labels bio;
    std::vector<Labels> posts;
    std::vector<Comment> comments;
};

class Designer {
public:
    Designer(const SynthOptions& options, Rng& rng)
        : low_(options.tau - options.margin), high_(options.tau + options.margin), rng_(rng) {}

    std::optional<Design> design(BehaviorKind kind, std::optional<Resolution> res, Emotion a) {
        switch (kind) {
        case BehaviorKind::Type1:
            return Design{{a}, {{a}}, {{0, {a}}, {0, {a}}}};
        case BehaviorKind::Type2: return persona_consistent(a);
        case BehaviorKind::Type3: return stimulus_driven(a);
        case BehaviorKind::Type4: {
            const auto z = pick(far_from(a));
            if (!z) return std::nullopt;
            return Design{{a}, {{a}}, {{0, {*z}}}};
        }
        case BehaviorKind::Type5: {
            const auto z = pick(far_from(a));
            if (!z) return std::nullopt;
            const Emotion reply = res == Resolution::PersonaAligned ? a : *z;
            return Design{{a}, {{*z}}, {{0, {reply}}}};
        }
        case BehaviorKind::Unknown: break;
        }
        return std::nullopt;
    }

private:
    Labels far_from(Emotion a) const {
        Labels out;
        for (Emotion z : all_emotions()) {
            if (dist(a, z) >= high_) out.push_back(z);
        }
        return out;
    }

    template <typename T>
    std::optional<T> pick(const std::vector<T>& options) {
        if (options.empty()) return std::nullopt;
        return options[rng_.below(options.size())];
    }

    // Reply close to the persona, stimulus close to the persona, reply
    // and stimulus far apart.
    std::optional<Design> persona_consistent(Emotion a) {
        std::vector<std::pair<Emotion, Emotion>> options;
        for (Emotion x : all_emotions()) {
            for (Emotion z : all_emotions()) {
                if (dist(a, x) < low_ && dist(a, z) < low_ && dist(x, z) >= high_) options.emplace_back(x, z);
            }
        }
        const auto choice = pick(options);
        if (!choice) return std::nullopt;
        return Design{{a}, {{choice->first}}, {{0, {choice->second}}}};
    }

    // Replies copy the emotions of the post they answer; the agent answers
    // one of two posts more often, which pulls the reaction away from the
    // persona while staying near the pooled stimulus.
    std::optional<Design> stimulus_driven(Emotion a) {
        struct Option {
            Emotion x, y;
            int nx, ny;
        };
        static constexpr std::array<std::pair<int, int>, 6> kSkews = {
            {{2, 1}, {3, 1}, {4, 1}, {1, 2}, {1, 3}, {1, 4}}};
        std::vector<Option> options;
        const auto& all = all_emotions();
        for (std::size_t i = 0; i < all.size(); ++i) {
            for (std::size_t j = i + 1; j < all.size(); ++j) {
                const Emotion x = all[i];
                const Emotion y = all[j];
                const VadPoint s = weighted_mean({{x, 1.0}, {y, 1.0}});
                if (distance(vad_of(a), s) >= low_) continue;
                for (const auto& [nx, ny] : kSkews) {
                    const VadPoint r = weighted_mean({{x, double(nx)}, {y, double(ny)}});
                    if (distance(s, r) < low_ && distance(vad_of(a), r) >= high_) {
                        options.push_back({x, y, nx, ny});
                    }
                }
            }
        }
        const auto choice = pick(options);
        if (!choice) return std::nullopt;
        Design d{{a}, {{choice->x}, {choice->y}}, {}};
        for (int i = 0; i < choice->nx; ++i) d.comments.push_back({0, {choice->x}});
        for (int i = 0; i < choice->ny; ++i) d.comments.push_back({1, {choice->y}});
        return d;
    }

    double low_;
    double high_;
    Rng& rng_;
};

std::string render(const Labels& labels, Rng& rng) {
    std::string text;
    auto word = [&](std::string_view w) {
        if (!text.empty()) text += ' ';
        text += w;
    };
    const int lead = 2 + static_cast<int>(rng.below(3));
    for (int i = 0; i < lead; ++i) word(kFiller[rng.below(kFiller.size())]);
    for (Emotion e : labels) {
        if (e == Emotion::neutral) continue;
        const auto words = ingest::trigger_words(e);
        word(words[rng.below(words.size())]);
        word(kFiller[rng.below(kFiller.size())]);
    }
    text += '.';

    Labels expected = labels;
    std::ranges::sort(expected);
    std::vector<EmotionScore> want;
    for (Emotion e : expected) want.push_back({e, 1.0});
    if (ingest::stub_annotate(text) != want) {
        throw std::logic_error("rendered text does not annotate to its labels: " + text);
    }
    return text;
}

std::string timestamp(int minutes) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "2026-01-%02dT%02d:%02d:00Z", 27 + minutes / 1440, (minutes / 60) % 24,
                  minutes % 60);
    return buf;
}

std::string numbered(const char* prefix, std::size_t n, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%0*zu", prefix, width, n);
    return buf;
}

} // namespace

SynthFixture generate(const SynthOptions& options) {
    const auto& c = options.counts;
    if (c.broadcasters < 1) throw Error(ErrorCode::InvalidArgument, "at least one broadcaster is needed");
    if (c.total() > 1000) throw Error(ErrorCode::InvalidArgument, "at most 1000 agents");

    struct Slot {
        BehaviorType type;
        enum class Role { Designed, Broadcaster, BioOnly } role;
    };
    std::vector<Slot> slots;
    auto plant = [&](int n, BehaviorType t, Slot::Role role) {
        for (int i = 0; i < n; ++i) slots.push_back({t, role});
    };
    using K = BehaviorKind;
    plant(c.type1, {K::Type1, {}}, Slot::Role::Designed);
    plant(c.type2, {K::Type2, {}}, Slot::Role::Designed);
    plant(c.type3, {K::Type3, {}}, Slot::Role::Designed);
    plant(c.type4, {K::Type4, {}}, Slot::Role::Designed);
    plant(c.type5_persona, {K::Type5, Resolution::PersonaAligned}, Slot::Role::Designed);
    plant(c.type5_stimulus, {K::Type5, Resolution::StimulusAligned}, Slot::Role::Designed);
    plant(c.broadcasters, {K::Unknown, {}}, Slot::Role::Broadcaster);
    plant(c.bio_only, {K::Unknown, {}}, Slot::Role::BioOnly);

    Rng rng(options.seed);
    // Fisher-Yates with the portable generator.
    for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[rng.below(i)]);

    const auto moods = anchor_model();
    std::uint64_t mood_draws = 0;
    auto draw_anchor = [&] {
        const Vec3 x = gmm::sample(moods, 1, Rng::derive(options.seed, ++mood_draws)).front();
        return nearest_emotion(VadPoint::from(x));
    };

    std::vector<ingest::AgentRecord> agents;
    std::vector<ingest::PostRecord> posts;
    std::vector<ingest::CommentRecord> comments;
    std::vector<PlantedAgent> planted;
    std::vector<std::string> broadcasters;
    int clock = 0;

    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto id = numbered("agent", i, 3);
        planted.push_back({id, slots[i].type});
        ingest::AgentRecord agent{id, "Agent " + std::to_string(i), std::nullopt, timestamp(clock++)};
        if (slots[i].role == Slot::Role::Broadcaster) broadcasters.push_back(id);
        if (slots[i].role == Slot::Role::BioOnly) agent.bio = render({draw_anchor()}, rng);
        agents.push_back(std::move(agent));
    }

    auto add_post = [&](const std::string& author, const Labels& labels) {
        const auto id = numbered("post", posts.size(), 4);
        const bool titled = rng.below(2) == 0;
        posts.push_back({id, author, std::string(kSubmolts[rng.below(kSubmolts.size())]),
                         titled ? std::optional<std::string>("notes from the submolt") : std::nullopt,
                         render(labels, rng), timestamp(clock++)});
        return id;
    };

    // Background broadcasts nobody answers.
    for (const auto& b : broadcasters) add_post(b, {Emotion::neutral});

    Designer designer(options, rng);
    std::size_t next_broadcaster = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].role != Slot::Role::Designed) continue;
        std::optional<Design> d;
        for (int attempt = 0; attempt < 1000 && !d; ++attempt) {
            d = designer.design(slots[i].type.kind, slots[i].type.resolution, draw_anchor());
        }
        if (!d) throw Error(ErrorCode::InvalidArgument, "could not design planted agent " + planted[i].agent_id);

        auto& agent = agents[i];
        agent.bio = render(d->bio, rng);
        std::vector<std::string> post_ids;
        for (const auto& labels : d->posts) {
            post_ids.push_back(add_post(broadcasters[next_broadcaster], labels));
            next_broadcaster = (next_broadcaster + 1) % broadcasters.size();
        }
        for (const auto& reply : d->comments) {
            comments.push_back({numbered("comment", comments.size(), 5), post_ids[reply.post], agent.id,
                                render(reply.labels, rng), timestamp(clock++)});
        }
        // An unanswered post of the agent's own, used only by own-posts mode.
        add_post(agent.id, d->bio);
    }

    return {ingest::Corpus(std::move(agents), std::move(posts), std::move(comments)), std::move(planted)};
}

void write_fixture(const std::filesystem::path& dir, const SynthFixture& fixture) {
    std::filesystem::create_directories(dir);
    ingest::write_corpus(ingest::CorpusPaths::in_directory(dir), fixture.corpus);
    std::ofstream out(dir / "planted.jsonl", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write planted.jsonl");
    for (const auto& p : fixture.planted) {
        Json j;
        j["agent_id"] = p.agent_id;
        j["type"] = to_string(p.type.kind);
        j["resolution"] = p.type.resolution ? Json(to_string(*p.type.resolution)) : Json(nullptr);
        out << j.dump() << '\n';
    }
}

std::vector<PlantedAgent> read_planted(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string(), path.string());
    std::vector<PlantedAgent> out;
    std::string line;
    while (std::getline(in, line)) {
        if (ingest::is_blank(line)) continue;
        const auto j = Json::parse(line);
        PlantedAgent p{j.at("agent_id").get<std::string>(),
                       {parse_behavior_kind(j.at("type").get<std::string>()), std::nullopt}};
        if (!j.at("resolution").is_null()) p.type.resolution = parse_resolution(j.at("resolution").get<std::string>());
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace psr::synth
