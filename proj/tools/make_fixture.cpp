// Writes the synthetic end-to-end fixture: a message universe with two channel groups, seeds,
// per-chunk scores from six classifiers, expert annotations, topic vectors, document embeddings,
// a config file and a golden labels.jsonl counted directly from the scores.
//
//   make_fixture <out-dir>

#include <chanscope/archive.hpp>
#include <chanscope/chunking.hpp>
#include <chanscope/rng.hpp>
#include <chanscope/topics.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace chanscope;

namespace {

constexpr std::size_t kClassifiers = 6;
constexpr std::size_t kDim = 16;
constexpr std::uint64_t kSeed = 20210315;

const std::vector<std::string> kWords = {
    "heute", "morgen", "wieder", "niemand", "alle", "regierung", "bericht", "zahlen", "stadt", "land",
    "leute", "frage", "antwort", "video", "kanal", "gruppe", "woche", "monat", "jahr", "welt",
    "nachricht", "meinung", "wahrheit", "medien", "politik", "schule", "arbeit", "familie", "kinder", "strasse",
    "demo", "polizei", "impfung", "grenze", "wahl", "partei", "gericht", "gesetz", "zukunft", "freiheit"};
const std::vector<std::string> kSlurs = {"abschaum", "pack", "gesindel", "ratten", "verraeter", "hetze"};

std::string name(const std::string& prefix, std::size_t i) {
    std::string n = std::to_string(i);
    return prefix + "_" + (n.size() < 2 ? "0" + n : n);
}

std::string sentence(Rng& rng, std::size_t words, bool abusive) {
    std::string s;
    for (std::size_t w = 0; w < words; ++w) {
        std::string word = (abusive && rng.bernoulli(0.2)) ? kSlurs[rng.index(kSlurs.size())] : kWords[rng.index(kWords.size())];
        if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
        s += (w ? " " : "") + word;
    }
    return s + (rng.bernoulli(0.8) ? "." : "!");
}

std::string message_text(Rng& rng, bool abusive) {
    bool long_message = rng.bernoulli(0.03);
    std::size_t sentences = long_message ? 40 + rng.index(30) : 1 + rng.index(6);
    std::string t;
    for (std::size_t i = 0; i < sentences; ++i) t += (i ? " " : "") + sentence(rng, 5 + rng.index(11), abusive);
    if (long_message && rng.bernoulli(0.3)) {
        // one unpunctuated run longer than a chunk
        std::string run;
        for (std::size_t w = 0; w < 450; ++w) run += " " + kWords[rng.index(kWords.size())];
        t += run;
    }
    return t;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double round4(double p) { return std::clamp(std::round(p * 1e4) / 1e4, 0.0, 1.0); }

struct ChannelPlan {
    std::string id;
    bool hater = false;
    std::string lang = "de";
    std::vector<std::string> must_mention; // referenced at least once
    std::vector<std::string> pool;         // random in-group references
    std::size_t messages = 0;
};

std::vector<double> unit(std::vector<double> v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

void write(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw Error("cannot write " + p.string());
}

} // namespace

int main(int argc, char** argv) try {
    if (argc != 2) {
        std::cerr << "usage: make_fixture <out-dir>\n";
        return 2;
    }
    const fs::path out = argv[1];
    Rng rng(kSeed);

    // --- channel plan ----------------------------------------------------
    // hate_00..03 and news_00..01 are seeds; seeds reference the round-2 members of their group;
    // round-3 members are referenced by six round-2 channels each.
    std::vector<std::string> seeds = {"hate_00", "hate_01", "hate_02", "hate_03", "news_00", "news_01"};
    std::map<std::string, ChannelPlan> plan;
    auto group = [&](const std::string& prefix, bool hater, std::size_t n, std::size_t n_seeds, std::size_t round2_end) {
        for (std::size_t i = 0; i < n; ++i) {
            ChannelPlan c;
            c.id = name(prefix, i);
            c.hater = hater;
            c.messages = 30 + rng.index(30);
            if (!hater && i >= 26) c.lang = "en";
            for (std::size_t j = n_seeds; j < round2_end; ++j)
                if (j != i) c.pool.push_back(name(prefix, j));
            if (i < n_seeds) {
                for (std::size_t j = n_seeds + i; j < round2_end; j += n_seeds) c.must_mention.push_back(name(prefix, j));
                c.pool.clear(); // seeds only reference their assigned round-2 channels
            } else {
                for (std::size_t j = round2_end; j < n; ++j) c.pool.push_back(name(prefix, j));
            }
            plan[c.id] = c;
        }
        for (std::size_t j = round2_end; j < n; ++j)
            for (std::size_t r = 0; r < 6; ++r) plan[name(prefix, n_seeds + (j * 7 + r * 3) % (round2_end - n_seeds))].must_mention.push_back(name(prefix, j));
    };
    group("hate", true, 30, 4, 20);
    group("news", false, 30, 2, 20);
    // fringe_d has six distinct round-2 referrers and is collected; fringe_e has four and is not
    ChannelPlan d{"fringe_d", true, "de", {}, {}, 40};
    ChannelPlan e{"fringe_e", true, "de", {}, {}, 40};
    plan[d.id] = d;
    plan[e.id] = e;
    for (std::size_t r = 0; r < 6; ++r) plan[name("hate", 4 + r)].must_mention.push_back("fringe_d");
    for (std::size_t r = 0; r < 4; ++r) plan[name("hate", 12 + r)].must_mention.push_back("fringe_e");
    plan["hate_00"].must_mention.push_back("gone_01"); // referenced but not in the universe
    for (std::size_t i = 0; i < 5; ++i) plan[name("island", i)] = ChannelPlan{name("island", i), false, "de", {}, {}, 20};

    // --- messages ----------------------------------------------------------
    const Timestamp start = make_timestamp(2020, 1, 1);
    const double span_s = 425.0 * 86400.0; // up to 2021-03-01
    Archive universe;
    std::map<MessageKey, bool> truth;
    std::int64_t next_id = 1000;
    for (auto& [id, c] : plan) {
        universe.channels[id] = Channel{id, 0, false, {}, false};
        auto& msgs = universe.messages[id];
        std::vector<std::string> must = c.must_mention;
        for (std::size_t k = 0; k < c.messages; ++k) {
            RawMessage m;
            m.channel_id = id;
            m.message_id = next_id++;
            double u = rng.uniform();
            m.timestamp = start + std::chrono::seconds(static_cast<std::int64_t>(u * span_s));
            if (k == 0) m.timestamp = make_timestamp(2018, 6, 1) + std::chrono::seconds(rng.index(86400 * 30)); // before the period
            double rate = c.hater ? 0.25 + 0.2 * u : 0.01;
            bool abusive = rng.bernoulli(rate);
            m.text = message_text(rng, abusive);
            m.language = (c.lang == "en" || rng.bernoulli(0.05)) ? "en" : "de";
            if (!must.empty() && k >= 1) {
                m.mentions.push_back(must.back());
                must.pop_back();
            } else if (!c.pool.empty() && rng.bernoulli(0.35)) {
                m.mentions.push_back(c.pool[rng.index(c.pool.size())]);
            }
            if (!c.pool.empty() && rng.bernoulli(0.15)) {
                auto f = c.pool[rng.index(c.pool.size())];
                if (f != id) m.forwarded_from = f;
            }
            truth[m.key()] = abusive;
            msgs.push_back(std::move(m));
        }
        if (!must.empty()) throw Error("channel " + id + " has too few messages for its references");
    }

    FixtureFetcher fetcher;
    for (const auto& [id, msgs] : universe.messages)
        for (const auto& m : msgs) fetcher.add(m);
    CrawlConfig cc;
    cc.period_start = start;
    cc.period_end = make_timestamp(2021, 3, 1);
    auto crawl = snowball_crawl(fetcher, seeds, cc);
    const auto& a = crawl.archive;
    if (!a.channels.count("fringe_d") || a.channels.count("fringe_e") || !a.channels.count("hate_29"))
        throw Error("crawl structure differs from the plan");

    // --- scores ------------------------------------------------------------
    std::vector<std::ostringstream> score_files(kClassifiers);
    std::ostringstream golden;
    std::vector<double> bias = {0.0, 0.3, -0.3, 0.6, -0.6, 0.1};
    for (const auto& [id, msgs] : a.messages)
        for (const auto& m : msgs) {
            auto chunks = chunk_message(m.text, m.key());
            bool abusive = truth.at(m.key());
            std::size_t carrier = rng.index(chunks.size());
            std::size_t votes = 0;
            for (std::size_t c = 0; c < kClassifiers; ++c) {
                if (c == kClassifiers - 1 && rng.bernoulli(0.02)) continue; // scorer gap: counts as neutral
                double best = 0.0;
                for (std::size_t ch = 0; ch < chunks.size(); ++ch) {
                    bool signal = abusive && ch == carrier;
                    double p = round4(sigmoid((signal ? 1.8 : -1.8) + bias[c] + 1.5 * rng.normal()));
                    best = std::max(best, p);
                    io::ordered_json j;
                    j["channel_id"] = m.channel_id;
                    j["message_id"] = m.message_id;
                    j["chunk_index"] = ch;
                    j["classifier_id"] = "clf" + std::to_string(c + 1);
                    j["p_abusive"] = p;
                    score_files[c] << j.dump() << '\n';
                }
                votes += best >= 0.5;
            }
            io::ordered_json g;
            g["channel_id"] = m.channel_id;
            g["message_id"] = m.message_id;
            g["label"] = votes >= 3 ? "abusive" : "neutral";
            g["votes"] = votes;
            golden << g.dump() << '\n';
        }

    // --- annotations -------------------------------------------------------
    std::vector<MessageKey> keys;
    for (const auto& [id, msgs] : a.messages)
        for (const auto& m : msgs) keys.push_back(m.key());
    rng.shuffle(keys);
    keys.resize(240);
    std::sort(keys.begin(), keys.end());
    std::ostringstream ann;
    ann << "message_key,annotator_id,label\n";
    auto rate = [&](bool t) { return (rng.bernoulli(0.08) ? !t : t) ? "abusive" : "neutral"; };
    for (const auto& k : keys) {
        bool t = truth.at(k);
        std::string r1 = rate(t), r2 = rate(t);
        ann << to_string(k) << ",expert_a," << r1 << "\n" << to_string(k) << ",expert_b," << r2 << "\n";
        if (r1 != r2) ann << to_string(k) << ",expert_c," << rate(t) << "\n";
    }

    // --- topics and document embeddings ------------------------------------
    std::vector<std::vector<double>> topics;
    io::ordered_json tj = io::ordered_json::array();
    for (std::size_t t = 0; t < kTopicCount; ++t) {
        std::vector<double> v(kDim);
        for (auto& x : v) x = rng.normal();
        topics.push_back(unit(v));
        tj.push_back({{"topic_id", std::string(kTopicNames[t])}, {"terms", {kWords[t], kWords[t + 9]}}, {"vector", topics.back()}});
    }
    const std::vector<std::size_t> hater_topics = {0, 1, 2, 3, 8}, neutral_topics = {2, 4, 5, 6, 7};
    std::ostringstream docs;
    for (const auto& [id, msgs] : a.messages) {
        bool hater = plan.at(id).hater;
        const auto& pref = hater ? hater_topics : neutral_topics;
        for (const auto& m : msgs) {
            std::vector<double> v(kDim);
            for (auto& x : v) x = 0.35 * rng.normal();
            if (!rng.bernoulli(0.15)) {
                std::size_t t = rng.bernoulli(0.85) ? pref[rng.index(pref.size())] : rng.index(kTopicCount);
                for (std::size_t d = 0; d < kDim; ++d) v[d] += topics[t][d];
            }
            for (auto& x : v) x = std::round(x * 1e4) / 1e4;
            io::ordered_json j;
            j["channel_id"] = m.channel_id;
            j["message_id"] = m.message_id;
            j["vector"] = v;
            docs << j.dump() << '\n';
        }
    }

    // --- files ---------------------------------------------------------------
    std::ostringstream uni, seed_list;
    export_messages(uni, universe);
    for (const auto& s : seeds) seed_list << s << "\n";
    write(out / "universe.jsonl", uni.str());
    write(out / "seeds.txt", seed_list.str());
    for (std::size_t c = 0; c < kClassifiers; ++c) write(out / "scores" / ("clf" + std::to_string(c + 1) + ".jsonl"), score_files[c].str());
    write(out / "annotations.csv", ann.str());
    write(out / "topics.json", tj.dump(2) + "\n");
    write(out / "doc_embeddings.jsonl", docs.str());
    write(out / "golden" / "labels.jsonl", golden.str());
    write(out / "config.cfg",
          "# synthetic end-to-end fixture\n"
          "seed = 42\n"
          "seeds = seeds.txt\n"
          "universe = universe.jsonl\n"
          "scores = scores\n"
          "annotations = annotations.csv\n"
          "topics = topics.json\n"
          "doc_embeddings = doc_embeddings.jsonl\n"
          "crawl.period_start = 2020-01-01T00:00:00Z\n"
          "crawl.period_end = 2021-03-01T00:00:00Z\n"
          "ensemble.t = 3\n"
          "dgi.epochs_max = 300\n"
          "dgi.learning_rate = 0.005\n"
          "head.epochs_max = 150\n");
    std::cout << "collected " << a.channels.size() << " channels, " << a.message_count() << " messages\n";
    return 0;
} catch (const std::exception& e) {
    std::cerr << "make_fixture: " << e.what() << "\n";
    return 1;
}
