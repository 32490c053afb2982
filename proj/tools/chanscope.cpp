// chanscope: file-based pipeline from a crawled message archive to channel labels, graph
// embeddings, communities and prevalence trends.

#include "cli_support.hpp"

#include <chanscope/chanscope.hpp>
#include <chanscope/svg.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace chanscope::cli {
namespace {

std::vector<ConfigKey> config_schema() {
    return {
        {"seed", "42", "global seed for every randomised stage"},
        // input files
        {"seeds", "seeds.txt", "seed channel list", true},
        {"universe", "universe.jsonl", "message universe served to the crawler", true},
        {"messages", "", "messages.jsonl to ingest; empty = crawl output", true},
        {"crawl_log", "", "crawl_log.csv; empty = crawl output when present", true},
        {"scores", "scores", "comma-separated score files or directories of *.jsonl", true},
        {"annotations", "annotations.csv", "expert annotations", true},
        {"topics", "topics.json", "nine topic vectors", true},
        {"doc_embeddings", "doc_embeddings.jsonl", "per-message document embeddings", true},
        // crawl
        {"crawl.rounds", "3", "snowball rounds"},
        {"crawl.min_referrers", "5", "distinct referrers required from round 3 on"},
        {"crawl.period_start", "2019-01-01T00:00:00Z", "first instant collected"},
        {"crawl.period_end", "2021-03-15T00:00:00Z", "end of collection (exclusive)"},
        // classification
        {"chunk.max_words", "412", "maximum words per chunk"},
        {"baseline.enabled", "false", "add the character n-gram baseline as classifier 'baseline'"},
        {"ensemble.t", "3", "abusive votes needed"},
        {"ensemble.tau", "0.5", "per-classifier probability threshold"},
        {"ensemble.classifiers", "", "comma-separated classifier ids; empty = all scored"},
        // channel labels
        {"threshold.classifier", "ensemble", "metrics entry whose confusion matrix is reweighted"},
        {"threshold.pi", "0.062", "assumed prevalence of abusive messages"},
        {"threshold.epsilon", "0.01", "maximum channel-level error"},
        // graph
        {"graph.filter", "german_active", "node filter: german_active | all"},
        {"graph.active_start", "", "activity window start; empty = crawl.period_start"},
        {"graph.active_end", "", "activity window end; empty = crawl.period_end"},
        // topics
        {"topics.theta", "0.5", "cosine threshold for a topic hit"},
        // graph embedding
        {"dgi.epochs_max", "500", ""},
        {"dgi.patience", "20", ""},
        {"dgi.learning_rate", "0.001", ""},
        {"dgi.layer_dims", "32,32", ""},
        {"dgi.activations", "relu,relu", ""},
        {"dgi.sample_in", "10", "in-neighbours sampled per layer"},
        {"dgi.sample_out", "10", "out-neighbours sampled per layer"},
        {"dgi.full_batch", "false", "train without neighbour sampling"},
        // head
        {"head.epochs_max", "150", ""},
        {"head.patience", "60", ""},
        {"head.min_delta", "0.05", ""},
        {"head.hidden", "16", ""},
        {"head.learning_rate", "0.01", ""},
        {"head.batch_size", "32", ""},
        // communities
        {"dbscan.eps", "auto", "neighbourhood radius; auto = median k-NN distance"},
        {"dbscan.knn", "4", "k for the auto radius"},
        {"dbscan.min_pts", "5", ""},
        // trend
        {"trend.first", "", "first month YYYY-MM; empty = month of crawl.period_start"},
        {"trend.end", "", "end month YYYY-MM (exclusive); empty = month of crawl.period_end"},
    };
}

struct Context {
    Config& cfg;
    Workspace& ws;
    std::uint64_t seed;
    io::ordered_json summary = io::ordered_json::object();
    std::vector<std::string> lines; // human-readable summary
};

[[noreturn]] void config_error(const std::string& key, const std::string& msg) {
    throw Error("config key '" + key + "': " + msg);
}

Timestamp config_time(const Config& cfg, const std::string& key) {
    auto t = parse_timestamp(cfg.str(key));
    if (!t) config_error(key, "not an RFC 3339 timestamp");
    return *t;
}

YearMonth config_month(const Config& cfg, const std::string& key) {
    auto m = parse_year_month(cfg.str(key));
    if (!m) config_error(key, "not a YYYY-MM month");
    return *m;
}

std::string join(const std::vector<std::string>& v, const char* sep = ",") {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : sep) + x;
    return s;
}

template <typename F>
std::string render(F&& f) {
    std::ostringstream out;
    f(out);
    return out.str();
}

// ---------------------------------------------------------------------------
// Shared loaders

std::vector<std::string> read_seed_list(Context& c, const fs::path& p) {
    std::vector<std::string> seeds;
    c.ws.read(p, [&](std::istream& in) {
        std::string line;
        std::size_t lineno = 0;
        std::set<std::string> seen;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            if (line.find_first_of(" \t,") != std::string::npos)
                throw ParseError(lineno, "channel id must not contain whitespace or commas");
            if (!seen.insert(line).second) throw ParseError(lineno, "duplicate seed '" + line + "'");
            seeds.push_back(line);
        }
    });
    return seeds;
}

fs::path messages_path(Context& c) { return c.cfg.empty("messages") ? c.ws.out("messages.jsonl") : c.cfg.path("messages"); }

Archive load_archive(Context& c) {
    auto log_path = c.cfg.empty("crawl_log") ? c.ws.out("crawl_log.csv") : c.cfg.path("crawl_log");
    std::optional<std::vector<CrawlLogEntry>> log;
    std::vector<std::string> seeds;
    if (!c.cfg.empty("crawl_log") || fs::exists(log_path)) {
        c.ws.read(log_path, [&](std::istream& in) { log = parse_crawl_log(in); }, "crawl");
    } else if (fs::exists(c.cfg.path("seeds"))) {
        seeds = read_seed_list(c, c.cfg.path("seeds"));
    }
    ParseResult r;
    c.ws.read(messages_path(c), [&](std::istream& in) { r = parse_archive(in, log ? &*log : nullptr, seeds); }, "crawl");
    for (const auto& w : r.warnings) std::cerr << "chanscope: warning: " << c.ws.display(messages_path(c)) << ": " << w << "\n";
    return std::move(r.archive);
}

std::vector<MessageKey> message_keys(const Archive& a) {
    std::vector<MessageKey> keys;
    for (const auto& [_, msgs] : a.messages)
        for (const auto& m : msgs) keys.push_back(m.key());
    return keys;
}

std::map<MessageKey, std::string> message_texts(const Archive& a) {
    std::map<MessageKey, std::string> t;
    for (const auto& [_, msgs] : a.messages)
        for (const auto& m : msgs) t.emplace(m.key(), m.text);
    return t;
}

struct ChunkRecord {
    MessageKey key;
    std::size_t index = 0;
    std::string text;
};

std::vector<ChunkRecord> load_chunks(Context& c) {
    std::vector<ChunkRecord> chunks;
    c.ws.read(c.ws.out("chunks.jsonl"), [&](std::istream& in) {
        io::for_each_jsonl(in, [&](std::size_t, const io::json& j) {
            ChunkRecord r;
            r.key = {io::require<std::string>(j, "channel_id"), io::require<std::int64_t>(j, "message_id")};
            auto idx = io::require<std::int64_t>(j, "chunk_index");
            if (idx < 0) throw Error("chunk_index must be non-negative");
            r.index = static_cast<std::size_t>(idx);
            r.text = io::require<std::string>(j, "text");
            chunks.push_back(std::move(r));
        });
    }, "chunk");
    return chunks;
}

ScoreTable load_message_scores(Context& c) {
    ScoreTable t;
    ChunkScoreTable chunked;
    c.ws.read(c.ws.out("scores.jsonl"), [&](std::istream& in) {
        read_scores(in, t, chunked);
        if (chunked.size()) throw Error("expected message-level scores without chunk_index");
    }, "score-merge");
    return t;
}

std::map<MessageKey, MessageLabel> load_labels(Context& c) {
    std::map<MessageKey, MessageLabel> labels;
    c.ws.read(c.ws.out("labels.jsonl"), [&](std::istream& in) { labels = read_labels(in); }, "ensemble");
    return labels;
}

std::map<std::string, ChannelLabel> load_channel_labels(Context& c) {
    std::map<std::string, ChannelLabel> out;
    c.ws.read(c.ws.out("channel_labels.csv"), [&](std::istream& in) {
        io::for_each_csv_row(in, {"channel_id", "abusive_count", "label"}, [&](std::size_t, const auto& f) {
            ChannelLabel l{f[0], io::parse_int(f[1]), parse_channel_class(f[2])};
            if (!out.emplace(l.channel_id, l).second) throw Error("duplicate channel '" + l.channel_id + "'");
        });
    }, "label-channels");
    return out;
}

ChannelGraph load_graph(Context& c) {
    ChannelGraph g;
    c.ws.read(c.ws.out("graph.graphml"), [&](std::istream& in) { g = import_graphml(in); }, "build-graph");
    return g;
}

struct Embeddings {
    std::vector<std::string> ids;
    nn::Matrix x;
};

Embeddings load_embeddings(Context& c) {
    Embeddings e;
    std::vector<std::vector<double>> rows;
    c.ws.read(c.ws.out("channel_embeddings.jsonl"), [&](std::istream& in) {
        std::set<std::string> seen;
        io::for_each_jsonl(in, [&](std::size_t, const io::json& j) {
            auto id = io::require<std::string>(j, "channel_id");
            auto v = io::require_vector(j, "vector");
            if (!seen.insert(id).second) throw Error("duplicate channel '" + id + "'");
            if (!rows.empty() && v.size() != rows.front().size()) throw Error("embedding dimension differs");
            if (v.empty()) throw Error("empty embedding");
            e.ids.push_back(id);
            rows.push_back(std::move(v));
        });
        if (rows.empty()) throw Error("no channel embeddings");
    }, "embed");
    e.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t d = 0; d < rows[i].size(); ++d) e.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
    return e;
}

std::set<std::string> seed_channels(const Archive& a) {
    std::set<std::string> s;
    for (const auto& [id, ch] : a.channels)
        if (ch.is_seed) s.insert(id);
    return s;
}

// ---------------------------------------------------------------------------
// Stages

void cmd_crawl(Context& c) {
    auto seeds = read_seed_list(c, c.cfg.path("seeds"));
    ParseResult universe;
    c.ws.read(c.cfg.path("universe"), [&](std::istream& in) { universe = parse_archive(in); });
    FixtureFetcher fetcher;
    for (const auto& [id, msgs] : universe.archive.messages) {
        fetcher.add_channel(id);
        for (const auto& m : msgs) fetcher.add(m);
    }
    CrawlConfig cfg;
    cfg.rounds = static_cast<int>(c.cfg.integer("crawl.rounds"));
    cfg.round3_min_referrers = static_cast<int>(c.cfg.integer("crawl.min_referrers"));
    cfg.period_start = config_time(c.cfg, "crawl.period_start");
    cfg.period_end = config_time(c.cfg, "crawl.period_end");
    auto r = snowball_crawl(fetcher, seeds, cfg);
    for (const auto& w : r.warnings) std::cerr << "chanscope: warning: " << w << "\n";

    c.ws.write("messages.jsonl", render([&](std::ostream& o) { export_messages(o, r.archive); }));
    c.ws.write("crawl_log.csv", render([&](std::ostream& o) { write_crawl_log(o, r.archive.crawl_log); }));
    c.ws.write("crawl_skipped.csv", render([&](std::ostream& o) {
        o << "channel_id\n";
        for (const auto& id : r.below_threshold) io::write_csv_row(o, {id});
    }));
    std::map<int, std::size_t> per_round;
    for (const auto& e : r.archive.crawl_log) ++per_round[e.round];
    io::ordered_json rounds = io::ordered_json::object();
    for (const auto& [round, n] : per_round) rounds[std::to_string(round)] = n;
    c.summary = {{"channels", r.archive.channels.size()},
                 {"messages", r.archive.message_count()},
                 {"per_round", rounds},
                 {"below_threshold", r.below_threshold.size()},
                 {"warnings", r.warnings.size()}};
    c.lines.push_back("collected " + std::to_string(r.archive.channels.size()) + " channels, " +
                      std::to_string(r.archive.message_count()) + " messages");
}

void cmd_ingest(Context& c) {
    auto a = load_archive(c);
    std::size_t german = 0;
    c.ws.write("channels.csv", render([&](std::ostream& o) {
        o << "channel_id,first_seen_round,is_seed,is_german,messages,languages\n";
        for (const auto& [id, ch] : a.channels) {
            std::vector<std::string> langs;
            for (const auto& l : ch.dominant_languages) langs.push_back(l.language + ":" + std::to_string(l.count));
            german += ch.is_german;
            io::write_csv_row(o, {id, std::to_string(ch.first_seen_round), ch.is_seed ? "true" : "false",
                                  ch.is_german ? "true" : "false", std::to_string(a.messages_of(id).size()),
                                  join(langs, ";")});
        }
    }));
    c.summary = {{"channels", a.channels.size()},
                 {"seed_channels", seed_channels(a).size()},
                 {"german_channels", german},
                 {"messages", a.message_count()}};
    c.ws.write_json("ingest_report.json", c.summary);
    c.lines.push_back("ingested " + std::to_string(a.message_count()) + " messages from " +
                      std::to_string(a.channels.size()) + " channels (" + std::to_string(german) + " German)");
}

void cmd_chunk(Context& c) {
    auto a = load_archive(c);
    auto max_words = c.cfg.integer("chunk.max_words");
    if (max_words < 1) config_error("chunk.max_words", "must be >= 1");
    std::size_t n_chunks = 0, split_messages = 0, hard = 0;
    c.ws.write("chunks.jsonl", render([&](std::ostream& o) {
        for (const auto& [_, msgs] : a.messages)
            for (const auto& m : msgs) {
                auto chunks = chunk_message(m.text, m.key(), static_cast<std::size_t>(max_words));
                split_messages += chunks.size() > 1;
                for (const auto& ch : chunks) {
                    io::ordered_json j;
                    j["channel_id"] = m.channel_id;
                    j["message_id"] = m.message_id;
                    j["chunk_index"] = ch.index;
                    j["text"] = ch.text;
                    o << j.dump() << '\n';
                    ++n_chunks;
                    hard += ch.hard_split;
                }
            }
    }));
    c.summary = {{"messages", a.message_count()}, {"chunks", n_chunks}, {"split_messages", split_messages},
                 {"hard_split_chunks", hard}};
    c.lines.push_back(std::to_string(a.message_count()) + " messages -> " + std::to_string(n_chunks) + " chunks");
}

std::vector<fs::path> score_files(const Config& cfg) {
    std::vector<fs::path> files;
    for (const auto& item : cfg.list("scores")) {
        auto p = cfg.resolve(item);
        if (fs::is_directory(p)) {
            std::vector<fs::path> in_dir;
            for (const auto& e : fs::directory_iterator(p))
                if (e.is_regular_file() && e.path().extension() == ".jsonl") in_dir.push_back(e.path());
            std::sort(in_dir.begin(), in_dir.end());
            files.insert(files.end(), in_dir.begin(), in_dir.end());
        } else {
            files.push_back(p);
        }
    }
    return files;
}

AnnotationTable load_annotations(Context& c) {
    AnnotationTable t;
    c.ws.read(c.cfg.path("annotations"), [&](std::istream& in) { t = read_annotations(in); });
    return t;
}

/// Majority-resolved gold labels; unresolved items are dropped.
std::map<MessageKey, Label> gold_labels(const AnnotationTable& t, std::size_t* unresolved = nullptr) {
    std::map<MessageKey, Label> gold;
    std::size_t u = 0;
    for (std::size_t i = 0; i < t.items.size(); ++i) {
        std::vector<Label> r;
        for (const auto& [_, cat] : t.ratings[i]) r.push_back(static_cast<Label>(cat));
        auto m = resolve_majority(r);
        if (m)
            gold.emplace(t.items[i], *m);
        else
            ++u;
    }
    if (unresolved) *unresolved = u;
    return gold;
}

void cmd_score_merge(Context& c) {
    auto a = load_archive(c);
    auto chunks = load_chunks(c);
    std::map<MessageKey, std::size_t> chunk_count;
    for (const auto& ch : chunks) chunk_count[ch.key] = std::max(chunk_count[ch.key], ch.index + 1);

    auto files = score_files(c.cfg);
    if (files.empty() && !c.cfg.boolean("baseline.enabled")) throw Error("config key 'scores': no score files found");
    ScoreTable message_level;
    ChunkScoreTable chunk_level;
    for (const auto& f : files) {
        c.ws.read(f, [&](std::istream& in) {
            // key checks run first so a bad record is reported with its line
            std::ostringstream copy;
            copy << in.rdbuf();
            const std::string buffer = copy.str();
            std::istringstream replay(buffer);
            io::for_each_jsonl(replay, [&](std::size_t, const io::json& j) {
                MessageKey key{io::require<std::string>(j, "channel_id"), io::require<std::int64_t>(j, "message_id")};
                auto it = chunk_count.find(key);
                if (it == chunk_count.end()) throw Error("score for unknown message " + to_string(key));
                if (auto ci = j.find("chunk_index"); ci != j.end() && ci->is_number_integer() &&
                                                     ci->get<std::int64_t>() >= static_cast<std::int64_t>(it->second))
                    throw Error("chunk_index out of range for " + to_string(key));
            });
            std::istringstream again(buffer);
            read_scores(again, message_level, chunk_level);
        });
    }
    ScoreTable merged = message_level;
    const ScoreTable aggregated = chunk_level.aggregate();
    for (const auto& [key, row] : aggregated.rows())
        for (const auto& [classifier, p] : row) merged.add(key, classifier, p);

    std::size_t baseline_train_size = 0;
    if (c.cfg.boolean("baseline.enabled")) {
        auto texts = message_texts(a);
        auto gold = gold_labels(load_annotations(c));
        std::vector<std::pair<std::string, Label>> train;
        for (const auto& [key, label] : gold) {
            auto it = texts.find(key);
            if (it == texts.end()) throw InputError(c.ws.display(c.cfg.path("annotations")), 0, "annotated message " + to_string(key) + " is not in the archive");
            train.emplace_back(it->second, label);
        }
        BaselineConfig bc;
        bc.seed = c.seed;
        auto model = baseline_train(train, bc);
        baseline_train_size = train.size();
        ChunkScoreTable base;
        for (const auto& ch : chunks) base.add(ch.key, ch.index, "baseline", model.predict(ch.text));
        const ScoreTable base_scores = base.aggregate();
        for (const auto& [key, row] : base_scores.rows())
            for (const auto& [classifier, p] : row) merged.add(key, classifier, p);
    }

    c.ws.write("scores.jsonl", render([&](std::ostream& o) { write_scores(o, merged); }));
    std::map<std::string, std::size_t> per_classifier;
    for (const auto& [_, row] : merged.rows())
        for (const auto& [cl, __] : row) ++per_classifier[cl];
    io::ordered_json cls = io::ordered_json::object();
    for (const auto& [cl, n] : per_classifier) cls[cl] = n;
    c.summary = {{"score_files", files.size()}, {"classifiers", cls}, {"messages_scored", merged.rows().size()},
                 {"baseline_training_examples", baseline_train_size}};
    c.ws.write_json("score_merge_report.json", c.summary);
    c.lines.push_back("merged scores for " + std::to_string(merged.rows().size()) + " messages from " +
                      std::to_string(per_classifier.size()) + " classifiers");
}

std::vector<std::string> ensemble_classifiers(const Config& cfg, const ScoreTable& scores) {
    auto listed = cfg.list("ensemble.classifiers");
    if (listed.empty()) return {scores.classifiers().begin(), scores.classifiers().end()};
    for (const auto& cl : listed)
        if (!scores.classifiers().count(cl)) config_error("ensemble.classifiers", "classifier '" + cl + "' has no scores");
    return listed;
}

void cmd_ensemble(Context& c) {
    auto a = load_archive(c);
    auto scores = load_message_scores(c);
    auto classifiers = ensemble_classifiers(c.cfg, scores);
    auto t = c.cfg.integer("ensemble.t");
    if (t < 1 || t > static_cast<std::int64_t>(classifiers.size()))
        config_error("ensemble.t", "must lie in [1, " + std::to_string(classifiers.size()) + "]");
    double tau = c.cfg.real("ensemble.tau");
    if (!(tau > 0.0 && tau <= 1.0)) config_error("ensemble.tau", "must lie in (0, 1]");
    auto r = label_messages(message_keys(a), scores, classifiers, static_cast<int>(t), tau);
    std::size_t abusive = 0;
    for (const auto& v : r.votes) abusive += v.final_label == Label::abusive;
    c.ws.write("labels.jsonl", render([&](std::ostream& o) { write_labels(o, r.votes); }));
    if (r.missing_scores) std::cerr << "chanscope: warning: " << r.missing_scores << " missing scores counted as neutral votes\n";
    c.summary = {{"t", t}, {"tau", tau}, {"classifiers", classifiers}, {"messages", r.votes.size()},
                 {"abusive", abusive}, {"missing_scores", r.missing_scores}};
    c.ws.write_json("ensemble_report.json", c.summary);
    c.lines.push_back(std::to_string(abusive) + " of " + std::to_string(r.votes.size()) + " messages abusive (t=" +
                      std::to_string(t) + ")");
}

io::ordered_json metrics_entry(const ConfusionMatrix& cm, std::size_t missing) {
    auto a = prf1(cm, Label::abusive);
    io::ordered_json j;
    j["precision"] = a.precision;
    j["recall"] = a.recall;
    j["f1"] = a.f1;
    j["macro_f1"] = macro_f1(cm);
    j["confusion"] = to_json(cm);
    j["missing_scores"] = missing;
    return j;
}

void cmd_eval(Context& c) {
    auto a = load_archive(c);
    auto table = load_annotations(c);
    auto scores = load_message_scores(c);
    auto labels = load_labels(c);
    double tau = c.cfg.real("ensemble.tau");
    auto texts = message_texts(a);
    for (const auto& k : table.items)
        if (!texts.count(k))
            throw InputError(c.ws.display(c.cfg.path("annotations")), 0, "annotated message " + to_string(k) + " is not in the archive");
    std::size_t unresolved = 0;
    auto gold = gold_labels(table, &unresolved);
    if (gold.empty()) throw InputError(c.ws.display(c.cfg.path("annotations")), 0, "no annotated message has a majority label");

    std::vector<Label> truth;
    std::size_t n_abusive = 0;
    for (const auto& [_, l] : gold) {
        truth.push_back(l);
        n_abusive += l == Label::abusive;
    }
    io::ordered_json classifiers = io::ordered_json::object();
    std::vector<std::string> table_lines;
    auto add = [&](const std::string& id, const std::vector<Label>& pred, std::size_t missing) {
        auto cm = confusion(truth, pred);
        classifiers[id] = metrics_entry(cm, missing);
        table_lines.push_back(id + ": f1=" + format_fixed(prf1(cm, Label::abusive).f1) + " macro_f1=" + format_fixed(macro_f1(cm)));
    };
    for (const auto& cl : scores.classifiers()) {
        std::vector<Label> pred;
        std::size_t missing = 0;
        for (const auto& [key, _] : gold) {
            auto p = scores.get(key, cl);
            if (!p) ++missing;
            pred.push_back(p ? apply_threshold(*p, tau) : Label::neutral);
        }
        add(cl, pred, missing);
    }
    std::vector<Label> ens;
    for (const auto& [key, _] : gold) {
        auto it = labels.find(key);
        if (it == labels.end()) throw InputError("labels.jsonl", 0, "no label for annotated message " + to_string(key));
        ens.push_back(it->second.label);
    }
    add("ensemble", ens, 0);

    io::ordered_json report;
    double alpha = krippendorff_alpha(table);
    report["annotation"] = {{"items", table.items.size()}, {"resolved", gold.size()}, {"unresolved", unresolved},
                            {"neutral", gold.size() - n_abusive}, {"abusive", n_abusive}, {"krippendorff_alpha", alpha}};
    report["tau"] = tau;
    report["classifiers"] = classifiers;
    c.ws.write_json("metrics_report.json", report);
    c.summary = report;
    c.lines.push_back("krippendorff alpha = " + format_fixed(alpha) + " over " + std::to_string(table.items.size()) + " items");
    for (auto& l : table_lines) c.lines.push_back(l);
}

void cmd_derive_threshold(Context& c, std::optional<double> p_false_flag, std::optional<double> epsilon_flag) {
    double epsilon = epsilon_flag ? *epsilon_flag : c.cfg.real("threshold.epsilon");
    io::ordered_json out;
    if (p_false_flag) {
        auto k = min_abusive_count(*p_false_flag, epsilon);
        out["pi"] = nullptr;
        out["fpr"] = nullptr;
        out["tpr"] = nullptr;
        out["p_false"] = *p_false_flag;
        out["epsilon"] = epsilon;
        out["k"] = k;
        out["source"] = "p_false";
    } else {
        auto metrics = c.ws.read_json(c.ws.out("metrics_report.json"), "eval");
        const auto& id = c.cfg.str("threshold.classifier");
        if (!metrics.contains("classifiers") || !metrics["classifiers"].contains(id))
            throw InputError("metrics_report.json", 0, "no metrics for classifier '" + id + "'");
        auto cm = confusion_from_json(metrics["classifiers"][id]["confusion"]);
        double pi = c.cfg.real("threshold.pi");
        auto d = derive_threshold(cm, pi, epsilon);
        out["pi"] = d.pi;
        out["fpr"] = d.rates.fpr;
        out["tpr"] = d.rates.tpr;
        out["p_false"] = d.rates.p_false;
        out["epsilon"] = d.epsilon;
        out["k"] = d.k;
        out["source"] = id;
    }
    c.ws.write_json("threshold_derivation.json", out);
    c.summary = out;
    c.lines.push_back("k = " + std::to_string(out["k"].get<std::int64_t>()));
}

std::int64_t load_k(Context& c) {
    auto j = c.ws.read_json(c.ws.out("threshold_derivation.json"), "derive-threshold");
    if (!j.contains("k") || !j["k"].is_number_integer() || j["k"].get<std::int64_t>() < 1)
        throw InputError("threshold_derivation.json", 0, "field 'k' must be a positive integer");
    return j["k"].get<std::int64_t>();
}

void cmd_label_channels(Context& c) {
    auto a = load_archive(c);
    auto labels = load_labels(c);
    auto k = load_k(c);
    std::map<std::string, std::int64_t> counts;
    for (const auto& [id, _] : a.channels) {
        auto& n = counts[id];
        for (const auto& m : a.messages_of(id)) {
            auto it = labels.find(m.key());
            if (it == labels.end()) throw InputError("labels.jsonl", 0, "no label for message " + to_string(m.key()));
            n += it->second.label == Label::abusive;
        }
    }
    auto out = label_channels(counts, k);
    std::size_t haters = 0;
    c.ws.write("channel_labels.csv", render([&](std::ostream& o) {
        o << "channel_id,abusive_count,label\n";
        for (const auto& l : out) {
            haters += l.label == ChannelClass::hater;
            io::write_csv_row(o, {l.channel_id, std::to_string(l.abusive_count), std::string(to_string(l.label))});
        }
    }));
    c.summary = {{"k", k}, {"channels", out.size()}, {"haters", haters}};
    c.lines.push_back(std::to_string(haters) + " of " + std::to_string(out.size()) + " channels labelled hater (k=" +
                      std::to_string(k) + ")");
}

void cmd_build_graph(Context& c) {
    auto a = load_archive(c);
    NodeFilter filter;
    const auto& kind = c.cfg.str("graph.filter");
    if (kind == "all") {
        filter = accept_all_channels();
    } else if (kind == "german_active") {
        auto start = c.cfg.empty("graph.active_start") ? config_time(c.cfg, "crawl.period_start") : config_time(c.cfg, "graph.active_start");
        auto end = c.cfg.empty("graph.active_end") ? config_time(c.cfg, "crawl.period_end") : config_time(c.cfg, "graph.active_end");
        filter = german_and_active(start, end);
    } else {
        config_error("graph.filter", "expected 'german_active' or 'all'");
    }
    auto g = build_graph(a, filter);
    auto stats = graph_stats(g);
    c.ws.write("graph_edges.csv", render([&](std::ostream& o) { export_graph(o, g, GraphFormat::edge_list_csv); }));
    c.ws.write("graph.graphml", render([&](std::ostream& o) { export_graph(o, g, GraphFormat::graphml); }));
    c.summary = to_json(stats);
    c.ws.write_json("graph_stats.json", c.summary);
    c.lines.push_back(std::to_string(stats.n_nodes) + " nodes, " + std::to_string(stats.n_edges) + " edges, density " +
                      format_fixed(stats.density) + ", average degree " + format_fixed(stats.avg_in_degree, 2));
}

void cmd_topic_features(Context& c) {
    auto a = load_archive(c);
    std::vector<TopicVector> topics;
    c.ws.read(c.cfg.path("topics"), [&](std::istream& in) { topics = read_topics(in); });
    std::vector<DocEmbedding> docs;
    double theta = c.cfg.real("topics.theta");
    if (!(theta >= -1.0 && theta <= 1.0)) config_error("topics.theta", "must lie in [-1, 1]");
    auto texts = message_texts(a);
    std::map<std::string, std::vector<std::vector<std::size_t>>> hits;
    std::size_t zero_norm = 0;
    c.ws.read(c.cfg.path("doc_embeddings"), [&](std::istream& in) {
        docs = read_doc_embeddings(in);
        for (const auto& d : docs) {
            if (!texts.count(d.key)) throw Error("embedding for unknown message " + to_string(d.key));
            auto r = assign_topics(d.vector, topics, theta);
            zero_norm += r.zero_norm;
            hits[d.key.channel_id].push_back(r.topics);
        }
    });
    if (zero_norm) std::cerr << "chanscope: warning: " << zero_norm << " zero-norm document embeddings\n";
    std::vector<TopicDistribution> dists;
    std::size_t zero_hit = 0;
    for (const auto& [id, _] : a.channels) {
        dists.push_back(channel_topic_distribution(hits[id], id));
        zero_hit += dists.back().hit_count == 0;
    }
    c.ws.write("topic_distributions.csv", render([&](std::ostream& o) { write_topic_distributions(o, dists); }));
    std::vector<std::size_t> kept;
    auto tree = hierarchical_cluster(similarity_matrix(dists, &kept));
    std::vector<std::string> names;
    for (auto i : kept) names.push_back(dists[i].channel_id);
    c.ws.write_json("cluster_tree.json", to_json(tree, names));
    c.summary = {{"documents", docs.size()}, {"zero_norm_documents", zero_norm}, {"channels", dists.size()},
                 {"zero_hit_channels", zero_hit}, {"clustered_channels", kept.size()}};
    c.lines.push_back("topic distributions for " + std::to_string(dists.size()) + " channels (" + std::to_string(zero_hit) +
                      " without hits)");
}

DgiConfig dgi_config(const Config& cfg, std::uint64_t seed) {
    DgiConfig d;
    d.epochs_max = static_cast<int>(cfg.integer("dgi.epochs_max"));
    d.patience = static_cast<int>(cfg.integer("dgi.patience"));
    d.learning_rate = cfg.real("dgi.learning_rate");
    d.layer_dims.clear();
    for (const auto& s : cfg.list("dgi.layer_dims")) {
        auto v = io::parse_int(s);
        if (v < 1) config_error("dgi.layer_dims", "dimensions must be >= 1");
        d.layer_dims.push_back(v);
    }
    d.activations.clear();
    for (const auto& s : cfg.list("dgi.activations")) d.activations.push_back(nn::parse_activation(s));
    auto s_in = cfg.integer("dgi.sample_in"), s_out = cfg.integer("dgi.sample_out");
    if (s_in < 1 || s_out < 1) config_error("dgi.sample_in", "sample sizes must be >= 1");
    d.sample_sizes.assign(d.layer_dims.size(), SampleSizes{static_cast<std::size_t>(s_in), static_cast<std::size_t>(s_out)});
    d.full_batch = cfg.boolean("dgi.full_batch");
    d.seed = seed;
    return d;
}

void cmd_embed(Context& c) {
    auto g = load_graph(c);
    std::vector<TopicDistribution> dists;
    c.ws.read(c.ws.out("topic_distributions.csv"), [&](std::istream& in) { dists = read_topic_distributions(in); }, "topic-features");
    std::map<std::string, const TopicDistribution*> by_id;
    for (const auto& d : dists) by_id[d.channel_id] = &d;
    nn::Matrix x(static_cast<Eigen::Index>(g.node_count()), static_cast<Eigen::Index>(kTopicCount));
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        auto it = by_id.find(g.node_ids()[i]);
        if (it == by_id.end())
            throw InputError("topic_distributions.csv", 0, "no topic distribution for graph node '" + g.node_ids()[i] + "'");
        for (std::size_t t = 0; t < kTopicCount; ++t) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = it->second->probs[t];
    }
    auto cfg = dgi_config(c.cfg, c.seed);
    auto r = dgi_train(g, x, cfg);
    nn::Matrix h = encode_all(g, x, r.model.encoder);
    c.ws.write("channel_embeddings.jsonl", render([&](std::ostream& o) {
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            io::ordered_json j;
            j["channel_id"] = g.node_ids()[i];
            std::vector<double> v(static_cast<std::size_t>(h.cols()));
            for (Eigen::Index d = 0; d < h.cols(); ++d) v[static_cast<std::size_t>(d)] = h(static_cast<Eigen::Index>(i), d);
            j["vector"] = v;
            o << j.dump() << '\n';
        }
    }));
    io::ordered_json rep;
    rep["nodes"] = g.node_count();
    rep["dimension"] = h.cols();
    rep["stopping_epoch"] = r.stopping_epoch;
    rep["best_epoch"] = r.best_epoch;
    rep["best_loss"] = r.losses[static_cast<std::size_t>(r.best_epoch)];
    rep["inference"] = "full_batch";
    rep["losses"] = r.losses;
    c.ws.write_json("embed_report.json", rep);
    c.summary = {{"nodes", g.node_count()}, {"dimension", h.cols()}, {"stopping_epoch", r.stopping_epoch},
                 {"best_loss", rep["best_loss"]}};
    c.lines.push_back("embedded " + std::to_string(g.node_count()) + " channels; DGI stopped after " +
                      std::to_string(r.stopping_epoch) + " epochs, best loss " + format_fixed(rep["best_loss"].get<double>()));
}

HeadConfig head_config(const Config& cfg, std::uint64_t seed) {
    HeadConfig h;
    h.epochs_max = static_cast<int>(cfg.integer("head.epochs_max"));
    h.patience = static_cast<int>(cfg.integer("head.patience"));
    h.min_delta = cfg.real("head.min_delta");
    h.hidden = cfg.integer("head.hidden");
    h.learning_rate = cfg.real("head.learning_rate");
    auto b = cfg.integer("head.batch_size");
    if (b < 1) config_error("head.batch_size", "must be >= 1");
    h.batch_size = static_cast<std::size_t>(b);
    h.seed = seed;
    return h;
}

void cmd_train_head(Context& c) {
    auto emb = load_embeddings(c);
    auto labels = load_channel_labels(c);
    std::vector<ChannelClass> y;
    for (const auto& id : emb.ids) {
        auto it = labels.find(id);
        if (it == labels.end()) throw InputError("channel_labels.csv", 0, "no label for embedded channel '" + id + "'");
        y.push_back(it->second.label);
    }
    auto cfg = head_config(c.cfg, c.seed);
    auto r = train_head(emb.x, y, cfg);
    auto model = to_json(r.params);
    model["config"] = {{"epochs_max", cfg.epochs_max}, {"patience", cfg.patience}, {"min_delta", cfg.min_delta},
                       {"hidden", cfg.hidden}, {"learning_rate", cfg.learning_rate}, {"batch_size", cfg.batch_size},
                       {"train_fraction", cfg.train_fraction}, {"validation_fraction", cfg.validation_fraction}};
    model["seed"] = cfg.seed;
    c.ws.write_json("head_model.json", model);

    const auto& rep = r.report;
    auto ids = [&](const std::vector<std::size_t>& idx) {
        std::vector<std::string> v;
        for (auto i : idx) v.push_back(emb.ids[i]);
        return v;
    };
    io::ordered_json j;
    j["split"] = {{"train", ids(rep.split.train)}, {"validation", ids(rep.split.validation)}, {"test", ids(rep.split.test)}};
    j["epoch_losses"] = rep.epoch_losses;
    j["validation_accuracy"] = rep.validation_accuracy;
    j["stopping_epoch"] = rep.stopping_epoch;
    j["best_epoch"] = rep.best_epoch;
    j["test_confusion"] = to_json(rep.test_confusion);
    j["f1_neutral"] = rep.f1_neutral;
    j["f1_hater"] = rep.f1_hater;
    j["macro_f1"] = rep.macro_f1;
    j["test_accuracy"] = rep.test_accuracy;
    c.ws.write_json("train_report.json", j);
    c.summary = {{"channels", emb.ids.size()}, {"stopping_epoch", rep.stopping_epoch}, {"f1_neutral", rep.f1_neutral},
                 {"f1_hater", rep.f1_hater}, {"macro_f1", rep.macro_f1}, {"test_accuracy", rep.test_accuracy}};
    c.lines.push_back("head macro F1 " + format_fixed(rep.macro_f1) + " (neutral " + format_fixed(rep.f1_neutral) +
                      ", hater " + format_fixed(rep.f1_hater) + ") on " + std::to_string(rep.split.test.size()) +
                      " test channels");
}

io::ordered_json to_json(const CommunityStats& s) {
    return {{"community_id", s.community_id}, {"size", s.size}, {"hater_count", s.hater_count},
            {"hater_proportion", s.hater_proportion}, {"seed_count", s.seed_count}};
}

void cmd_communities(Context& c) {
    auto a = load_archive(c);
    auto emb = load_embeddings(c);
    auto labels = load_channel_labels(c);
    auto seeds = seed_channels(a);
    auto pts = reduce_2d(emb.x);
    double eps = 0.0;
    auto knn = c.cfg.integer("dbscan.knn");
    if (knn < 1) config_error("dbscan.knn", "must be >= 1");
    if (c.cfg.str("dbscan.eps") == "auto") {
        eps = median_knn_distance(pts, static_cast<std::size_t>(knn));
        if (!(eps > 0.0)) eps = 1e-9; // every point coincides with its neighbours
    } else {
        eps = c.cfg.real("dbscan.eps");
        if (!(eps > 0.0)) config_error("dbscan.eps", "must be positive or 'auto'");
    }
    auto min_pts = c.cfg.integer("dbscan.min_pts");
    if (min_pts < 1) config_error("dbscan.min_pts", "must be >= 1");
    auto assignment = dbscan(pts, eps, static_cast<std::size_t>(min_pts));
    std::map<std::string, ChannelClass> classes;
    for (const auto& id : emb.ids) {
        auto it = labels.find(id);
        if (it == labels.end()) throw InputError("channel_labels.csv", 0, "no label for channel '" + id + "'");
        classes[id] = it->second.label;
    }
    auto report = community_stats(emb.ids, assignment, classes, seeds);

    c.ws.write("communities.csv", render([&](std::ostream& o) {
        o << "channel_id,x,y,community_id,label,is_seed\n";
        for (std::size_t i = 0; i < emb.ids.size(); ++i)
            io::write_csv_row(o, {emb.ids[i], format_double(pts[i][0]), format_double(pts[i][1]), std::to_string(assignment[i]),
                                  std::string(to_string(classes[emb.ids[i]])), seeds.count(emb.ids[i]) ? "true" : "false"});
    }));
    io::ordered_json j;
    j["eps"] = eps;
    j["min_pts"] = min_pts;
    j["communities"] = io::ordered_json::array();
    for (const auto& s : report.communities) j["communities"].push_back(to_json(s));
    j["outliers"] = report.outliers ? to_json(*report.outliers) : io::ordered_json(nullptr);
    c.ws.write_json("community_report.json", j);

    std::vector<svg::ScatterPoint> sp;
    for (std::size_t i = 0; i < pts.size(); ++i)
        sp.push_back({pts[i][0], pts[i][1], assignment[i], classes[emb.ids[i]] == ChannelClass::hater});
    c.ws.write("communities.svg", svg::scatter(sp, "Channel communities (squares: hater)"));
    c.summary = j;
    c.lines.push_back(std::to_string(report.communities.size()) + " communities, " +
                      std::to_string(report.outliers ? report.outliers->size : 0) + " outliers (eps " + format_fixed(eps) + ")");
    for (const auto& s : report.communities)
        c.lines.push_back("  community " + std::to_string(s.community_id) + ": " + std::to_string(s.size) + " channels, hater share " +
                          format_fixed(s.hater_proportion));
}

void cmd_trend(Context& c) {
    auto a = load_archive(c);
    auto labels = load_labels(c);
    auto g = load_graph(c);
    MonthWindow window;
    window.first = c.cfg.empty("trend.first") ? YearMonth::of(config_time(c.cfg, "crawl.period_start")) : config_month(c.cfg, "trend.first");
    window.end_exclusive = c.cfg.empty("trend.end") ? YearMonth::of(config_time(c.cfg, "crawl.period_end")) : config_month(c.cfg, "trend.end");
    auto seeds = seed_channels(a);
    std::set<std::string> seeds_in_graph;
    for (const auto& s : seeds)
        if (g.contains(s)) seeds_in_graph.insert(s);
    auto first_degree = first_degree_network(g, seeds_in_graph);

    std::vector<std::pair<std::string, MonthlySeries>> subsets;
    subsets.emplace_back("all", monthly_series(a, labels, window));
    subsets.emplace_back("seeds", monthly_series(a, labels, window, &seeds));
    subsets.emplace_back("first_degree", monthly_series(a, labels, window, &first_degree));
    c.ws.write("prevalence.csv", render([&](std::ostream& o) {
        o << "month,subset,total,abusive,share\n";
        for (std::size_t m = 0; m < subsets[0].second.size(); ++m)
            for (const auto& [name, series] : subsets) {
                const auto& b = series[m];
                io::write_csv_row(o, {to_string(b.month), name, std::to_string(b.total), std::to_string(b.abusive), format_double(b.share)});
            }
    }));
    io::ordered_json pooled = io::ordered_json::object(), averaged = io::ordered_json::object();
    std::vector<svg::Series> lines;
    for (const auto& [name, series] : subsets) {
        std::int64_t total = 0;
        double sum = 0.0;
        std::size_t months = 0;
        svg::Series s{name, {}};
        for (const auto& b : series) {
            total += b.total;
            if (b.total) {
                sum += b.share;
                ++months;
            }
            s.values.push_back(b.share);
        }
        pooled[name] = total ? io::ordered_json(overall_prevalence(series)) : io::ordered_json(nullptr);
        averaged[name] = months ? io::ordered_json(sum / static_cast<double>(months)) : io::ordered_json(nullptr);
        lines.push_back(std::move(s));
    }
    std::vector<std::string> months;
    for (const auto& b : subsets[0].second) months.push_back(to_string(b.month));
    c.ws.write("prevalence.svg", svg::line_chart(months, lines, "Monthly share of abusive messages"));
    io::ordered_json rep;
    rep["window"] = {{"first", to_string(window.first)}, {"end_exclusive", to_string(window.end_exclusive)}};
    rep["first_degree_channels"] = first_degree.size();
    rep["pooled_prevalence"] = pooled;
    rep["month_averaged_share"] = averaged;
    c.ws.write_json("trend_report.json", rep);
    c.summary = rep;
    if (!pooled["all"].is_null())
        c.lines.push_back("pooled prevalence " + format_fixed(pooled["all"].get<double>()) + " over " +
                          std::to_string(months.size()) + " months");
}

void cmd_report(Context& c) {
    const std::vector<std::pair<std::string, std::string>> prerequisites = {
        {"ingest_report.json", "ingest"},         {"chunks.jsonl", "chunk"},
        {"score_merge_report.json", "score-merge"}, {"ensemble_report.json", "ensemble"},
        {"metrics_report.json", "eval"},          {"threshold_derivation.json", "derive-threshold"},
        {"channel_labels.csv", "label-channels"}, {"graph_stats.json", "build-graph"},
        {"topic_distributions.csv", "topic-features"}, {"embed_report.json", "embed"},
        {"train_report.json", "train-head"},      {"community_report.json", "communities"},
        {"trend_report.json", "trend"}};
    for (const auto& [file, producer] : prerequisites)
        if (!fs::is_regular_file(c.ws.out(file)))
            throw InputError(file, 0, "missing prerequisite (produced by 'chanscope " + producer + "')");

    auto ingest = c.ws.read_json(c.ws.out("ingest_report.json"));
    auto ensemble = c.ws.read_json(c.ws.out("ensemble_report.json"));
    auto metrics = c.ws.read_json(c.ws.out("metrics_report.json"));
    auto threshold = c.ws.read_json(c.ws.out("threshold_derivation.json"));
    auto graph = c.ws.read_json(c.ws.out("graph_stats.json"));
    auto embed = c.ws.read_json(c.ws.out("embed_report.json"));
    auto train = c.ws.read_json(c.ws.out("train_report.json"));
    auto communities = c.ws.read_json(c.ws.out("community_report.json"));
    auto trend = c.ws.read_json(c.ws.out("trend_report.json"));
    auto channel_labels = load_channel_labels(c);
    std::size_t haters = 0;
    for (const auto& [_, l] : channel_labels) haters += l.label == ChannelClass::hater;

    io::ordered_json r;
    r["archive"] = ingest;
    r["messages_abusive"] = ensemble["abusive"];
    r["ensemble_threshold"] = ensemble["t"];
    r["krippendorff_alpha"] = metrics["annotation"]["krippendorff_alpha"];
    r["ensemble_metrics"] = metrics["classifiers"]["ensemble"];
    r["threshold"] = threshold;
    r["channels_labelled"] = channel_labels.size();
    r["hater_channels"] = haters;
    r["graph"] = graph;
    r["dgi_stopping_epoch"] = embed["stopping_epoch"];
    r["head"] = {{"macro_f1", train["macro_f1"]}, {"f1_neutral", train["f1_neutral"]}, {"f1_hater", train["f1_hater"]},
                 {"test_confusion", train["test_confusion"]}};
    r["communities"] = communities["communities"];
    r["outliers"] = communities["outliers"];
    r["prevalence"] = trend["pooled_prevalence"];
    c.ws.write_json("report.json", r);

    auto num = [](const io::json& j, int digits = 4) { return j.is_number() ? format_fixed(j.get<double>(), digits) : std::string("n/a"); };
    std::ostringstream md;
    md << "# chanscope report\n\n";
    md << "| quantity | value |\n|---|---|\n";
    md << "| channels | " << ingest["channels"].get<std::int64_t>() << " |\n";
    md << "| messages | " << ingest["messages"].get<std::int64_t>() << " |\n";
    md << "| abusive messages (t = " << ensemble["t"].get<std::int64_t>() << ") | " << ensemble["abusive"].get<std::int64_t>() << " |\n";
    md << "| Krippendorff's alpha | " << num(metrics["annotation"]["krippendorff_alpha"]) << " |\n";
    md << "| ensemble macro F1 | " << num(metrics["classifiers"]["ensemble"]["macro_f1"]) << " |\n";
    md << "| P(neutral given predicted abusive) | " << num(threshold["p_false"]) << " |\n";
    md << "| minimum abusive messages k | " << threshold["k"].get<std::int64_t>() << " |\n";
    md << "| hater channels | " << haters << " of " << channel_labels.size() << " |\n";
    md << "| graph nodes / edges | " << graph["n_nodes"].get<std::int64_t>() << " / " << graph["n_edges"].get<std::int64_t>() << " |\n";
    md << "| graph density | " << num(graph["density"]) << " |\n";
    md << "| head macro F1 | " << num(train["macro_f1"]) << " |\n";
    md << "| communities | " << communities["communities"].size() << " |\n";
    md << "| pooled prevalence (all) | " << num(trend["pooled_prevalence"]["all"]) << " |\n";
    c.ws.write("report.md", md.str());
    c.summary = r;
    c.lines.push_back("wrote report.json and report.md");
}

// ---------------------------------------------------------------------------

const std::vector<std::pair<std::string, std::string>>& subcommands() {
    static const std::vector<std::pair<std::string, std::string>> list = {
        {"crawl", "snowball-crawl the message universe from the seed list"},
        {"ingest", "validate messages and crawl log, report channel languages"},
        {"chunk", "split messages into chunks of at most chunk.max_words words"},
        {"score-merge", "merge classifier score files into message-level scores"},
        {"ensemble", "label messages by ensemble vote"},
        {"eval", "evaluate classifiers against expert annotations"},
        {"derive-threshold", "derive the minimum abusive-message count k"},
        {"label-channels", "label channels hater or neutral"},
        {"build-graph", "build the directed channel graph"},
        {"topic-features", "per-channel topic distributions and clustering"},
        {"embed", "train graph embeddings"},
        {"train-head", "train the channel classifier on embeddings"},
        {"communities", "2-D reduction, density clustering, community statistics"},
        {"trend", "monthly prevalence series"},
        {"report", "summarise every stage"},
    };
    return list;
}

int run(int argc, char** argv) {
    CLI::App app{"chanscope: abusive-content and hater-channel analysis pipeline"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    std::string config_path, out_dir = "out";
    std::optional<std::uint64_t> seed_flag;
    bool json = false;
    std::optional<double> p_false, epsilon;
    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--seed", seed_flag, "override the config seed");
    app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    app.add_flag("--json", json, "print the command summary as JSON");
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : subcommands()) {
        auto* s = app.add_subcommand(name, help);
        s->fallthrough();
        subs[name] = s;
    }
    subs["derive-threshold"]->add_option("--p-false", p_false, "P(neutral | predicted abusive); skips the confusion matrix");
    subs["derive-threshold"]->add_option("--epsilon", epsilon, "maximum error (default threshold.epsilon)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "chanscope: usage error: " << e.what() << "\n";
        return 2;
    }
    std::string command;
    for (const auto& [name, s] : subs)
        if (s->parsed()) command = name;

    try {
        Config cfg(config_schema());
        if (!config_path.empty()) cfg.load(config_path);
        if (seed_flag) cfg.set("seed", std::to_string(*seed_flag));
        auto seed_value = cfg.integer("seed");
        if (seed_value < 0) config_error("seed", "must be non-negative");
        auto seed = static_cast<std::uint64_t>(seed_value);
        Workspace ws(out_dir, command, cfg, seed);
        Context c{cfg, ws, seed, io::ordered_json::object(), {}};
        if (command == "crawl") cmd_crawl(c);
        else if (command == "ingest") cmd_ingest(c);
        else if (command == "chunk") cmd_chunk(c);
        else if (command == "score-merge") cmd_score_merge(c);
        else if (command == "ensemble") cmd_ensemble(c);
        else if (command == "eval") cmd_eval(c);
        else if (command == "derive-threshold") cmd_derive_threshold(c, p_false, epsilon);
        else if (command == "label-channels") cmd_label_channels(c);
        else if (command == "build-graph") cmd_build_graph(c);
        else if (command == "topic-features") cmd_topic_features(c);
        else if (command == "embed") cmd_embed(c);
        else if (command == "train-head") cmd_train_head(c);
        else if (command == "communities") cmd_communities(c);
        else if (command == "trend") cmd_trend(c);
        else if (command == "report") cmd_report(c);
        ws.finish();
        if (json) {
            std::cout << c.summary.dump(2) << "\n";
        } else {
            for (const auto& l : c.lines) std::cout << l << "\n";
        }
        return 0;
    } catch (const InputError& e) {
        std::cerr << "chanscope: error: " << e.file();
        if (e.line()) std::cerr << ":" << e.line();
        std::cerr << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "chanscope: error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace
} // namespace chanscope::cli

int main(int argc, char** argv) { return chanscope::cli::run(argc, argv); }
