#pragma once

// Message archives: parsing, canonical export, snowball discovery and period filtering.

#include <chanscope/core.hpp>
#include <chanscope/io.hpp>

#include <algorithm>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace chanscope {

struct RawMessage {
    std::int64_t message_id = 0;
    std::string channel_id;
    Timestamp timestamp{};
    std::string text;
    std::optional<std::string> forwarded_from;
    std::vector<std::string> mentions;
    std::optional<std::string> language;

    MessageKey key() const { return {channel_id, message_id}; }

    friend bool operator==(const RawMessage&, const RawMessage&) = default;
};

struct LanguageTally {
    std::string language;
    std::size_t count = 0;

    friend bool operator==(const LanguageTally&, const LanguageTally&) = default;
};

struct Channel {
    std::string channel_id;
    int first_seen_round = 0; // 0 = seed
    bool is_seed = true;
    std::vector<LanguageTally> dominant_languages;
    bool is_german = false;

    friend bool operator==(const Channel&, const Channel&) = default;
};

enum class DiscoveryReason { seed, mentioned, forwarded };

inline std::string_view to_string(DiscoveryReason r) {
    switch (r) {
    case DiscoveryReason::seed: return "seed";
    case DiscoveryReason::mentioned: return "mentioned";
    case DiscoveryReason::forwarded: return "forwarded";
    }
    return "seed";
}

inline DiscoveryReason parse_reason(std::string_view s) {
    if (s == "seed") return DiscoveryReason::seed;
    if (s == "mentioned") return DiscoveryReason::mentioned;
    if (s == "forwarded") return DiscoveryReason::forwarded;
    throw Error("unknown discovery reason '" + std::string(s) + "'");
}

/// One collected channel. `round` is 1-based (round 1 holds the seeds).
struct CrawlLogEntry {
    int round = 1;
    std::string channel_id;
    DiscoveryReason reason = DiscoveryReason::seed;

    friend bool operator==(const CrawlLogEntry&, const CrawlLogEntry&) = default;
};

struct Archive {
    std::map<std::string, Channel> channels;
    std::map<std::string, std::vector<RawMessage>> messages;
    std::vector<CrawlLogEntry> crawl_log;

    std::size_t message_count() const {
        std::size_t n = 0;
        for (const auto& [_, msgs] : messages) n += msgs.size();
        return n;
    }

    const std::vector<RawMessage>& messages_of(const std::string& channel_id) const {
        static const std::vector<RawMessage> empty;
        auto it = messages.find(channel_id);
        return it == messages.end() ? empty : it->second;
    }

    friend bool operator==(const Archive&, const Archive&) = default;
};

struct CrawlConfig {
    int rounds = 3;
    int round3_min_referrers = 5;
    Timestamp period_start = make_timestamp(2019, 1, 1);
    Timestamp period_end = make_timestamp(2021, 3, 15);

    void validate() const {
        if (rounds < 1) throw Error("crawl rounds must be >= 1");
        if (round3_min_referrers < 1) throw Error("round3_min_referrers must be >= 1");
        if (!(period_start < period_end)) throw Error("crawl period_start must precede period_end");
    }
};

// ---------------------------------------------------------------------------
// Language

struct LanguageDecision {
    std::vector<LanguageTally> dominant_languages;
    bool is_german = false;
};

/// A channel is German when "de" ranks first or second among the detected message languages.
inline LanguageDecision detect_channel_language(const std::vector<std::optional<std::string>>& per_message_langs) {
    std::map<std::string, std::size_t> counts;
    for (const auto& l : per_message_langs)
        if (l) ++counts[*l];
    LanguageDecision d;
    for (const auto& [lang, n] : counts) d.dominant_languages.push_back({lang, n});
    std::stable_sort(d.dominant_languages.begin(), d.dominant_languages.end(),
                     [](const LanguageTally& a, const LanguageTally& b) { return a.count > b.count; });
    for (std::size_t i = 0; i < d.dominant_languages.size() && i < 2; ++i)
        if (d.dominant_languages[i].language == "de") d.is_german = true;
    return d;
}

namespace detail {

inline void refresh_languages(Channel& c, const std::vector<RawMessage>& msgs) {
    std::vector<std::optional<std::string>> langs;
    langs.reserve(msgs.size());
    for (const auto& m : msgs) langs.push_back(m.language);
    auto d = detect_channel_language(langs);
    c.dominant_languages = std::move(d.dominant_languages);
    c.is_german = d.is_german;
}

inline void sort_messages(std::vector<RawMessage>& msgs) {
    std::stable_sort(msgs.begin(), msgs.end(), [](const RawMessage& a, const RawMessage& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.message_id < b.message_id;
    });
}

inline RawMessage message_from_json(const io::json& j) {
    RawMessage m;
    m.message_id = io::require<std::int64_t>(j, "message_id");
    m.channel_id = io::require<std::string>(j, "channel_id");
    if (m.channel_id.empty()) throw Error("channel_id must be non-empty");
    auto ts = io::require<std::string>(j, "timestamp");
    auto parsed = parse_timestamp(ts);
    if (!parsed) throw Error("invalid timestamp '" + ts + "'");
    m.timestamp = *parsed;
    m.text = io::require<std::string>(j, "text");
    m.forwarded_from = io::optional_string(j, "forwarded_from");
    if (m.forwarded_from && *m.forwarded_from == m.channel_id)
        throw Error("forwarded_from equals the message's own channel");
    auto mentions = j.find("mentions");
    if (mentions != j.end() && !mentions->is_null()) {
        if (!mentions->is_array()) throw Error("field 'mentions' must be an array");
        for (const auto& x : *mentions) {
            if (!x.is_string()) throw Error("field 'mentions' must contain strings");
            auto id = x.get<std::string>();
            if (std::find(m.mentions.begin(), m.mentions.end(), id) == m.mentions.end())
                m.mentions.push_back(std::move(id));
        }
    }
    m.language = io::optional_string(j, "lang");
    return m;
}

} // namespace detail

inline io::ordered_json to_json(const RawMessage& m) {
    io::ordered_json j;
    j["message_id"] = m.message_id;
    j["channel_id"] = m.channel_id;
    j["timestamp"] = format_timestamp(m.timestamp);
    j["text"] = m.text;
    j["forwarded_from"] = m.forwarded_from ? io::ordered_json(*m.forwarded_from) : io::ordered_json(nullptr);
    j["mentions"] = m.mentions;
    j["lang"] = m.language ? io::ordered_json(*m.language) : io::ordered_json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// Parsing and export

struct ParseResult {
    Archive archive;
    std::vector<std::string> warnings;
};

/// Reads crawl_log.csv (round,channel_id,reason).
inline std::vector<CrawlLogEntry> parse_crawl_log(std::istream& in) {
    std::vector<CrawlLogEntry> log;
    std::set<std::string> seen;
    io::for_each_csv_row(in, {"round", "channel_id", "reason"}, [&](std::size_t, const auto& f) {
        CrawlLogEntry e{static_cast<int>(io::parse_int(f[0])), f[1], parse_reason(f[2])};
        if (e.round < 1) throw Error("round must be >= 1");
        if (!seen.insert(e.channel_id).second) throw Error("channel '" + e.channel_id + "' logged twice");
        if ((e.reason == DiscoveryReason::seed) != (e.round == 1))
            throw Error("seed reason must coincide with round 1");
        log.push_back(std::move(e));
    });
    return log;
}

inline void write_crawl_log(std::ostream& out, const std::vector<CrawlLogEntry>& log) {
    out << "round,channel_id,reason\n";
    for (const auto& e : log)
        io::write_csv_row(out, {std::to_string(e.round), e.channel_id, std::string(to_string(e.reason))});
}

/// Parses messages.jsonl. When a crawl log is supplied it defines the channel set and discovery
/// rounds; otherwise every channel seen in the stream is a non-seed channel of round 1 unless it
/// is listed in `seeds`.
inline ParseResult parse_archive(std::istream& messages, const std::vector<CrawlLogEntry>* crawl_log = nullptr,
                                 const std::vector<std::string>& seeds = {}) {
    ParseResult r;
    auto& a = r.archive;
    std::map<MessageKey, std::size_t> seen; // -> index in channel vector
    io::for_each_jsonl(messages, [&](std::size_t lineno, const io::json& j) {
        auto m = detail::message_from_json(j);
        auto key = m.key();
        auto& bucket = a.messages[m.channel_id];
        if (auto it = seen.find(key); it != seen.end()) {
            if (bucket[it->second].text != m.text)
                r.warnings.push_back("line " + std::to_string(lineno) + ": duplicate message " + to_string(key) +
                                     " with conflicting text, keeping first");
            return;
        }
        seen.emplace(key, bucket.size());
        bucket.push_back(std::move(m));
    });

    std::set<std::string> seed_set(seeds.begin(), seeds.end());
    auto make_channel = [&](const std::string& id, int round) {
        Channel c;
        c.channel_id = id;
        c.first_seen_round = round;
        c.is_seed = round == 0;
        return c;
    };
    if (crawl_log) {
        a.crawl_log = *crawl_log;
        for (const auto& e : *crawl_log) a.channels.emplace(e.channel_id, make_channel(e.channel_id, e.round - 1));
        for (const auto& [id, _] : a.messages)
            if (!a.channels.count(id)) throw Error("channel '" + id + "' has messages but is missing from the crawl log");
    } else {
        for (const auto& [id, _] : a.messages) a.channels.emplace(id, make_channel(id, seed_set.count(id) ? 0 : 1));
        for (const auto& id : seed_set) a.channels.emplace(id, make_channel(id, 0));
    }
    for (auto& [id, ch] : a.channels) {
        auto& msgs = a.messages[id];
        detail::sort_messages(msgs);
        detail::refresh_languages(ch, msgs);
    }
    return r;
}

/// Canonical messages.jsonl: channels in lexicographic order, messages by (timestamp, message_id).
inline void export_messages(std::ostream& out, const Archive& a) {
    for (const auto& [id, msgs] : a.messages)
        for (const auto& m : msgs) out << to_json(m).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Period filter

/// Keeps messages with start <= timestamp < end. Channels are retained even when emptied.
inline Archive filter_by_period(const Archive& a, Timestamp start, Timestamp end) {
    if (!(start < end)) throw Error("filter_by_period: start must precede end");
    Archive out;
    out.channels = a.channels;
    out.crawl_log = a.crawl_log;
    for (const auto& [id, msgs] : a.messages) {
        auto& dst = out.messages[id];
        for (const auto& m : msgs)
            if (m.timestamp >= start && m.timestamp < end) dst.push_back(m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Snowball crawl

/// Source of channel contents. Returns std::nullopt when the channel is not accessible.
class ChannelFetcher {
public:
    virtual ~ChannelFetcher() = default;
    virtual std::optional<std::vector<RawMessage>> fetch(const std::string& channel_id) = 0;
};

/// In-memory fetcher backed by a fixed message universe.
class FixtureFetcher : public ChannelFetcher {
public:
    FixtureFetcher() = default;

    void add(RawMessage m) { universe_[m.channel_id].push_back(std::move(m)); }
    void add_channel(const std::string& id) { universe_[id]; }
    void make_inaccessible(const std::string& id) { inaccessible_.insert(id); }

    std::optional<std::vector<RawMessage>> fetch(const std::string& channel_id) override {
        ++fetch_counts_[channel_id];
        if (inaccessible_.count(channel_id)) return std::nullopt;
        auto it = universe_.find(channel_id);
        if (it == universe_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t fetch_count(const std::string& id) const {
        auto it = fetch_counts_.find(id);
        return it == fetch_counts_.end() ? 0 : it->second;
    }

private:
    std::map<std::string, std::vector<RawMessage>> universe_;
    std::set<std::string> inaccessible_;
    std::map<std::string, std::size_t> fetch_counts_;
};

struct CrawlResult {
    Archive archive;
    std::vector<std::string> warnings;
    /// Channels that were referenced in the last round's frontier but fell below the referrer threshold.
    std::vector<std::string> below_threshold;
};

/// Snowball discovery. Round 1 collects the seeds, round 2 every channel referenced by round 1,
/// and every later round only newly referenced channels with at least `round3_min_referrers`
/// distinct collected referrers. Channels are fetched at most once.
inline CrawlResult snowball_crawl(ChannelFetcher& fetcher, const std::vector<std::string>& seeds, const CrawlConfig& cfg) {
    cfg.validate();
    if (seeds.empty()) throw Error("snowball_crawl: seed list is empty");

    CrawlResult result;
    auto& a = result.archive;
    std::set<std::string> attempted;

    auto collect = [&](const std::string& id, int round, DiscoveryReason reason) {
        attempted.insert(id);
        auto fetched = fetcher.fetch(id);
        if (!fetched) {
            result.warnings.push_back("channel '" + id + "' not accessible (round " + std::to_string(round) + ")");
            return false;
        }
        std::vector<RawMessage> msgs;
        std::set<std::int64_t> ids;
        for (auto& m : *fetched) {
            if (m.channel_id != id || m.timestamp < cfg.period_start || !(m.timestamp < cfg.period_end)) continue;
            if (!ids.insert(m.message_id).second) continue;
            msgs.push_back(std::move(m));
        }
        detail::sort_messages(msgs);
        Channel c;
        c.channel_id = id;
        c.first_seen_round = round - 1;
        c.is_seed = round == 1;
        detail::refresh_languages(c, msgs);
        a.channels.emplace(id, std::move(c));
        a.messages.emplace(id, std::move(msgs));
        a.crawl_log.push_back({round, id, reason});
        return true;
    };

    std::vector<std::string> ordered_seeds;
    {
        std::set<std::string> seen;
        for (const auto& s : seeds)
            if (seen.insert(s).second) ordered_seeds.push_back(s);
    }
    std::vector<std::string> last_round;
    for (const auto& s : ordered_seeds)
        if (collect(s, 1, DiscoveryReason::seed)) last_round.push_back(s);
    if (last_round.empty()) throw Error("snowball_crawl: none of the seed channels is accessible");

    for (int round = 2; round <= cfg.rounds; ++round) {
        // candidate -> distinct referrers; mention beats forward for the logged reason
        std::map<std::string, std::set<std::string>> referrers;
        std::map<std::string, DiscoveryReason> reason;
        const bool thresholded = round >= 3;
        auto scan = [&](const std::string& src) {
            for (const auto& m : a.messages_of(src)) {
                for (const auto& target : m.mentions) {
                    if (target == src || attempted.count(target)) continue;
                    referrers[target].insert(src);
                    reason[target] = DiscoveryReason::mentioned;
                }
                if (m.forwarded_from && *m.forwarded_from != src && !attempted.count(*m.forwarded_from)) {
                    referrers[*m.forwarded_from].insert(src);
                    reason.emplace(*m.forwarded_from, DiscoveryReason::forwarded);
                }
            }
        };
        if (thresholded) {
            for (const auto& [id, _] : a.channels) scan(id);
        } else {
            for (const auto& id : last_round) scan(id);
        }

        std::vector<std::string> collected;
        for (const auto& [target, refs] : referrers) {
            if (thresholded && refs.size() < static_cast<std::size_t>(cfg.round3_min_referrers)) {
                if (round == cfg.rounds) result.below_threshold.push_back(target);
                continue;
            }
            if (collect(target, round, reason.at(target))) collected.push_back(target);
        }
        last_round = std::move(collected);
    }
    return result;
}

} // namespace chanscope
