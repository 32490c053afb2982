#pragma once

// Seeded random instance generators for property tests.

#include <chanscope/archive.hpp>
#include <chanscope/graph.hpp>
#include <chanscope/rng.hpp>

#include <string>
#include <vector>

namespace gen {

inline const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words = {
        "wir", "sind", "das", "volk", "die", "regierung", "lügt", "heute", "morgen", "impfung", "polizei", "masken",
        "demo", "berlin", "freiheit", "zensur", "kanal", "teilen", "bitte", "alle", "und", "oder", "nicht", "mehr",
        "unter", "gegen", "für", "straße", "wahrheit", "medien", "news", "video", "link", "jetzt", "hier", "schnell"};
    return words;
}

inline std::string capitalize(std::string w) {
    if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
}

/// One sentence of `words` words: capitalised first word, terminal punctuation.
inline std::string sentence(chanscope::Rng& rng, std::size_t words) {
    static const char* enders[] = {".", "!", "?"};
    std::string s;
    for (std::size_t i = 0; i < words; ++i) {
        std::string w = vocabulary()[rng.index(vocabulary().size())];
        if (i == 0) w = capitalize(w);
        if (i + 1 == words) w += enders[rng.index(3)];
        if (i) s += rng.bernoulli(0.05) ? (rng.bernoulli(0.5) ? "\n" : "  ") : " ";
        s += w;
    }
    return s;
}

/// Random message text as a list of sentences with occasional oversized sentences.
struct GeneratedText {
    std::string text;
    std::vector<std::size_t> sentence_lengths;
};

inline GeneratedText message_text(chanscope::Rng& rng) {
    GeneratedText g;
    std::size_t sentences = rng.index(4) == 0 ? 1 + rng.index(40) : 1 + rng.index(6);
    for (std::size_t i = 0; i < sentences; ++i) {
        std::size_t len = rng.index(20) == 0 ? 300 + rng.index(700) : 1 + rng.index(60);
        if (i) g.text += rng.bernoulli(0.2) ? "\n\n" : " ";
        g.text += sentence(rng, len);
        g.sentence_lengths.push_back(len);
    }
    if (rng.bernoulli(0.1)) g.text = "  " + g.text + " \t";
    return g;
}

inline std::string channel_name(std::size_t i) {
    std::string s = "c";
    if (i < 10) s += "00";
    else if (i < 100) s += "0";
    return s + std::to_string(i);
}

/// Random directed graph without self-loops on `n` nodes ("c000".."c0nn").
inline chanscope::ChannelGraph random_graph(chanscope::Rng& rng, std::size_t n, double p) {
    std::set<std::string> nodes;
    for (std::size_t i = 0; i < n; ++i) nodes.insert(channel_name(i));
    chanscope::ChannelGraph g(nodes);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && rng.bernoulli(p)) g.add_edge(channel_name(i), channel_name(j), 1 + static_cast<std::int64_t>(rng.index(4)));
    return g;
}

inline chanscope::RawMessage message(const std::string& channel, std::int64_t id, chanscope::Timestamp ts,
                                     std::vector<std::string> mentions = {},
                                     std::optional<std::string> forwarded = std::nullopt, std::string text = "hallo",
                                     std::optional<std::string> lang = std::string("de")) {
    chanscope::RawMessage m;
    m.channel_id = channel;
    m.message_id = id;
    m.timestamp = ts;
    m.mentions = std::move(mentions);
    m.forwarded_from = std::move(forwarded);
    m.text = std::move(text);
    m.language = std::move(lang);
    return m;
}

} // namespace gen
