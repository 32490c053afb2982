#pragma once

// Sentence-aligned chunking of long messages into word-bounded parts.

#include <chanscope/core.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace chanscope {

inline constexpr std::size_t kDefaultMaxChunkWords = 412;

/// Half-open byte range into a text.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    friend bool operator==(const Span&, const Span&) = default;
};

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

/// Words are maximal runs of non-whitespace bytes.
inline std::vector<Span> word_spans(std::string_view text) {
    std::vector<Span> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        if (i == text.size()) break;
        std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        words.push_back({start, i});
    }
    return words;
}

inline std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> out;
    for (auto s : word_spans(text)) out.emplace_back(text.substr(s.begin, s.size()));
    return out;
}

/// Sentence-boundary provider. Returned spans must be ordered and non-overlapping; words are
/// attributed to the sentence containing their first byte, so imprecise spans never lose words.
class SentenceSegmenter {
public:
    virtual ~SentenceSegmenter() = default;
    virtual std::vector<Span> sentences(std::string_view text) const = 0;
};

/// Rule-based splitter: a sentence ends at '.', '!' or '?' (optionally followed by closing
/// quotes/brackets) when the next word starts with an uppercase letter or digit and the
/// terminating word is not a known abbreviation. Approximates a statistical segmenter.
class RuleSentenceSegmenter : public SentenceSegmenter {
public:
    RuleSentenceSegmenter() = default;

    std::vector<Span> sentences(std::string_view text) const override {
        auto words = word_spans(text);
        std::vector<Span> out;
        if (words.empty()) return out;
        std::size_t start = words.front().begin;
        for (std::size_t w = 0; w + 1 < words.size(); ++w) {
            auto word = text.substr(words[w].begin, words[w].size());
            if (ends_sentence(word) && starts_sentence(text.substr(words[w + 1].begin, words[w + 1].size()))) {
                out.push_back({start, words[w].end});
                start = words[w + 1].begin;
            }
        }
        out.push_back({start, words.back().end});
        return out;
    }

private:
    static bool ends_sentence(std::string_view word) {
        while (!word.empty() && (word.back() == '"' || word.back() == '\'' || word.back() == ')' ||
                                 word.back() == ']'))
            word.remove_suffix(1);
        if (word.empty()) return false;
        char last = word.back();
        if (last != '.' && last != '!' && last != '?') return false;
        if (last == '.' && is_abbreviation(word)) return false;
        return true;
    }

    static bool is_abbreviation(std::string_view word) {
        static constexpr std::array<std::string_view, 28> abbreviations = {
            "z.b.", "bzw.", "dr.", "nr.", "usw.", "ca.", "etc.", "mr.", "mrs.", "ms.",
            "st.", "vgl.", "prof.", "u.a.", "d.h.", "evtl.", "ggf.", "inkl.", "jh.", "str.",
            "e.g.", "i.e.", "vs.", "u.s.", "bspw.", "sog.", "z.t.", "o.ä."};
        std::string lower(word);
        for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        // strip leading punctuation such as "(" before comparing
        auto first = lower.find_first_not_of("(\"'[");
        if (first != std::string::npos) lower.erase(0, first);
        if (std::find(abbreviations.begin(), abbreviations.end(), lower) != abbreviations.end()) return true;
        // single letters ("A.") and ordinals ("3.") are not treated as boundaries
        return lower.size() == 2 && std::isalnum(static_cast<unsigned char>(lower[0]));
    }

    static bool starts_sentence(std::string_view word) {
        while (!word.empty() && (word.front() == '"' || word.front() == '\'' || word.front() == '(' ||
                                 word.front() == '['))
            word.remove_prefix(1);
        if (word.empty()) return false;
        auto c = static_cast<unsigned char>(word[0]);
        if (std::isupper(c) || std::isdigit(c)) return true;
        // UTF-8 uppercase umlauts: Ä (C3 84), Ö (C3 96), Ü (C3 9C)
        if (c == 0xC3 && word.size() > 1) {
            auto d = static_cast<unsigned char>(word[1]);
            return d == 0x84 || d == 0x96 || d == 0x9C;
        }
        return false;
    }
};

struct Chunk {
    MessageKey message_key;
    std::size_t index = 0;
    std::string text;
    std::size_t word_count = 0;
    /// Byte range of the chunk inside the original message.
    Span span;
    /// True when this chunk was cut from inside a sentence longer than the word limit.
    bool hard_split = false;
};

/// Splits `text` into chunks of at most `max_words` words without cutting sentences. Whole
/// sentences are packed greedily in order; a sentence longer than the limit is emitted on its own,
/// cut every `max_words` words. Empty text yields a single empty chunk.
inline std::vector<Chunk> chunk_message(std::string_view text, const MessageKey& key = {},
                                        std::size_t max_words = kDefaultMaxChunkWords,
                                        const SentenceSegmenter& segmenter = RuleSentenceSegmenter{}) {
    if (max_words < 1) throw Error("chunk_message: max_words must be >= 1");
    auto words = word_spans(text);
    std::vector<Chunk> chunks;
    auto emit = [&](std::size_t first, std::size_t last, bool hard) { // words [first, last)
        Chunk c;
        c.message_key = key;
        c.index = chunks.size();
        c.span = {words[first].begin, words[last - 1].end};
        c.text = std::string(text.substr(c.span.begin, c.span.size()));
        c.word_count = last - first;
        c.hard_split = hard;
        chunks.push_back(std::move(c));
    };
    if (words.empty()) {
        Chunk c;
        c.message_key = key;
        chunks.push_back(std::move(c));
        return chunks;
    }
    if (words.size() <= max_words) {
        emit(0, words.size(), false);
        return chunks;
    }

    // sentence id per word: the last sentence starting at or before the word's first byte
    auto spans = segmenter.sentences(text);
    std::vector<std::size_t> sentence_starts; // word index where each sentence begins
    {
        std::size_t s = 0;
        std::size_t current = static_cast<std::size_t>(-1);
        for (std::size_t w = 0; w < words.size(); ++w) {
            while (s < spans.size() && spans[s].begin <= words[w].begin) ++s;
            std::size_t sid = s == 0 ? 0 : s - 1;
            if (sid != current || w == 0) {
                sentence_starts.push_back(w);
                current = sid;
            }
        }
    }
    sentence_starts.push_back(words.size());

    std::size_t open = 0, open_count = 0; // pending chunk: words [open, open + open_count)
    for (std::size_t s = 0; s + 1 < sentence_starts.size(); ++s) {
        std::size_t first = sentence_starts[s], last = sentence_starts[s + 1], len = last - first;
        if (len > max_words) {
            if (open_count) emit(open, open + open_count, false);
            for (std::size_t w = first; w < last; w += max_words) emit(w, std::min(last, w + max_words), true);
            open = last;
            open_count = 0;
            continue;
        }
        if (open_count + len > max_words) {
            emit(open, open + open_count, false);
            open = first;
            open_count = 0;
        }
        if (open_count == 0) open = first;
        open_count += len;
    }
    if (open_count) emit(open, open + open_count, false);
    return chunks;
}

} // namespace chanscope
