#pragma once
// Query keyword extraction. simple-v1 is the hermetic default: lowercased
// non-stopword tokens of length >= 3, deduplicated, in question order.
// The llm provider asks a completion endpoint instead. Both fall back to
// the whole question as a single keyword, so the result is never empty.

#include "kgrag/completion.hpp"
#include "kgrag/text.hpp"

#include <set>
#include <string>
#include <vector>

namespace kgrag {

// Pinned stopword list for simple-v1.
inline const std::set<std::string>& stopwords_v1() {
    static const std::set<std::string> words{
        "a",      "about",  "above",   "after",  "again",  "against", "all",
        "am",     "an",     "and",     "any",    "are",    "as",      "at",
        "be",     "been",   "before",  "being",  "below",  "between", "both",
        "but",    "by",     "can",     "could",  "did",    "do",      "does",
        "doing",  "done",   "down",    "during", "each",   "few",     "for",
        "from",   "further","had",     "has",    "have",   "having",  "he",
        "her",    "here",   "hers",    "him",    "his",    "how",     "i",
        "if",     "in",     "into",    "is",     "it",     "its",     "just",
        "may",    "me",     "might",   "more",   "most",   "must",    "my",
        "no",     "not",    "now",     "of",     "off",    "on",      "once",
        "only",   "or",     "other",   "our",    "out",    "over",    "own",
        "same",   "shall",  "she",     "should", "so",     "some",    "such",
        "than",   "that",   "the",     "their",  "them",   "then",    "there",
        "these",  "they",   "this",    "those",  "through","to",      "too",
        "under",  "until",  "up",      "us",     "very",   "was",     "we",
        "were",   "what",   "when",    "where",  "which",  "while",   "who",
        "whom",   "whose",  "why",     "will",   "with",   "would",   "you",
        "your",
    };
    return words;
}

class KeywordProvider {
public:
    virtual ~KeywordProvider() = default;
    virtual std::string id() const = 0;
    // Never returns an empty list; implementations fall back to {question}.
    virtual std::vector<std::string> extract(const std::string& question) = 0;
};

class SimpleKeywordProvider final : public KeywordProvider {
public:
    std::string id() const override { return "simple-v1"; }

    std::vector<std::string> extract(const std::string& question) override {
        std::vector<std::string> keywords;
        std::set<std::string> seen;
        for (const auto& raw : tokenize(question)) {
            std::string tok = lowercase_ascii(strip_punct_edges(raw));
            if (tok.size() < 3) continue;
            if (stopwords_v1().count(tok)) continue;
            if (seen.insert(tok).second) keywords.push_back(std::move(tok));
        }
        if (keywords.empty()) keywords.push_back(question);
        return keywords;
    }
};

class LlmKeywordProvider final : public KeywordProvider {
public:
    explicit LlmKeywordProvider(TextCompleter& completer) : completer_(completer) {}

    std::string id() const override { return "llm"; }

    std::vector<std::string> extract(const std::string& question) override {
        const std::string prompt =
            "Extract the critical keywords from the question below. "
            "Reply with the keywords only, one per line, no numbering.\n\n"
            "Question: " + question + "\n";
        const std::string raw = completer_.complete(prompt);
        std::vector<std::string> keywords;
        std::set<std::string> seen;
        std::size_t pos = 0;
        while (pos <= raw.size()) {
            std::size_t nl = raw.find('\n', pos);
            std::string line = trim(nl == std::string::npos ? raw.substr(pos)
                                                            : raw.substr(pos, nl - pos));
            if (!line.empty() && seen.insert(line).second)
                keywords.push_back(std::move(line));
            if (nl == std::string::npos) break;
            pos = nl + 1;
        }
        if (keywords.empty()) keywords.push_back(question);
        return keywords;
    }

private:
    TextCompleter& completer_;
};

} // namespace kgrag
