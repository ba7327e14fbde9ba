#pragma once
// Per-chunk entity extraction.
//
// rules-v1 (offline, hermetic): emits dictionary-matched traffic terms and
// capitalized multi-word spans (>= 2 consecutive capitalized tokens), in
// first-occurrence order, deduplicated by normalized name. Descriptions
// are the containing sentence. No relations.
//
// llm: sends a fixed prompt to a completion endpoint and parses a
// pipe-delimited record format:
//   ENTITY|name|type|description
//   REL|name|relation|other_name

#include "kgrag/completion.hpp"
#include "kgrag/error.hpp"
#include "kgrag/graph.hpp"
#include "kgrag/text.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kgrag {

struct ExtractedEntity {
    std::string name;
    std::string entity_type;
    std::string description;
    // (other entity name, relation label); resolved to ids at graph build.
    std::vector<std::pair<std::string, std::string>> relations;

    bool operator==(const ExtractedEntity&) const = default;
};

class ExtractorProvider {
public:
    virtual ~ExtractorProvider() = default;
    virtual std::string id() const = 0;
    virtual std::vector<ExtractedEntity> extract(const ChunkNode& chunk) = 0;
};

// Built-in traffic vocabulary for rules-v1 when no dictionary file is
// configured.
inline std::vector<std::string> default_traffic_dictionary() {
    return {
        "stop sign",        "traffic light",     "speed limit",
        "pedestrian crossing", "seat belt",      "tire pressure",
        "emergency brake",  "right of way",      "blind spot",
        "roundabout",       "intersection",      "crosswalk",
        "lane change",      "safe distance",     "hazard lights",
        "road sign",        "traffic signal",    "school zone",
        "animal crossing",  "wet road",          "black ice",
        "braking distance", "rear-end collision","head-on collision",
        "driving license",  "blood alcohol",     "zebra crossing",
    };
}

class RulesExtractor final : public ExtractorProvider {
public:
    explicit RulesExtractor(std::vector<std::string> dictionary = default_traffic_dictionary()) {
        for (auto& phrase : dictionary) {
            std::string norm = normalize_name(phrase);
            if (!norm.empty()) dictionary_.push_back(tokenize(norm));
        }
    }

    std::string id() const override { return "rules-v1"; }

    std::vector<ExtractedEntity> extract(const ChunkNode& chunk) override {
        const std::string& text = chunk.text;
        const std::vector<TokenSpan> spans = tokenize_spans(text);

        // Normalized view of every token for dictionary matching.
        std::vector<std::string> norm_tokens;
        norm_tokens.reserve(spans.size());
        for (const auto& sp : spans)
            norm_tokens.push_back(lowercase_ascii(strip_punct_edges(
                std::string_view(text).substr(sp.begin, sp.end - sp.begin))));

        struct Hit {
            std::size_t token_pos;
            std::string name;
            std::string type;
        };
        std::vector<Hit> hits;

        for (const auto& phrase : dictionary_) {
            if (phrase.empty() || phrase.size() > spans.size()) continue;
            for (std::size_t i = 0; i + phrase.size() <= spans.size(); ++i) {
                bool match = true;
                for (std::size_t k = 0; k < phrase.size(); ++k)
                    if (norm_tokens[i + k] != phrase[k]) { match = false; break; }
                if (match) {
                    std::string name;
                    for (std::size_t k = 0; k < phrase.size(); ++k) {
                        if (k) name += ' ';
                        name += phrase[k];
                    }
                    hits.push_back({i, std::move(name), "term"});
                }
            }
        }

        // Capitalized runs of length >= 2; a sentence-ending token closes
        // its run so spans never cross sentence boundaries.
        for (std::size_t i = 0; i < spans.size();) {
            if (!starts_capitalized(text, spans[i])) { ++i; continue; }
            std::size_t j = i + 1;
            while (j < spans.size() && starts_capitalized(text, spans[j]) &&
                   !ends_sentence(text, spans[j - 1]))
                ++j;
            if (j - i >= 2) {
                std::string name;
                for (std::size_t k = i; k < j; ++k) {
                    std::string_view tok = strip_punct_edges(
                        std::string_view(text).substr(spans[k].begin,
                                                      spans[k].end - spans[k].begin));
                    if (tok.empty()) continue;
                    if (!name.empty()) name += ' ';
                    name += std::string(tok);
                }
                if (!name.empty()) hits.push_back({i, std::move(name), "name"});
            }
            i = j;
        }

        std::stable_sort(hits.begin(), hits.end(),
                         [](const Hit& a, const Hit& b) { return a.token_pos < b.token_pos; });

        std::vector<ExtractedEntity> out;
        std::set<std::string> seen;
        for (const auto& hit : hits) {
            std::string norm = normalize_name(hit.name);
            if (!seen.insert(norm).second) continue;
            ExtractedEntity e;
            e.name = norm;
            e.entity_type = hit.type;
            e.description = sentence_around(text, spans[hit.token_pos].begin);
            out.push_back(std::move(e));
        }
        return out;
    }

private:
    static bool starts_capitalized(const std::string& text, const TokenSpan& sp) {
        std::string_view tok = strip_punct_edges(
            std::string_view(text).substr(sp.begin, sp.end - sp.begin));
        return !tok.empty() && tok[0] >= 'A' && tok[0] <= 'Z';
    }

    static bool ends_sentence(const std::string& text, const TokenSpan& sp) {
        char last = text[sp.end - 1];
        return last == '.' || last == '!' || last == '?';
    }

    // The sentence containing byte position pos, capped at 240 bytes.
    static std::string sentence_around(const std::string& text, std::size_t pos) {
        auto is_end = [](char c) { return c == '.' || c == '!' || c == '?'; };
        std::size_t begin = 0;
        for (std::size_t i = pos; i > 0; --i)
            if (is_end(text[i - 1])) { begin = i; break; }
        std::size_t end = text.size();
        for (std::size_t i = pos; i < text.size(); ++i)
            if (is_end(text[i])) { end = i + 1; break; }
        return cap_utf8(trim(std::string_view(text).substr(begin, end - begin)), 240);
    }

    std::vector<std::vector<std::string>> dictionary_; // tokenized phrases
};

class LlmExtractor final : public ExtractorProvider {
public:
    explicit LlmExtractor(TextCompleter& completer) : completer_(completer) {}

    std::string id() const override { return "llm"; }

    std::vector<ExtractedEntity> extract(const ChunkNode& chunk) override {
        const std::string prompt =
            "Extract the key entities and their relations from the passage "
            "below. Reply with one record per line:\n"
            "ENTITY|name|type|one-sentence description\n"
            "REL|name|relation|other name\n"
            "No other text.\n\nPassage:\n" + chunk.text + "\n";
        const std::string raw = completer_.complete(prompt);
        return parse_records(raw);
    }

    // Parses the delimited record format. Kept separate so tests can feed
    // canned responses.
    static std::vector<ExtractedEntity> parse_records(const std::string& raw) {
        std::vector<ExtractedEntity> out;
        std::size_t pos = 0;
        std::size_t line_no = 0;
        while (pos <= raw.size()) {
            std::size_t nl = raw.find('\n', pos);
            std::string line = trim(nl == std::string::npos ? raw.substr(pos)
                                                            : raw.substr(pos, nl - pos));
            ++line_no;
            if (!line.empty()) {
                std::vector<std::string> fields = split_fields(line);
                if (fields.size() != 4 || (fields[0] != "ENTITY" && fields[0] != "REL"))
                    throw ParseError("extractor response", line_no,
                                     "malformed record: " + line + "; raw response: " + raw);
                if (fields[0] == "ENTITY") {
                    ExtractedEntity e;
                    e.name = normalize_name(fields[1]);
                    e.entity_type = fields[2];
                    e.description = fields[3];
                    if (!e.name.empty()) out.push_back(std::move(e));
                } else {
                    std::string name = normalize_name(fields[1]);
                    auto it = std::find_if(out.begin(), out.end(),
                                           [&](const auto& e) { return e.name == name; });
                    if (it != out.end())
                        it->relations.emplace_back(normalize_name(fields[3]), fields[2]);
                }
            }
            if (nl == std::string::npos) break;
            pos = nl + 1;
        }
        return out;
    }

private:
    static std::vector<std::string> split_fields(const std::string& line) {
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            std::size_t bar = line.find('|', pos);
            if (bar == std::string::npos) {
                fields.push_back(trim(line.substr(pos)));
                break;
            }
            fields.push_back(trim(line.substr(pos, bar - pos)));
            pos = bar + 1;
        }
        return fields;
    }

    TextCompleter& completer_;
};

} // namespace kgrag
