#pragma once
// Sliding-window document chunking.
//
// Windows hold max_chunk_tokens tokens and advance by
// (max_chunk_tokens - overlap_tokens); the final window absorbs the tail
// and may be shorter. Every token of the document lands in at least one
// chunk and consecutive chunks share exactly overlap_tokens tokens.
//
// Inline image markers  <image src="URI" caption="...">  are rewritten to
// the literal placeholder <image> before tokenization; each marker is
// reported with its URI, caption and host chunk (the first chunk covering
// the placeholder's token).

#include "kgrag/error.hpp"
#include "kgrag/graph.hpp"
#include "kgrag/text.hpp"

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace kgrag {

struct Document {
    std::string doc_id;
    std::string body;
    std::string source_path;
};

struct ChunkingConfig {
    std::size_t max_chunk_tokens = 1200;
    std::size_t overlap_tokens = 100;
    std::string tokenizer_id = kDefaultTokenizerId;

    void validate() const {
        if (max_chunk_tokens == 0)
            throw ArgumentError("max_chunk_tokens must be positive");
        if (overlap_tokens >= max_chunk_tokens)
            throw ArgumentError("overlap_tokens must be smaller than max_chunk_tokens");
    }
};

// One image marker found in a document, attributed to its host chunk.
struct ImageRef {
    std::string uri;
    std::string caption;
    NodeId host_chunk;
};

struct ChunkingResult {
    std::vector<ChunkNode> chunks;
    std::vector<ImageRef> images;
};

namespace detail {

struct Marker {
    std::size_t placeholder_pos = 0; // byte offset in the rewritten body
    std::string uri;
    std::string caption;
};

// Parses src/caption attributes of a marker body (between "<image" and ">").
// Attributes are double-quoted and may appear in either order.
inline bool parse_marker_attrs(std::string_view attrs, std::string& uri,
                               std::string& caption) {
    uri.clear();
    caption.clear();
    std::size_t i = 0;
    bool have_src = false;
    while (i < attrs.size()) {
        while (i < attrs.size() && (attrs[i] == ' ' || attrs[i] == '\t')) ++i;
        if (i >= attrs.size()) break;
        std::size_t eq = attrs.find('=', i);
        if (eq == std::string_view::npos) return false;
        std::string_view key = attrs.substr(i, eq - i);
        std::size_t q1 = attrs.find('"', eq + 1);
        if (q1 == std::string_view::npos) return false;
        std::size_t q2 = attrs.find('"', q1 + 1);
        if (q2 == std::string_view::npos) return false;
        std::string_view value = attrs.substr(q1 + 1, q2 - q1 - 1);
        if (key == "src") {
            uri = std::string(value);
            have_src = true;
        } else if (key == "caption") {
            caption = std::string(value);
        }
        i = q2 + 1;
    }
    return have_src;
}

// Replaces well-formed markers with the <image> placeholder. Malformed
// markers are left as plain text.
inline std::string rewrite_markers(std::string_view body, std::vector<Marker>& markers) {
    std::string out;
    out.reserve(body.size());
    std::size_t i = 0;
    while (i < body.size()) {
        std::size_t at = body.find("<image", i);
        if (at == std::string_view::npos) {
            out.append(body.substr(i));
            break;
        }
        out.append(body.substr(i, at - i));
        std::size_t close = body.find('>', at);
        bool is_marker = close != std::string_view::npos &&
                         at + 6 < body.size() &&
                         (body[at + 6] == ' ' || body[at + 6] == '\t');
        std::string uri, caption;
        if (is_marker &&
            parse_marker_attrs(body.substr(at + 6, close - (at + 6)), uri, caption)) {
            markers.push_back({out.size(), std::move(uri), std::move(caption)});
            out.append(kImagePlaceholder);
            i = close + 1;
        } else {
            out.append(body.substr(at, 6));
            i = at + 6;
        }
    }
    return out;
}

} // namespace detail

inline NodeId chunk_id_for(const std::string& doc_id, std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06zu", index);
    return "chunk:" + doc_id + ":" + buf;
}

inline NodeId image_id_for(const std::string& doc_id, std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04zu", index);
    return "img:" + doc_id + ":" + buf;
}

inline ChunkingResult chunk_document(const Document& doc, const ChunkingConfig& cfg) {
    cfg.validate();
    // Exercises the tokenizer registry so an unknown id fails up front.
    (void)tokenize("", cfg.tokenizer_id);

    ChunkingResult result;
    std::vector<detail::Marker> markers;
    const std::string text = detail::rewrite_markers(doc.body, markers);
    const std::vector<TokenSpan> tokens = tokenize_spans(text);
    if (tokens.empty()) return result;

    const std::size_t total = tokens.size();
    const std::size_t stride = cfg.max_chunk_tokens - cfg.overlap_tokens;

    std::vector<std::pair<std::size_t, std::size_t>> windows; // token [begin,end)
    for (std::size_t start = 0;; start += stride) {
        if (start + cfg.max_chunk_tokens >= total) {
            windows.emplace_back(start, total);
            break;
        }
        windows.emplace_back(start, start + cfg.max_chunk_tokens);
    }

    result.chunks.reserve(windows.size());
    for (std::size_t w = 0; w < windows.size(); ++w) {
        auto [tb, te] = windows[w];
        ChunkNode chunk;
        chunk.id = chunk_id_for(doc.doc_id, w);
        chunk.doc_id = doc.doc_id;
        chunk.token_begin = tb;
        chunk.token_end = te;
        chunk.text = text.substr(tokens[tb].begin,
                                 tokens[te - 1].end - tokens[tb].begin);
        result.chunks.push_back(std::move(chunk));
    }

    // Attribute each marker to the first chunk covering its token.
    std::size_t tok = 0;
    for (const auto& m : markers) {
        while (tok + 1 < total && tokens[tok].end <= m.placeholder_pos) ++tok;
        std::size_t host = 0;
        for (std::size_t w = 0; w < windows.size(); ++w) {
            if (tok >= windows[w].first && tok < windows[w].second) {
                host = w;
                break;
            }
        }
        result.images.push_back({m.uri, m.caption, result.chunks[host].id});
    }
    return result;
}

} // namespace kgrag
