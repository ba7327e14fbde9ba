#pragma once
// Corpus ingestion: documents -> chunks -> entities/images/edges.
//
// build_graph is deterministic for a fixed corpus, config and offline
// extractor: documents are processed in sorted doc_id order, chunks in
// position order, and all merge rules are order-fixed.
//
// Edge sources: extractor-reported relations (labeled) plus same-chunk
// co-occurrence, including image nodes against the entities of their host
// chunk. A relation target never seen before becomes a bare entity
// grounded in the current chunk.
//
// Corpus input: a directory of .txt/.md files (doc_id = relative path) or
// a .jsonl file with {"doc_id":..., "body":...} records.

#include "kgrag/chunker.hpp"
#include "kgrag/error.hpp"
#include "kgrag/extract.hpp"
#include "kgrag/graph.hpp"
#include "kgrag/text.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace kgrag {

// Build timestamp; honors SOURCE_DATE_EPOCH so store bytes are
// reproducible when the caller pins it.
inline std::int64_t build_timestamp() {
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        long long v = std::strtoll(epoch, &end, 10);
        if (end && *end == '\0') return static_cast<std::int64_t>(v);
    }
    return static_cast<std::int64_t>(std::time(nullptr));
}

inline std::string ingest_config_hash(const ChunkingConfig& cfg,
                                      const std::string& extractor_id) {
    std::ostringstream canon;
    canon << "max_chunk_tokens=" << cfg.max_chunk_tokens
          << ";overlap_tokens=" << cfg.overlap_tokens
          << ";tokenizer=" << cfg.tokenizer_id
          << ";extractor=" << extractor_id;
    return to_hex(fnv1a64(canon.str()));
}

inline KnowledgeGraph build_graph(std::vector<Document> corpus,
                                  const ChunkingConfig& cfg,
                                  ExtractorProvider& extractor,
                                  std::string config_hash = {}) {
    cfg.validate();
    std::sort(corpus.begin(), corpus.end(),
              [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
    for (std::size_t i = 1; i < corpus.size(); ++i)
        if (corpus[i].doc_id == corpus[i - 1].doc_id)
            throw IntegrityError("duplicate doc_id in corpus: " + corpus[i].doc_id);

    KnowledgeGraph graph;
    graph.meta().config_hash =
        config_hash.empty() ? ingest_config_hash(cfg, extractor.id()) : config_hash;
    graph.meta().tokenizer_id = cfg.tokenizer_id;
    graph.meta().created_unix = build_timestamp();

    for (const auto& doc : corpus) {
        ChunkingResult chunked = chunk_document(doc, cfg);
        for (const auto& chunk : chunked.chunks) graph.add_chunk(chunk);

        std::size_t image_index = 0;
        std::map<NodeId, std::vector<NodeId>> chunk_members; // chunk -> entity ids, insertion order

        for (const auto& chunk : chunked.chunks) {
            std::vector<ExtractedEntity> extracted;
            try {
                extracted = extractor.extract(chunk);
            } catch (const Error& e) {
                throw Error("extraction failed at doc '" + doc.doc_id + "' chunk '" +
                            chunk.id + "': " + e.what());
            }

            std::vector<NodeId>& members = chunk_members[chunk.id];
            auto note_member = [&members](const NodeId& id) {
                if (std::find(members.begin(), members.end(), id) == members.end())
                    members.push_back(id);
            };

            for (const auto& ext : extracted) {
                NodeId id = graph.add_entity(ext.name, ext.entity_type,
                                             ext.description, chunk.id);
                note_member(id);
                for (const auto& [other_name, relation] : ext.relations) {
                    if (normalize_name(other_name).empty()) continue;
                    NodeId other = entity_id_for(other_name);
                    if (!graph.has_entity(other))
                        other = graph.add_entity(other_name, "", "", chunk.id);
                    graph.add_ee_edge(id, other, relation);
                }
            }

            // Same-chunk co-occurrence edges.
            for (std::size_t a = 0; a < members.size(); ++a)
                for (std::size_t b = a + 1; b < members.size(); ++b)
                    graph.add_ee_edge(members[a], members[b],
                                      KnowledgeGraph::kCooccurrenceRelation);
        }

        for (const auto& ref : chunked.images) {
            ImageNode image;
            image.id = image_id_for(doc.doc_id, image_index++);
            image.uri = ref.uri;
            image.caption = ref.caption;
            image.placeholder_chunk = ref.host_chunk;
            graph.add_image(image);
            for (const auto& member : chunk_members[ref.host_chunk])
                graph.add_ee_edge(image.id, member,
                                  KnowledgeGraph::kCooccurrenceRelation);
        }
    }
    return graph;
}

// --- corpus loading -------------------------------------------------------

inline std::vector<Document> load_corpus_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<Document> docs;
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        if (ext == ".txt" || ext == ".md") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream body;
        body << in.rdbuf();
        if (body.str().empty()) continue; // empty files carry nothing to index
        Document doc;
        doc.doc_id = fs::relative(path, dir).generic_string();
        doc.body = body.str();
        doc.source_path = path.string();
        docs.push_back(std::move(doc));
    }
    return docs;
}

inline std::vector<Document> load_corpus_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::vector<Document> docs;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            Document doc;
            doc.doc_id = j.at("doc_id").get<std::string>();
            doc.body = j.at("body").get<std::string>();
            doc.source_path = path;
            if (doc.doc_id.empty()) throw Error("doc_id is empty");
            if (doc.body.empty()) throw Error("body is empty");
            if (!ids.insert(doc.doc_id).second)
                throw Error("duplicate doc_id: " + doc.doc_id);
            docs.push_back(std::move(doc));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path, line_no, e.what());
        } catch (const Error& e) {
            throw ParseError(path, line_no, e.what());
        }
    }
    return docs;
}

inline std::vector<Document> load_corpus(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::is_directory(path)) return load_corpus_dir(path);
    if (fs::is_regular_file(path)) {
        if (fs::path(path).extension() == ".jsonl") return load_corpus_jsonl(path);
        throw ArgumentError("corpus file must be .jsonl: " + path);
    }
    throw Error("corpus path not found: " + path);
}

} // namespace kgrag
