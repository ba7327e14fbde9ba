#pragma once
// A Store bundles the knowledge graph with its three vector indexes and is
// what retrieval operates on. Immutable once built; safe to share across
// reader threads.
//
// Embedding recipes (per node kind):
//   entity  name, plus ": " + description when present
//   image   caption (images with empty captions stay unindexed but remain
//           reachable through graph edges)
//   chunk   chunk text

#include "kgrag/embedding.hpp"
#include "kgrag/error.hpp"
#include "kgrag/graph.hpp"
#include "kgrag/vector_index.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <string>

namespace kgrag {

struct StoreIndexes {
    VectorIndex entities{"entity"};
    VectorIndex images{"image"};
    VectorIndex chunks{"chunk"};

    bool operator==(const StoreIndexes&) const = default;
};

struct Store {
    KnowledgeGraph graph;
    StoreIndexes indexes;
    std::string embedding_provider;
    std::size_t embedding_dim = 0;

    bool operator==(const Store&) const = default;
};

inline std::string entity_embed_text(const EntityNode& e) {
    return e.description.empty() ? e.name : e.name + ": " + e.description;
}

inline StoreIndexes build_indexes(const KnowledgeGraph& graph,
                                  EmbeddingProvider& provider) {
    StoreIndexes idx;
    for (const auto& [id, e] : graph.entities())
        idx.entities.add(id, provider.embed(entity_embed_text(e)));
    for (const auto& [id, im] : graph.images()) {
        if (trim(im.caption).empty()) continue;
        idx.images.add(id, provider.embed(im.caption));
    }
    for (const auto& [id, c] : graph.chunks())
        idx.chunks.add(id, provider.embed(c.text));
    return idx;
}

inline void save_store(const Store& store, const std::string& dir) {
    std::filesystem::create_directories(dir);
    store.graph.save(dir);
    store.indexes.entities.persist(dir);
    store.indexes.images.persist(dir);
    store.indexes.chunks.persist(dir);
    // Rewrite the manifest with the embedding fields appended.
    nlohmann::json m{{"format_version", kManifestVersion},
                     {"config_hash", store.graph.meta().config_hash},
                     {"tokenizer_id", store.graph.meta().tokenizer_id},
                     {"embedding_provider", store.embedding_provider},
                     {"embedding_dim", store.embedding_dim}};
    std::ofstream out(dir + "/manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + dir + "/manifest.json");
    out << m.dump(2) << '\n';
}

inline Store load_store(const std::string& dir) {
    Store store;
    store.graph = KnowledgeGraph::load(dir);
    store.indexes.entities = VectorIndex::restore(dir, "entity");
    store.indexes.images = VectorIndex::restore(dir, "image");
    store.indexes.chunks = VectorIndex::restore(dir, "chunk");

    const std::string path = dir + "/manifest.json";
    std::ifstream in(path, std::ios::binary);
    if (in) {
        try {
            nlohmann::json m;
            in >> m;
            store.embedding_provider = m.value("embedding_provider", "");
            store.embedding_dim = m.value("embedding_dim", std::size_t{0});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path, e.what());
        }
    }

    // Index records must reference graph nodes of the matching kind.
    for (const auto& [id, vec] : store.indexes.entities.records())
        if (!store.graph.has_entity(id))
            throw IntegrityError("vectors-entity.jsonl references unknown entity " + id);
    for (const auto& [id, vec] : store.indexes.images.records())
        if (!store.graph.has_image(id))
            throw IntegrityError("vectors-image.jsonl references unknown image " + id);
    for (const auto& [id, vec] : store.indexes.chunks.records())
        if (!store.graph.has_chunk(id))
            throw IntegrityError("vectors-chunk.jsonl references unknown chunk " + id);
    return store;
}

} // namespace kgrag
