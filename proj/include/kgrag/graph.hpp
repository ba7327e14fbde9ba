#pragma once
// Heterogeneous knowledge graph: entity / image / chunk nodes plus
// entity-entity and entity-chunk edges.
//
// Identity and merge rules:
// - Entity ids derive from the normalized name ("ent:" + normalized), so
//   equal names always resolve to the same node and re-inserts merge.
// - Entity-entity edges are undirected and stored once with endpoints in
//   lexicographic order.
// - Every entity stays grounded: it is created with a chunk edge and keeps
//   one per contributing chunk.
//
// On-disk layout (directory):
//   graph.jsonl   one record per line, kind in {entity,image,chunk,
//                 ee_edge,ec_edge,meta}, sorted by (kind, id) so the bytes
//                 are canonical
//   manifest.json format_version / config_hash / tokenizer_id

#include "kgrag/error.hpp"
#include "kgrag/text.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace kgrag {

using NodeId = std::string;

inline constexpr const char* kImagePlaceholder = "<image>";
inline constexpr int kManifestVersion = 1;
inline constexpr std::size_t kMaxDescriptionBytes = 4096;
inline constexpr const char* kDescriptionSep = " | ";

struct EntityNode {
    NodeId id;
    std::string name; // normalized surface form
    std::string entity_type;
    std::string description;
    std::vector<NodeId> source_chunks; // sorted, unique

    bool operator==(const EntityNode&) const = default;
};

struct ImageNode {
    NodeId id;
    std::string uri;
    std::string caption;
    NodeId placeholder_chunk;

    bool operator==(const ImageNode&) const = default;
};

struct ChunkNode {
    NodeId id;
    std::string text;
    std::string doc_id;
    std::uint64_t token_begin = 0;
    std::uint64_t token_end = 0;

    std::uint64_t token_count() const { return token_end - token_begin; }

    bool operator==(const ChunkNode&) const = default;
};

struct EntityEntityEdge {
    NodeId source; // source <= target lexicographically
    NodeId target;
    std::string relation;
    double weight = 1.0;

    bool operator==(const EntityEntityEdge&) const = default;
};

struct EntityChunkEdge {
    NodeId entity;
    NodeId chunk;

    bool operator==(const EntityChunkEdge&) const = default;
    auto operator<=>(const EntityChunkEdge&) const = default;
};

struct GraphMeta {
    std::string config_hash;
    std::string tokenizer_id = kDefaultTokenizerId;
    std::int64_t created_unix = 0;

    bool operator==(const GraphMeta&) const = default;
};

inline NodeId entity_id_for(std::string_view name) {
    return "ent:" + normalize_name(name);
}

class KnowledgeGraph {
public:
    // --- node / edge insertion -------------------------------------------

    NodeId add_chunk(ChunkNode chunk) {
        if (chunk.id.empty()) throw ArgumentError("chunk id must be non-empty");
        if (chunk.token_end < chunk.token_begin)
            throw ArgumentError("chunk token span is inverted: " + chunk.id);
        NodeId id = chunk.id;
        chunks_[id] = std::move(chunk);
        return id;
    }

    // Inserts or merges an entity; returns the canonical id. Merging appends
    // the description (deduplicated by segment, capped) and grounds the
    // entity in the extra chunk.
    NodeId add_entity(std::string_view name, std::string_view entity_type,
                      std::string_view description, const NodeId& chunk) {
        if (!chunks_.count(chunk))
            throw IntegrityError("add_entity: unknown chunk id: " + chunk);
        std::string norm = normalize_name(name);
        if (norm.empty()) throw ArgumentError("entity name is empty after normalization");
        NodeId id = "ent:" + norm;

        auto it = entities_.find(id);
        if (it == entities_.end()) {
            EntityNode node;
            node.id = id;
            node.name = norm;
            node.entity_type = std::string(entity_type);
            node.description = cap_utf8(description, kMaxDescriptionBytes);
            node.source_chunks = {chunk};
            entities_.emplace(id, std::move(node));
        } else {
            EntityNode& node = it->second;
            merge_description(node.description, description);
            if (node.entity_type.empty() && !entity_type.empty())
                node.entity_type = std::string(entity_type);
            insert_sorted(node.source_chunks, chunk);
        }
        add_ec_edge(id, chunk);
        return id;
    }

    NodeId add_image(ImageNode image) {
        if (image.id.empty()) throw ArgumentError("image id must be non-empty");
        auto chunk_it = chunks_.find(image.placeholder_chunk);
        if (chunk_it == chunks_.end())
            throw IntegrityError("add_image: unknown chunk id: " + image.placeholder_chunk);
        if (chunk_it->second.text.find(kImagePlaceholder) == std::string::npos)
            throw IntegrityError("add_image: chunk " + image.placeholder_chunk +
                                 " has no " + kImagePlaceholder + " placeholder");
        NodeId id = image.id;
        NodeId chunk = image.placeholder_chunk;
        images_[id] = std::move(image);
        add_ec_edge(id, chunk);
        return id;
    }

    // Undirected edge between entity/image nodes. A labeled relation wins
    // over the generic "co-occurrence" label when both are inserted.
    void add_ee_edge(const NodeId& a, const NodeId& b, std::string relation = {},
                     double weight = 1.0) {
        if (a == b) return;
        require_entity_or_image(a, "add_ee_edge");
        require_entity_or_image(b, "add_ee_edge");
        if (weight < 0) throw ArgumentError("edge weight must be non-negative");
        auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        auto it = ee_edges_.find(key);
        if (it == ee_edges_.end()) {
            ee_edges_.emplace(key, EntityEntityEdge{key.first, key.second,
                                                    std::move(relation), weight});
            insert_sorted(adjacency_[key.first], key.second);
            insert_sorted(adjacency_[key.second], key.first);
        } else if (it->second.relation == kCooccurrenceRelation &&
                   !relation.empty() && relation != kCooccurrenceRelation) {
            it->second.relation = std::move(relation);
        }
    }

    void add_ec_edge(const NodeId& entity, const NodeId& chunk) {
        require_entity_or_image(entity, "add_ec_edge");
        if (!chunks_.count(chunk))
            throw IntegrityError("add_ec_edge: unknown chunk id: " + chunk);
        if (ec_edges_.insert({entity, chunk}).second) {
            insert_sorted(entity_chunks_[entity], chunk);
            insert_sorted(chunk_entities_[chunk], entity);
        }
    }

    // --- traversal --------------------------------------------------------

    // Nodes one entity-entity edge away, both directions. Sorted by id.
    const std::vector<NodeId>& neighbors(const NodeId& node) const {
        require_entity_or_image_found(node, "neighbors");
        auto it = adjacency_.find(node);
        return it == adjacency_.end() ? kEmptyIds : it->second;
    }

    // Chunk ids grounded to an entity or image node. Sorted by id.
    const std::vector<NodeId>& chunks_of(const NodeId& entity) const {
        require_entity_or_image_found(entity, "chunks_of");
        auto it = entity_chunks_.find(entity);
        return it == entity_chunks_.end() ? kEmptyIds : it->second;
    }

    // Reverse of chunks_of: entity/image ids edge-linked to a chunk.
    const std::vector<NodeId>& entities_of(const NodeId& chunk) const {
        if (!chunks_.count(chunk))
            throw NotFoundError("entities_of: unknown chunk id: " + chunk);
        auto it = chunk_entities_.find(chunk);
        return it == chunk_entities_.end() ? kEmptyIds : it->second;
    }

    // --- lookup -----------------------------------------------------------

    bool has_entity(const NodeId& id) const { return entities_.count(id) > 0; }
    bool has_image(const NodeId& id) const { return images_.count(id) > 0; }
    bool has_chunk(const NodeId& id) const { return chunks_.count(id) > 0; }

    const EntityNode& entity(const NodeId& id) const {
        auto it = entities_.find(id);
        if (it == entities_.end()) throw NotFoundError("unknown entity id: " + id);
        return it->second;
    }
    const ImageNode& image(const NodeId& id) const {
        auto it = images_.find(id);
        if (it == images_.end()) throw NotFoundError("unknown image id: " + id);
        return it->second;
    }
    const ChunkNode& chunk(const NodeId& id) const {
        auto it = chunks_.find(id);
        if (it == chunks_.end()) throw NotFoundError("unknown chunk id: " + id);
        return it->second;
    }

    const EntityNode* find_entity_by_name(std::string_view name) const {
        auto it = entities_.find(entity_id_for(name));
        return it == entities_.end() ? nullptr : &it->second;
    }

    const std::map<NodeId, EntityNode>& entities() const { return entities_; }
    const std::map<NodeId, ImageNode>& images() const { return images_; }
    const std::map<NodeId, ChunkNode>& chunks() const { return chunks_; }
    const std::map<std::pair<NodeId, NodeId>, EntityEntityEdge>& ee_edges() const {
        return ee_edges_;
    }
    const std::set<EntityChunkEdge>& ec_edges() const { return ec_edges_; }

    GraphMeta& meta() { return meta_; }
    const GraphMeta& meta() const { return meta_; }

    bool empty() const {
        return entities_.empty() && images_.empty() && chunks_.empty();
    }

    bool operator==(const KnowledgeGraph& other) const {
        return entities_ == other.entities_ && images_ == other.images_ &&
               chunks_ == other.chunks_ && ee_edges_ == other.ee_edges_ &&
               ec_edges_ == other.ec_edges_ && meta_ == other.meta_;
    }

    // --- persistence ------------------------------------------------------

    void save(const std::string& dir) const {
        std::ofstream out(dir + "/graph.jsonl", std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + dir + "/graph.jsonl");
        // kinds emitted in alphabetical order: chunk, ec_edge, ee_edge,
        // entity, image, meta; each kind sorted by id (maps are ordered).
        for (const auto& [id, c] : chunks_) {
            nlohmann::json j{{"kind", "chunk"},       {"id", id},
                             {"text", c.text},        {"doc_id", c.doc_id},
                             {"token_begin", c.token_begin},
                             {"token_end", c.token_end}};
            out << j.dump() << '\n';
        }
        for (const auto& e : ec_edges_) {
            nlohmann::json j{{"kind", "ec_edge"}, {"entity", e.entity}, {"chunk", e.chunk}};
            out << j.dump() << '\n';
        }
        for (const auto& [key, e] : ee_edges_) {
            nlohmann::json j{{"kind", "ee_edge"},   {"source", e.source},
                             {"target", e.target},  {"relation", e.relation},
                             {"weight", e.weight}};
            out << j.dump() << '\n';
        }
        for (const auto& [id, e] : entities_) {
            nlohmann::json j{{"kind", "entity"},          {"id", id},
                             {"name", e.name},            {"entity_type", e.entity_type},
                             {"description", e.description},
                             {"source_chunks", e.source_chunks}};
            out << j.dump() << '\n';
        }
        for (const auto& [id, im] : images_) {
            nlohmann::json j{{"kind", "image"},   {"id", id},
                             {"uri", im.uri},     {"caption", im.caption},
                             {"placeholder_chunk", im.placeholder_chunk}};
            out << j.dump() << '\n';
        }
        nlohmann::json meta{{"kind", "meta"},
                            {"config_hash", meta_.config_hash},
                            {"tokenizer_id", meta_.tokenizer_id},
                            {"created_unix", meta_.created_unix}};
        out << meta.dump() << '\n';
        if (!out) throw Error("write failed: " + dir + "/graph.jsonl");

        write_manifest(dir);
    }

    static KnowledgeGraph load(const std::string& dir) {
        check_manifest(dir);

        const std::string path = dir + "/graph.jsonl";
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open " + path);

        KnowledgeGraph g;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path, line_no, e.what());
            }
            try {
                g.load_record(j);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path, line_no, e.what());
            } catch (const Error& e) {
                throw ParseError(path, line_no, e.what());
            }
        }
        g.check_integrity(path);
        return g;
    }

    // Validates every edge endpoint and entity grounding; used after load
    // and available to tests.
    void check_integrity(const std::string& context = "graph") const {
        for (const auto& e : ec_edges_) {
            if (!entities_.count(e.entity) && !images_.count(e.entity))
                throw IntegrityError(context + ": ec_edge references unknown entity " + e.entity);
            if (!chunks_.count(e.chunk))
                throw IntegrityError(context + ": ec_edge references unknown chunk " + e.chunk);
        }
        for (const auto& [key, e] : ee_edges_) {
            for (const NodeId* n : {&e.source, &e.target})
                if (!entities_.count(*n) && !images_.count(*n))
                    throw IntegrityError(context + ": ee_edge references unknown node " + *n);
            if (e.source > e.target)
                throw IntegrityError(context + ": ee_edge endpoints not canonical: " +
                                     e.source + " > " + e.target);
        }
        for (const auto& [id, e] : entities_) {
            if (e.source_chunks.empty())
                throw IntegrityError(context + ": entity has no source chunks: " + id);
            for (const auto& c : e.source_chunks)
                if (!chunks_.count(c))
                    throw IntegrityError(context + ": entity " + id +
                                         " references unknown chunk " + c);
        }
        for (const auto& [id, im] : images_) {
            auto it = chunks_.find(im.placeholder_chunk);
            if (it == chunks_.end())
                throw IntegrityError(context + ": image " + id +
                                     " references unknown chunk " + im.placeholder_chunk);
            if (it->second.text.find(kImagePlaceholder) == std::string::npos)
                throw IntegrityError(context + ": host chunk of image " + id +
                                     " lacks the placeholder");
        }
    }

    static constexpr const char* kCooccurrenceRelation = "co-occurrence";

private:
    static inline const std::vector<NodeId> kEmptyIds{};

    static void insert_sorted(std::vector<NodeId>& v, const NodeId& id) {
        auto it = std::lower_bound(v.begin(), v.end(), id);
        if (it == v.end() || *it != id) v.insert(it, id);
    }

    static void merge_description(std::string& existing, std::string_view incoming) {
        if (incoming.empty()) return;
        if (existing.empty()) {
            existing = cap_utf8(incoming, kMaxDescriptionBytes);
            return;
        }
        // Skip if the incoming text already appears as a segment.
        std::size_t pos = 0;
        while (pos <= existing.size()) {
            std::size_t next = existing.find(kDescriptionSep, pos);
            std::string_view seg = next == std::string::npos
                                       ? std::string_view(existing).substr(pos)
                                       : std::string_view(existing).substr(pos, next - pos);
            if (seg == incoming) return;
            if (next == std::string::npos) break;
            pos = next + 3;
        }
        std::string merged = existing;
        merged += kDescriptionSep;
        merged += incoming;
        existing = cap_utf8(merged, kMaxDescriptionBytes);
    }

    void require_entity_or_image(const NodeId& id, const char* op) const {
        if (!entities_.count(id) && !images_.count(id))
            throw IntegrityError(std::string(op) + ": unknown entity/image id: " + id);
    }
    void require_entity_or_image_found(const NodeId& id, const char* op) const {
        if (!entities_.count(id) && !images_.count(id))
            throw NotFoundError(std::string(op) + ": unknown entity/image id: " + id);
    }

    void load_record(const nlohmann::json& j) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "chunk") {
            ChunkNode c;
            c.id = j.at("id").get<std::string>();
            c.text = j.at("text").get<std::string>();
            c.doc_id = j.at("doc_id").get<std::string>();
            c.token_begin = j.at("token_begin").get<std::uint64_t>();
            c.token_end = j.at("token_end").get<std::uint64_t>();
            add_chunk(std::move(c));
        } else if (kind == "entity") {
            EntityNode e;
            e.id = j.at("id").get<std::string>();
            e.name = j.at("name").get<std::string>();
            e.entity_type = j.at("entity_type").get<std::string>();
            e.description = j.at("description").get<std::string>();
            e.source_chunks = j.at("source_chunks").get<std::vector<NodeId>>();
            entities_[e.id] = std::move(e);
        } else if (kind == "image") {
            ImageNode im;
            im.id = j.at("id").get<std::string>();
            im.uri = j.at("uri").get<std::string>();
            im.caption = j.at("caption").get<std::string>();
            im.placeholder_chunk = j.at("placeholder_chunk").get<std::string>();
            images_[im.id] = std::move(im);
        } else if (kind == "ee_edge") {
            EntityEntityEdge e;
            e.source = j.at("source").get<std::string>();
            e.target = j.at("target").get<std::string>();
            e.relation = j.at("relation").get<std::string>();
            e.weight = j.at("weight").get<double>();
            auto key = std::make_pair(e.source, e.target);
            ee_edges_[key] = e;
            insert_sorted(adjacency_[e.source], e.target);
            insert_sorted(adjacency_[e.target], e.source);
        } else if (kind == "ec_edge") {
            EntityChunkEdge e{j.at("entity").get<std::string>(),
                              j.at("chunk").get<std::string>()};
            if (ec_edges_.insert(e).second) {
                insert_sorted(entity_chunks_[e.entity], e.chunk);
                insert_sorted(chunk_entities_[e.chunk], e.entity);
            }
        } else if (kind == "meta") {
            meta_.config_hash = j.at("config_hash").get<std::string>();
            meta_.tokenizer_id = j.at("tokenizer_id").get<std::string>();
            meta_.created_unix = j.at("created_unix").get<std::int64_t>();
        } else {
            throw Error("unknown record kind: " + kind);
        }
    }

    void write_manifest(const std::string& dir) const {
        nlohmann::json m{{"format_version", kManifestVersion},
                         {"config_hash", meta_.config_hash},
                         {"tokenizer_id", meta_.tokenizer_id}};
        std::ofstream out(dir + "/manifest.json", std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + dir + "/manifest.json");
        out << m.dump(2) << '\n';
    }

    static void check_manifest(const std::string& dir) {
        const std::string path = dir + "/manifest.json";
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open " + path);
        nlohmann::json m;
        try {
            in >> m;
            int version = m.at("format_version").get<int>();
            if (version != kManifestVersion)
                throw Error("unsupported format_version " + std::to_string(version));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path, e.what());
        }
    }

    std::map<NodeId, EntityNode> entities_;
    std::map<NodeId, ImageNode> images_;
    std::map<NodeId, ChunkNode> chunks_;
    std::map<std::pair<NodeId, NodeId>, EntityEntityEdge> ee_edges_;
    std::set<EntityChunkEdge> ec_edges_;
    GraphMeta meta_;

    // Derived lookup structures, rebuilt on load.
    std::map<NodeId, std::vector<NodeId>> adjacency_;
    std::map<NodeId, std::vector<NodeId>> entity_chunks_;
    std::map<NodeId, std::vector<NodeId>> chunk_entities_;
};

} // namespace kgrag
