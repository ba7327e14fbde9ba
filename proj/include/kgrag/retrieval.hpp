#pragma once
// Multi-scale subgraph retrieval over the heterogeneous graph:
//
//   1. keyword extraction from the question (providers in keywords.hpp)
//   2. anchor initialization: entities/images whose similarity to any
//      keyword clears delta1, capped per keyword at the highest scores
//   3. h-hop breadth-first expansion over entity-entity edges; each node
//      keeps its minimum hop distance from the anchor set
//   4. top-k entity selection by query similarity
//   5. chunk scoring over the candidates' grounded chunks:
//        S(c) = alpha * sum_v s(q,v) * lambda^hop(v)  +  (1-alpha) * s(q,c)
//      where v ranges over candidates edge-linked to c. The sum runs in
//      candidate (hop, id) order so scores are bit-reproducible.
//
// Ties everywhere break by ascending id. An empty candidate pool degrades
// to plain vector ranking over all chunks (flagged in the trace) instead
// of returning nothing.

#include "kgrag/embedding.hpp"
#include "kgrag/error.hpp"
#include "kgrag/graph.hpp"
#include "kgrag/keywords.hpp"
#include "kgrag/store.hpp"
#include "kgrag/vector_index.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace kgrag {

struct RetrievalParams {
    double delta1 = 0.5;  // anchor similarity threshold, (0,1]
    int hops = 2;         // expansion depth h, >= 0
    double lambda = 0.7;  // path decay factor, (0,1]
    double alpha = 0.5;   // graph-term weight, [0,1]
    int top_k_entities = 5;
    int top_k_chunks = 3;
    int max_anchors_per_keyword = 10;

    void validate() const {
        if (!(delta1 > 0.0 && delta1 <= 1.0))
            throw ArgumentError("delta1 must be in (0,1]");
        if (hops < 0) throw ArgumentError("hops must be >= 0");
        if (!(lambda > 0.0 && lambda <= 1.0))
            throw ArgumentError("lambda must be in (0,1]");
        if (!(alpha >= 0.0 && alpha <= 1.0))
            throw ArgumentError("alpha must be in [0,1]");
        if (top_k_entities < 1) throw ArgumentError("top_k_entities must be >= 1");
        if (top_k_chunks < 1) throw ArgumentError("top_k_chunks must be >= 1");
        if (max_anchors_per_keyword < 1)
            throw ArgumentError("max_anchors_per_keyword must be >= 1");
    }
};

struct QueryContext {
    std::string question;
    std::vector<std::string> keywords;
    Embedding query_embedding;
    std::vector<Embedding> keyword_embeddings;
};

struct CandidateEntity {
    NodeId id;
    int hop = 0;          // minimum hops from any anchor
    double query_sim = 0.0; // s(q, v)
};

struct RetrievalTrace {
    std::vector<std::string> keywords;
    std::vector<NodeId> anchors;
    std::vector<std::size_t> frontier_sizes; // nodes first reached per hop
    std::size_t candidate_count = 0;
    std::size_t pool_size = 0;
    bool degraded_to_vector = false;
    double ms_keywords = 0.0;
    double ms_embed = 0.0;
    double ms_anchors = 0.0;
    double ms_expand = 0.0;
    double ms_select = 0.0;
    double ms_score = 0.0;

    nlohmann::json to_json() const {
        return {{"keywords", keywords},
                {"anchors", anchors},
                {"frontier_sizes", frontier_sizes},
                {"candidate_count", candidate_count},
                {"pool_size", pool_size},
                {"degraded_to_vector", degraded_to_vector},
                {"ms", {{"keywords", ms_keywords},
                        {"embed", ms_embed},
                        {"anchors", ms_anchors},
                        {"expand", ms_expand},
                        {"select", ms_select},
                        {"score", ms_score}}}};
    }
};

struct RankedEntity {
    EntityNode node;
    int hop = 0;
    double query_sim = 0.0;
};

struct ScoredChunkNode {
    ChunkNode chunk;
    double score = 0.0;
};

struct SubgraphResult {
    std::vector<RankedEntity> entities;   // ranked, <= top_k_entities
    std::vector<ImageNode> images;        // sorted by id
    std::vector<ScoredChunkNode> chunks;  // ranked, <= top_k_chunks
    RetrievalTrace trace;

    bool empty() const { return entities.empty() && images.empty() && chunks.empty(); }
};

// lambda^hop with an exact 1.0 at hop 0.
inline double decay_pow(double lambda, int hop) {
    double r = 1.0;
    for (int i = 0; i < hop; ++i) r *= lambda;
    return r;
}

// Anchor initialization: per keyword, every entity/image whose similarity
// clears delta1, keeping at most max_anchors_per_keyword highest-scoring
// hits; the result is the union over keywords. May be empty.
inline std::set<NodeId> init_anchors(const QueryContext& ctx,
                                     const StoreIndexes& indexes,
                                     const RetrievalParams& params) {
    std::set<NodeId> anchors;
    for (const auto& kw : ctx.keyword_embeddings) {
        std::vector<Scored> hits;
        for (const VectorIndex* index : {&indexes.entities, &indexes.images}) {
            for (const auto& [id, vec] : index->records()) {
                double s = similarity(kw, vec);
                if (s >= params.delta1) hits.push_back({id, s});
            }
        }
        std::sort(hits.begin(), hits.end(), scored_less);
        if (hits.size() > static_cast<std::size_t>(params.max_anchors_per_keyword))
            hits.resize(static_cast<std::size_t>(params.max_anchors_per_keyword));
        for (const auto& h : hits) anchors.insert(h.id);
    }
    return anchors;
}

// Breadth-first expansion over entity-entity edges up to h hops. Every
// reached node is recorded once at its minimum distance; output is sorted
// by (hop, id). Anchors come back at hop 0.
inline std::vector<CandidateEntity> expand(const KnowledgeGraph& graph,
                                           const std::set<NodeId>& anchors, int hops,
                                           std::vector<std::size_t>* frontier_sizes = nullptr) {
    std::vector<CandidateEntity> cands;
    std::set<NodeId> seen(anchors.begin(), anchors.end());
    std::vector<NodeId> frontier(anchors.begin(), anchors.end());
    for (const auto& id : frontier) cands.push_back({id, 0, 0.0});
    if (frontier_sizes) frontier_sizes->push_back(frontier.size());

    for (int hop = 1; hop <= hops && !frontier.empty(); ++hop) {
        std::set<NodeId> next;
        for (const auto& id : frontier)
            for (const auto& nb : graph.neighbors(id))
                if (!seen.count(nb)) next.insert(nb);
        frontier.assign(next.begin(), next.end());
        seen.insert(next.begin(), next.end());
        for (const auto& id : frontier) cands.push_back({id, hop, 0.0});
        if (frontier_sizes) frontier_sizes->push_back(frontier.size());
    }
    return cands;
}

// Top-k candidates by query similarity, ascending-id ties.
inline std::vector<CandidateEntity> select_entities(std::vector<CandidateEntity> cands,
                                                    const RetrievalParams& params) {
    std::sort(cands.begin(), cands.end(),
              [](const CandidateEntity& a, const CandidateEntity& b) {
                  if (a.query_sim != b.query_sim) return a.query_sim > b.query_sim;
                  return a.id < b.id;
              });
    if (cands.size() > static_cast<std::size_t>(params.top_k_entities))
        cands.resize(static_cast<std::size_t>(params.top_k_entities));
    return cands;
}

// Scores the candidates' grounded chunks and returns the top
// top_k_chunks. Candidates must arrive in (hop, id) order with query_sim
// populated; the per-chunk graph term accumulates in that order.
inline std::vector<Scored> score_chunks(const KnowledgeGraph& graph,
                                        const std::vector<CandidateEntity>& cands,
                                        const QueryContext& ctx,
                                        const VectorIndex& chunk_index,
                                        const RetrievalParams& params,
                                        RetrievalTrace* trace = nullptr) {
    std::map<NodeId, double> graph_term;
    for (const auto& cand : cands) {
        const double contribution = cand.query_sim * decay_pow(params.lambda, cand.hop);
        for (const auto& chunk_id : graph.chunks_of(cand.id))
            graph_term[chunk_id] += contribution;
    }
    if (trace) trace->pool_size = graph_term.size();

    std::vector<Scored> scored;
    if (graph_term.empty()) {
        // No grounded candidates: fall back to vector ranking over all
        // chunks rather than returning nothing.
        if (trace) trace->degraded_to_vector = true;
        for (const auto& [id, vec] : chunk_index.records())
            scored.push_back({id, similarity(ctx.query_embedding, vec)});
    } else {
        for (const auto& [chunk_id, gterm] : graph_term) {
            const Embedding* vec = chunk_index.find(chunk_id);
            const double qc = vec ? similarity(ctx.query_embedding, *vec) : 0.0;
            scored.push_back({chunk_id, params.alpha * gterm + (1.0 - params.alpha) * qc});
        }
    }
    std::sort(scored.begin(), scored.end(), scored_less);
    if (scored.size() > static_cast<std::size_t>(params.top_k_chunks))
        scored.resize(static_cast<std::size_t>(params.top_k_chunks));
    return scored;
}

namespace detail {
inline double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}
} // namespace detail

// Runs anchor initialization through chunk scoring for a prepared query
// context. Provider work (keywording, embedding) happens in retrieve().
inline SubgraphResult retrieve_ctx(const Store& store, const QueryContext& ctx,
                                   const RetrievalParams& params) {
    params.validate();
    SubgraphResult result;
    result.trace.keywords = ctx.keywords;

    auto t0 = std::chrono::steady_clock::now();
    std::set<NodeId> anchors = init_anchors(ctx, store.indexes, params);
    result.trace.anchors.assign(anchors.begin(), anchors.end());
    result.trace.ms_anchors = detail::ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    std::vector<CandidateEntity> cands =
        expand(store.graph, anchors, params.hops, &result.trace.frontier_sizes);
    for (auto& cand : cands) {
        const Embedding* vec = store.indexes.entities.find(cand.id);
        if (!vec) vec = store.indexes.images.find(cand.id);
        cand.query_sim = vec ? similarity(ctx.query_embedding, *vec) : 0.0;
    }
    result.trace.candidate_count = cands.size();
    result.trace.ms_expand = detail::ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    std::vector<CandidateEntity> entity_cands;
    for (const auto& cand : cands)
        if (store.graph.has_entity(cand.id)) entity_cands.push_back(cand);
    std::vector<CandidateEntity> selected = select_entities(std::move(entity_cands), params);
    result.trace.ms_select = detail::ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    std::vector<Scored> scored =
        score_chunks(store.graph, cands, ctx, store.indexes.chunks, params, &result.trace);
    result.trace.ms_score = detail::ms_since(t0);

    for (const auto& sel : selected)
        result.entities.push_back({store.graph.entity(sel.id), sel.hop, sel.query_sim});
    for (const auto& sc : scored)
        result.chunks.push_back({store.graph.chunk(sc.id), sc.score});

    // Images: candidates of image kind plus images grounded in a selected
    // chunk, deduplicated, ascending id.
    std::set<NodeId> image_ids;
    for (const auto& cand : cands)
        if (store.graph.has_image(cand.id)) image_ids.insert(cand.id);
    for (const auto& sc : scored)
        if (store.graph.has_chunk(sc.id))
            for (const auto& ent : store.graph.entities_of(sc.id))
                if (store.graph.has_image(ent)) image_ids.insert(ent);
    for (const auto& id : image_ids) result.images.push_back(store.graph.image(id));

    return result;
}

// Full pipeline: keyword extraction, embedding, then the staged retrieval.
inline SubgraphResult retrieve(const Store& store, const std::string& question,
                               const RetrievalParams& params,
                               KeywordProvider& keyword_provider,
                               EmbeddingProvider& embedder) {
    params.validate();
    if (trim(question).empty()) throw ArgumentError("question must be non-empty");

    QueryContext ctx;
    ctx.question = question;

    auto t0 = std::chrono::steady_clock::now();
    ctx.keywords = keyword_provider.extract(question);
    const double ms_keywords = detail::ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    ctx.query_embedding = embedder.embed(question);
    for (const auto& kw : ctx.keywords)
        ctx.keyword_embeddings.push_back(embedder.embed(kw));
    const double ms_embed = detail::ms_since(t0);

    SubgraphResult result = retrieve_ctx(store, ctx, params);
    result.trace.ms_keywords = ms_keywords;
    result.trace.ms_embed = ms_embed;
    return result;
}

} // namespace kgrag
