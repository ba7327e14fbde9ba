// Builds a tiny in-memory store, runs one retrieval and prints the
// assembled prompt plus the offline provider's answer.

#include "kgrag/kgrag.hpp"

#include <iostream>

int main() {
    using namespace kgrag;

    std::vector<Document> corpus;
    corpus.push_back({"signs.md",
                      "A stop sign requires a complete stop at the marked line. "
                      "Drivers approaching a stop sign must yield to traffic "
                      "already inside the intersection.\n"
                      "<image src=\"assets/stop-sign.png\" caption=\"octagonal stop sign\">\n",
                      ""});
    corpus.push_back({"weather.md",
                      "On wet road surfaces the braking distance grows sharply. "
                      "Reduce speed and increase the safe distance to the vehicle "
                      "ahead when rain starts.\n",
                      ""});

    ChunkingConfig chunking;
    RulesExtractor extractor;
    HashEmbedder embedder(256);

    Store store;
    store.graph = build_graph(corpus, chunking, extractor);
    store.indexes = build_indexes(store.graph, embedder);
    store.embedding_provider = embedder.id();
    store.embedding_dim = embedder.dim();

    SimpleKeywordProvider keywords;
    RetrievalParams params;
    const std::string question = "How does a wet road change braking distance?";
    SubgraphResult context = retrieve(store, question, params, keywords, embedder);

    GenerationRequest req;
    req.question = question;
    req.context = context;
    EchoProvider echo;
    echo.add_scripted_reply("wet road", "Slow down; stopping takes much longer on wet surfaces.");

    std::cout << "--- prompt ---\n"
              << assemble_prompt(req, echo.max_context_tokens()).text
              << "--- answer ---\n"
              << echo.generate(req) << "\n";
    return 0;
}
