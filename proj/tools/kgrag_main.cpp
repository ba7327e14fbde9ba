// kgrag command line: build stores, run queries, evaluate QA sets and
// inspect stores.
//
// Exit codes: 0 success, 1 usage/config/store errors, 2 provider errors.

#include "kgrag/kgrag.hpp"
#include "kgrag/transport_httplib.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using namespace kgrag;

Config load_config(const std::string& config_path) {
    Config cfg = config_path.empty() ? Config{} : Config::load(config_path);
    cfg.validate();
    return cfg;
}

nlohmann::json config_json(const Config& cfg) {
    return {{"chunking",
             {{"max_chunk_tokens", cfg.chunking.max_chunk_tokens},
              {"overlap_tokens", cfg.chunking.overlap_tokens},
              {"tokenizer", cfg.chunking.tokenizer_id}}},
            {"retrieval",
             {{"delta1", cfg.retrieval.delta1},
              {"hops", cfg.retrieval.hops},
              {"lambda", cfg.retrieval.lambda},
              {"alpha", cfg.retrieval.alpha},
              {"top_k_entities", cfg.retrieval.top_k_entities},
              {"top_k_chunks", cfg.retrieval.top_k_chunks},
              {"max_anchors_per_keyword", cfg.retrieval.max_anchors_per_keyword}}},
            {"providers",
             {{"embedding", cfg.providers.embedding},
              {"embedding_dim", cfg.providers.embedding_dim},
              {"generation", cfg.providers.generation},
              {"extractor", cfg.providers.extractor},
              {"keywords", cfg.providers.keywords}}},
            {"rag_enabled", cfg.rag_enabled},
            {"config_hash", cfg.hash()},
            {"prompt_template", kPromptTemplateVersion}};
}

int cmd_index(const std::string& corpus_path, const std::string& store_path,
              const std::string& config_path) {
    Config cfg = load_config(config_path);
    std::vector<Document> corpus = load_corpus(corpus_path);

    auto generation = make_generation_provider(cfg, default_http_post);
    auto extractor = make_extractor_provider(cfg, *generation);
    auto embedder = make_embedding_provider(cfg, default_http_post);

    Store store;
    store.graph = build_graph(std::move(corpus), cfg.chunking, *extractor, cfg.hash());
    store.indexes = build_indexes(store.graph, *embedder);
    store.embedding_provider = embedder->id();
    store.embedding_dim = embedder->dim();
    save_store(store, store_path);

    std::cout << "entities: " << store.graph.entities().size() << "\n"
              << "images: " << store.graph.images().size() << "\n"
              << "chunks: " << store.graph.chunks().size() << "\n"
              << "ee_edges: " << store.graph.ee_edges().size() << "\n"
              << "ec_edges: " << store.graph.ec_edges().size() << "\n"
              << "vectors: entity=" << store.indexes.entities.size()
              << " image=" << store.indexes.images.size()
              << " chunk=" << store.indexes.chunks.size() << "\n"
              << "store: " << store_path << "\n";
    return 0;
}

int cmd_query(const std::string& store_path, const std::string& question,
              const std::string& config_path, const std::vector<std::string>& media,
              int top_k_entities, int top_k_chunks, bool no_rag, bool trace,
              bool as_json) {
    Config cfg = load_config(config_path);
    RetrievalParams params = cfg.retrieval;
    if (top_k_entities != -1) params.top_k_entities = top_k_entities;
    if (top_k_chunks != -1) params.top_k_chunks = top_k_chunks;
    params.validate();

    Store store = load_store(store_path);
    auto embedder = make_embedding_provider(cfg, default_http_post);
    auto generation = make_generation_provider(cfg, default_http_post);
    auto keywords = make_keyword_provider(cfg, *generation);

    GenerationRequest req;
    req.question = question;
    req.media = media;
    req.mode = AnswerMode::open;
    std::vector<std::string> trim_log;
    req.trim_log = &trim_log;

    const bool rag = cfg.rag_enabled && !no_rag;
    if (rag) req.context = retrieve(store, question, params, *keywords, *embedder);

    const std::string answer = generation->generate(req);

    nlohmann::json trace_json = req.context.trace.to_json();
    trace_json["trimmed"] = trim_log;
    trace_json["rag_enabled"] = rag;
    if (trace) trace_json["config"] = config_json(cfg);

    if (as_json) {
        nlohmann::json out{{"answer", answer},
                           {"entities", nlohmann::json::array()},
                           {"images", nlohmann::json::array()},
                           {"chunks", nlohmann::json::array()},
                           {"trace", trace_json}};
        for (const auto& e : req.context.entities)
            out["entities"].push_back({{"id", e.node.id},
                                       {"name", e.node.name},
                                       {"hop", e.hop},
                                       {"score", e.query_sim}});
        for (const auto& im : req.context.images)
            out["images"].push_back(
                {{"id", im.id}, {"uri", im.uri}, {"caption", im.caption}});
        for (const auto& c : req.context.chunks)
            out["chunks"].push_back(
                {{"id", c.chunk.id}, {"score", c.score}, {"text", c.chunk.text}});
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << answer << "\n";
        if (trace) std::cout << "TRACE: " << trace_json.dump() << "\n";
    }
    return 0;
}

int cmd_eval(const std::string& store_path, const std::string& qa_path,
             const std::string& config_path, const std::string& out_dir) {
    Config cfg = load_config(config_path);
    std::vector<QAItem> items = parse_qa_file(qa_path);

    Store store = load_store(store_path);
    auto embedder = make_embedding_provider(cfg, default_http_post);
    auto generation = make_generation_provider(cfg, default_http_post);
    auto keywords = make_keyword_provider(cfg, *generation);

    EvalPipeline pipeline;
    pipeline.store = &store;
    pipeline.params = cfg.retrieval;
    pipeline.rag_enabled = cfg.rag_enabled;
    pipeline.keywords = keywords.get();
    pipeline.embedder = embedder.get();
    pipeline.generator = generation.get();

    std::vector<GradedItem> graded;
    ReportCard card = run_eval(items, pipeline, &graded);

    std::filesystem::create_directories(out_dir);
    {
        std::ofstream report(out_dir + "/report.json", std::ios::binary | std::ios::trunc);
        report << card.to_json().dump(2) << "\n";
    }
    {
        std::sort(graded.begin(), graded.end(),
                  [](const GradedItem& a, const GradedItem& b) { return a.id < b.id; });
        std::ofstream log(out_dir + "/items.jsonl", std::ios::binary | std::ios::trunc);
        for (const auto& g : graded) log << g.to_json().dump() << "\n";
    }

    std::printf("            MCQ                         Open QA\n");
    std::printf("  Single  Multiple   Overall     R-1     R-L     Sem  Overall  SafeDrive\n");
    std::printf("  %6.2f    %6.2f    %6.2f  %6.2f  %6.2f  %6.2f   %6.2f     %6.2f\n",
                card.mcq_single_acc, card.mcq_multiple_acc, card.mcq_overall,
                card.qa_r1, card.qa_rl, card.qa_sem, card.qa_overall,
                card.safedrive_score);
    std::printf("counts: mcq_single=%zu mcq_multiple=%zu open=%zu failed=%zu\n",
                card.n_mcq_single, card.n_mcq_multiple, card.n_open, card.n_failed);
    std::printf("report: %s/report.json\n", out_dir.c_str());
    return 0;
}

int cmd_stats(const std::string& store_path) {
    Store store = load_store(store_path);
    std::cout << "entities: " << store.graph.entities().size() << "\n"
              << "images: " << store.graph.images().size() << "\n"
              << "chunks: " << store.graph.chunks().size() << "\n"
              << "ee_edges: " << store.graph.ee_edges().size() << "\n"
              << "ec_edges: " << store.graph.ec_edges().size() << "\n"
              << "vectors: entity=" << store.indexes.entities.size()
              << " image=" << store.indexes.images.size()
              << " chunk=" << store.indexes.chunks.size() << "\n"
              << "embedding_dim: " << store.embedding_dim << "\n"
              << "embedding_provider: " << store.embedding_provider << "\n"
              << "tokenizer: " << store.graph.meta().tokenizer_id << "\n"
              << "config_hash: " << store.graph.meta().config_hash << "\n"
              << "created_unix: " << store.graph.meta().created_unix << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"knowledge-graph retrieval-augmented generation engine"};
    app.require_subcommand(1);

    std::string corpus_path, store_path, config_path, question, qa_path;
    std::string out_dir = "eval-out";
    std::vector<std::string> media;
    int top_k_entities = -1;
    int top_k_chunks = -1;
    bool no_rag = false, trace = false, as_json = false;

    auto* index = app.add_subcommand("index", "build a store from a corpus");
    index->add_option("corpus", corpus_path, "corpus directory or .jsonl file")->required();
    index->add_option("store", store_path, "output store directory")->required();
    index->add_option("--config", config_path, "config file");

    auto* query = app.add_subcommand("query", "answer a question against a store");
    query->add_option("store", store_path, "store directory")->required();
    query->add_option("question", question, "question text")->required();
    query->add_option("--config", config_path, "config file");
    query->add_option("--image", media, "image/video URI attached to the request");
    query->add_option("--top-k-entities", top_k_entities, "override entity top-k");
    query->add_option("--top-k-chunks", top_k_chunks, "override chunk top-k");
    query->add_flag("--no-rag", no_rag, "skip retrieval");
    query->add_flag("--trace", trace, "emit retrieval trace and effective config");
    query->add_flag("--json", as_json, "JSON output");

    auto* eval = app.add_subcommand("eval", "run a QA evaluation");
    eval->add_option("store", store_path, "store directory")->required();
    eval->add_option("qa", qa_path, "QA items (.jsonl)")->required();
    eval->add_option("--config", config_path, "config file");
    eval->add_option("--out", out_dir, "output directory for report.json/items.jsonl");

    auto* stats = app.add_subcommand("stats", "print store statistics");
    stats->add_option("store", store_path, "store directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(index)) return cmd_index(corpus_path, store_path, config_path);
        if (app.got_subcommand(query))
            return cmd_query(store_path, question, config_path, media, top_k_entities,
                             top_k_chunks, no_rag, trace, as_json);
        if (app.got_subcommand(eval)) return cmd_eval(store_path, qa_path, config_path, out_dir);
        if (app.got_subcommand(stats)) return cmd_stats(store_path);
    } catch (const kgrag::ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
