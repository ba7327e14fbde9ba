#include "kgrag/ingest.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

using namespace kgrag;
namespace fs = std::filesystem;

namespace {

struct EpochGuard {
    EpochGuard() { setenv("SOURCE_DATE_EPOCH", "1700000000", 1); }
    ~EpochGuard() { unsetenv("SOURCE_DATE_EPOCH"); }
};

class ThrowingExtractor : public ExtractorProvider {
public:
    std::string id() const override { return "throwing"; }
    std::vector<ExtractedEntity> extract(const ChunkNode&) override {
        throw ProviderError("backend down", true, 3);
    }
};

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("kgrag-ingest-" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("empty corpus builds an empty graph") {
    EpochGuard epoch;
    ChunkingConfig cfg;
    RulesExtractor ex({"stop sign"});
    KnowledgeGraph g = build_graph({}, cfg, ex);
    CHECK(g.empty());
    CHECK(g.meta().created_unix == 1700000000);
    CHECK(!g.meta().config_hash.empty());
}

TEST_CASE("co-occurring entities share an edge and their chunk") {
    EpochGuard epoch;
    ChunkingConfig cfg;
    RulesExtractor ex({"stop sign", "crosswalk"});
    std::vector<Document> corpus{
        {"doc1", "A stop sign stands beside the crosswalk.", ""}};
    KnowledgeGraph g = build_graph(corpus, cfg, ex);

    CHECK(g.entities().size() == 2);
    CHECK(g.ee_edges().size() == 1);
    CHECK(g.ec_edges().size() == 2);
    CHECK(g.images().empty());
    CHECK(g.ee_edges().begin()->second.relation == KnowledgeGraph::kCooccurrenceRelation);
    g.check_integrity();
}

TEST_CASE("extracted relations become labeled edges and ground new names") {
    EpochGuard epoch;

    class RelExtractor : public ExtractorProvider {
    public:
        std::string id() const override { return "rel-test"; }
        std::vector<ExtractedEntity> extract(const ChunkNode&) override {
            ExtractedEntity a;
            a.name = "stop sign";
            a.entity_type = "sign";
            a.relations = {{"intersection", "placed at"}};
            return {a};
        }
    };

    RelExtractor ex;
    ChunkingConfig cfg;
    KnowledgeGraph g = build_graph({{"d", "some text", ""}}, cfg, ex);
    CHECK(g.entities().size() == 2);
    REQUIRE(g.ee_edges().size() == 1);
    CHECK(g.ee_edges().begin()->second.relation == "placed at");
    // the relation target was grounded in the same chunk
    CHECK(g.chunks_of(entity_id_for("intersection")).size() == 1);
    g.check_integrity();
}

TEST_CASE("image markers become image nodes wired to chunk and co-entities") {
    EpochGuard epoch;
    ChunkingConfig cfg;
    RulesExtractor ex({"stop sign"});
    std::vector<Document> corpus{
        {"doc1",
         "A stop sign by the road. <image src=\"s.png\" caption=\"the sign\"> More text.",
         ""}};
    KnowledgeGraph g = build_graph(corpus, cfg, ex);

    REQUIRE(g.images().size() == 1);
    const ImageNode& im = g.images().begin()->second;
    CHECK(im.uri == "s.png");
    CHECK(im.caption == "the sign");
    CHECK(g.chunk(im.placeholder_chunk).text.find("<image>") != std::string::npos);
    // edge to host chunk plus edge to the co-extracted entity
    CHECK(g.chunks_of(im.id) == std::vector<NodeId>{im.placeholder_chunk});
    CHECK(g.neighbors(im.id) == std::vector<NodeId>{entity_id_for("stop sign")});
    g.check_integrity();
}

TEST_CASE("synthetic corpus counts match an independent scan") {
    EpochGuard epoch;
    ChunkingConfig cfg;
    cfg.max_chunk_tokens = 12;
    cfg.overlap_tokens = 3;
    const std::vector<std::string> dict{"stop sign", "speed limit", "black ice"};
    RulesExtractor ex(dict);

    std::vector<Document> corpus;
    for (int d = 0; d < 10; ++d) {
        std::string body;
        for (int s = 0; s < 6; ++s) {
            switch ((d + s) % 5) {
                case 0: body += "A stop sign guards the corner. "; break;
                case 1: body += "Mind the speed limit near the School Zone. "; break;
                case 2: body += "Black ice hides on the North Bridge after rain. "; break;
                case 3: body += "Plain filler text with nothing to find here. "; break;
                case 4: body += "<image src=\"img" + std::to_string(d) +
                                ".png\" caption=\"scene\"> A stop sign appears. ";
                        break;
            }
        }
        corpus.push_back({"doc" + std::to_string(d), body, ""});
    }

    KnowledgeGraph g = build_graph(corpus, cfg, ex);
    g.check_integrity();

    // oracle: chunk + extract without the graph layer, tallying names,
    // grounding pairs and co-occurrence pairs directly
    std::set<std::string> entity_names;
    std::set<std::pair<std::string, std::string>> ec_pairs; // (node, chunk)
    std::set<std::pair<std::string, std::string>> ee_pairs; // canonical
    std::size_t n_chunks = 0, n_images = 0;
    RulesExtractor oracle_ex(dict);
    for (const auto& doc : corpus) {
        auto chunked = chunk_document(doc, cfg);
        n_chunks += chunked.chunks.size();
        std::map<NodeId, std::vector<std::string>> members;
        for (const auto& chunk : chunked.chunks) {
            for (const auto& e : oracle_ex.extract(chunk)) {
                std::string id = "ent:" + e.name;
                entity_names.insert(e.name);
                ec_pairs.insert({id, chunk.id});
                for (const auto& m : members[chunk.id])
                    if (m != id)
                        ee_pairs.insert(m < id ? std::make_pair(m, id)
                                               : std::make_pair(id, m));
                auto& v = members[chunk.id];
                if (std::find(v.begin(), v.end(), id) == v.end()) v.push_back(id);
            }
        }
        std::size_t img_idx = 0;
        for (const auto& ref : chunked.images) {
            std::string img_id = image_id_for(doc.doc_id, img_idx++);
            ++n_images;
            ec_pairs.insert({img_id, ref.host_chunk});
            for (const auto& m : members[ref.host_chunk])
                ee_pairs.insert(img_id < m ? std::make_pair(img_id, m)
                                           : std::make_pair(m, img_id));
        }
    }

    CHECK(g.chunks().size() == n_chunks);
    CHECK(g.entities().size() == entity_names.size());
    CHECK(g.images().size() == n_images);
    CHECK(g.ec_edges().size() == ec_pairs.size());
    CHECK(g.ee_edges().size() == ee_pairs.size());
}

TEST_CASE("rebuilding from the same inputs is deterministic") {
    EpochGuard epoch;
    ChunkingConfig cfg;
    cfg.max_chunk_tokens = 10;
    cfg.overlap_tokens = 2;
    RulesExtractor ex;
    std::vector<Document> corpus{
        {"b-doc", "A stop sign near the School Zone. Watch for black ice today.", ""},
        {"a-doc", "The speed limit drops at the Harbor Tunnel entrance quickly.", ""}};
    KnowledgeGraph g1 = build_graph(corpus, cfg, ex);
    std::reverse(corpus.begin(), corpus.end()); // input order must not matter
    KnowledgeGraph g2 = build_graph(corpus, cfg, ex);
    CHECK(g1 == g2);
}

TEST_CASE("duplicate doc ids are rejected") {
    ChunkingConfig cfg;
    RulesExtractor ex;
    std::vector<Document> corpus{{"d", "one", ""}, {"d", "two", ""}};
    CHECK_THROWS_AS(build_graph(corpus, cfg, ex), IntegrityError);
}

TEST_CASE("extraction failures abort naming the doc and chunk") {
    ChunkingConfig cfg;
    ThrowingExtractor ex;
    try {
        build_graph({{"mydoc", "some text here", ""}}, cfg, ex);
        FAIL("expected Error");
    } catch (const Error& e) {
        std::string msg = e.what();
        CHECK(msg.find("mydoc") != std::string::npos);
        CHECK(msg.find("chunk:mydoc:000000") != std::string::npos);
        CHECK(msg.find("backend down") != std::string::npos);
    }
}

TEST_CASE("corpus loading from a directory") {
    auto dir = fresh_dir("corpus");
    fs::create_directories(dir / "sub");
    std::ofstream(dir / "b.txt") << "file b";
    std::ofstream(dir / "sub" / "a.md") << "file a";
    std::ofstream(dir / "ignored.json") << "{}";
    std::ofstream(dir / "empty.txt") << "";

    auto docs = load_corpus(dir.string());
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "b.txt");
    CHECK(docs[1].doc_id == "sub/a.md");
    CHECK(docs[0].body == "file b");
}

TEST_CASE("corpus loading from jsonl") {
    auto dir = fresh_dir("jsonl");
    auto path = dir / "corpus.jsonl";

    SECTION("well-formed") {
        std::ofstream(path) << R"({"doc_id":"x","body":"text one"})" << "\n"
                            << R"({"doc_id":"y","body":"text two"})" << "\n";
        auto docs = load_corpus(path.string());
        REQUIRE(docs.size() == 2);
        CHECK(docs[0].doc_id == "x");
    }

    SECTION("bad line is reported with its number") {
        std::ofstream(path) << R"({"doc_id":"x","body":"ok"})" << "\n"
                            << "garbage\n";
        try {
            load_corpus(path.string());
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }

    SECTION("duplicate doc_id is rejected") {
        std::ofstream(path) << R"({"doc_id":"x","body":"one"})" << "\n"
                            << R"({"doc_id":"x","body":"two"})" << "\n";
        CHECK_THROWS_AS(load_corpus(path.string()), ParseError);
    }
}
