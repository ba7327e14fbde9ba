#include "kgrag/vector_index.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace kgrag;
namespace fs = std::filesystem;

namespace {

Embedding vec(std::initializer_list<double> values) {
    Embedding e;
    e.values = values;
    return e;
}

Embedding random_vec(std::mt19937& rng, std::size_t dim) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Embedding e;
    e.values.resize(dim);
    for (auto& v : e.values) v = dist(rng);
    if (std::all_of(e.values.begin(), e.values.end(), [](double v) { return v == 0.0; }))
        e.values[0] = 1.0;
    return e;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("kgrag-index-" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("top_k on the empty index") {
    VectorIndex idx("entity");
    CHECK(idx.top_k(vec({1.0, 0.0}), 5).empty());
    CHECK_THROWS_AS(idx.top_k(vec({1.0}), 0), ArgumentError);
}

TEST_CASE("top_k returns everything when k exceeds the size") {
    VectorIndex idx("entity");
    idx.add("b", vec({1.0, 0.0}));
    idx.add("a", vec({0.0, 1.0}));
    auto hits = idx.top_k(vec({1.0, 0.0}), 10);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].id == "b");
    CHECK(hits[1].id == "a");
}

TEST_CASE("top_k breaks ties by ascending id") {
    VectorIndex idx("entity");
    idx.add("zeta", vec({1.0, 0.0}));
    idx.add("alpha", vec({1.0, 0.0}));
    idx.add("mid", vec({1.0, 0.0}));
    auto hits = idx.top_k(vec({2.0, 0.0}), 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].id == "alpha");
    CHECK(hits[1].id == "mid");
    CHECK(hits[2].id == "zeta");
}

TEST_CASE("top_k threshold excludes low scores") {
    VectorIndex idx("entity");
    idx.add("hit", vec({1.0, 0.0}));
    idx.add("miss", vec({0.0, 1.0}));
    auto hits = idx.top_k(vec({1.0, 0.0}), 5, 0.5);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].id == "hit");
}

TEST_CASE("index enforces a constant dimension") {
    VectorIndex idx("entity");
    idx.add("a", vec({1.0, 0.0}));
    CHECK_THROWS_AS(idx.add("b", vec({1.0, 0.0, 0.0})), ArgumentError);
    CHECK(idx.dim() == 2);
}

TEST_CASE("top_k equals a brute-force scan on random data") {
    std::mt19937 rng(59);
    VectorIndex idx("chunk");
    const std::size_t dim = 12;
    for (int i = 0; i < 500; ++i)
        idx.add("id" + std::to_string(1000 + i), random_vec(rng, dim));

    for (int trial = 0; trial < 20; ++trial) {
        Embedding q = random_vec(rng, dim);
        auto got = idx.top_k(q, 5);

        // oracle: full scan with its own cosine, full sort, prefix
        std::vector<Scored> all;
        for (const auto& [id, v] : idx.records()) {
            double dot = 0.0, nq = 0.0, nv = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                dot += q.values[i] * v.values[i];
                nq += q.values[i] * q.values[i];
                nv += v.values[i] * v.values[i];
            }
            all.push_back({id, dot / (std::sqrt(nq) * std::sqrt(nv))});
        }
        std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        });
        REQUIRE(got.size() == 5);
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].id == all[i].id);
            CHECK(got[i].score == all[i].score);
        }
        // prefix property against the total ordering
        auto more = idx.top_k(q, 25);
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(more[i].id == got[i].id);
    }
}

TEST_CASE("persist/restore round trip") {
    auto dir = fresh_dir("roundtrip");

    SECTION("empty index") {
        VectorIndex idx("entity");
        idx.persist(dir.string());
        CHECK(VectorIndex::restore(dir.string(), "entity") == idx);
    }

    SECTION("random records, exact values") {
        std::mt19937 rng(61);
        VectorIndex idx("chunk");
        for (int i = 0; i < 1000; ++i)
            idx.add("n" + std::to_string(i), random_vec(rng, 8));
        idx.persist(dir.string());
        VectorIndex back = VectorIndex::restore(dir.string(), "chunk");
        CHECK(back == idx);
    }

    SECTION("persist twice is byte-identical") {
        std::mt19937 rng(67);
        VectorIndex idx("image");
        for (int i = 0; i < 50; ++i)
            idx.add("i" + std::to_string(i), random_vec(rng, 6));
        auto dir2 = fresh_dir("roundtrip2");
        idx.persist(dir.string());
        idx.persist(dir2.string());
        CHECK(slurp(dir / "vectors-image.jsonl") == slurp(dir2 / "vectors-image.jsonl"));
    }
}

TEST_CASE("restore reports the offending line") {
    auto dir = fresh_dir("corrupt");
    VectorIndex idx("entity");
    idx.add("a", vec({1.0}));
    idx.persist(dir.string());
    {
        std::ofstream out(dir / "vectors-entity.jsonl", std::ios::app);
        out << "{\"id\":\"b\"}\n";
    }
    try {
        VectorIndex::restore(dir.string(), "entity");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("vectors-entity.jsonl") != std::string::npos);
    }
}
