#pragma once
// Embedding provider contract plus the two built-in providers:
//   hash-v1  deterministic feature hashing of lowercased tokens into dim
//            buckets, L2-normalized. Hermetic; equal text gives equal
//            vectors across sessions.
//   remote   POST {"texts":[...]} -> {"vectors":[[...],...]} against an
//            embedding endpoint.
// similarity() is cosine and is the s(.,.) used throughout retrieval.

#include "kgrag/error.hpp"
#include "kgrag/text.hpp"
#include "kgrag/transport.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace kgrag {

struct Embedding {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    bool operator==(const Embedding&) const = default;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::string id() const = 0;
    virtual std::size_t dim() const = 0;
    virtual Embedding embed(const std::string& text) = 0;

    virtual std::vector<Embedding> embed_many(const std::vector<std::string>& texts) {
        std::vector<Embedding> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(embed(t));
        return out;
    }
};

inline constexpr uint64_t kHashEmbedderSeed = 0x6b95a7f31e2c4d08ULL;

class HashEmbedder final : public EmbeddingProvider {
public:
    explicit HashEmbedder(std::size_t dim = 256, uint64_t seed = kHashEmbedderSeed)
        : dim_(dim), seed_(seed) {
        if (dim_ == 0) throw ArgumentError("embedding dim must be positive");
    }

    std::string id() const override { return "hash-v1"; }
    std::size_t dim() const override { return dim_; }

    Embedding embed(const std::string& text) override {
        const std::vector<std::string> tokens = tokenize(lowercase_ascii(text));
        if (tokens.empty())
            throw ArgumentError("embed: text is empty after trimming");
        Embedding e;
        e.values.assign(dim_, 0.0);
        for (const auto& tok : tokens)
            e.values[fnv1a64(tok, seed_) % dim_] += 1.0;
        double norm = 0.0;
        for (double v : e.values) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : e.values) v /= norm;
        return e;
    }

private:
    std::size_t dim_;
    uint64_t seed_;
};

// Cosine similarity; requires equal dims and non-zero vectors.
inline double similarity(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim())
        throw ArgumentError("similarity: dimension mismatch (" +
                            std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()) + ")");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw ArgumentError("similarity: zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

class RemoteEmbedder final : public EmbeddingProvider {
public:
    RemoteEmbedder(std::string endpoint, std::string api_key, std::size_t dim,
                   HttpTransport transport, RetryPolicy retry = {})
        : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), dim_(dim),
          transport_(std::move(transport)), retry_(retry) {
        if (dim_ == 0) throw ArgumentError("embedding dim must be positive");
        if (endpoint_.empty())
            throw ArgumentError("remote embedder: endpoint not configured "
                                "(set EMBED_API_URL)");
    }

    std::string id() const override { return "remote"; }
    std::size_t dim() const override { return dim_; }

    Embedding embed(const std::string& text) override {
        return embed_many({text}).front();
    }

    std::vector<Embedding> embed_many(const std::vector<std::string>& texts) override {
        for (const auto& t : texts)
            if (trim(t).empty())
                throw ArgumentError("embed: text is empty after trimming");
        nlohmann::json payload{{"texts", texts}};
        std::vector<Header> headers;
        if (!api_key_.empty())
            headers.emplace_back("Authorization", "Bearer " + api_key_);
        auto [res, attempts] = post_with_retry(transport_, retry_, endpoint_,
                                               payload.dump(), headers, "embed");
        (void)attempts;
        try {
            nlohmann::json j = nlohmann::json::parse(res.body);
            std::vector<Embedding> out;
            for (const auto& vec : j.at("vectors")) {
                Embedding e;
                e.values = vec.get<std::vector<double>>();
                if (e.dim() != dim_)
                    throw ProviderError("embed: endpoint returned dim " +
                                            std::to_string(e.dim()) + ", expected " +
                                            std::to_string(dim_),
                                        false, 1, res.body);
                out.push_back(std::move(e));
            }
            if (out.size() != texts.size())
                throw ProviderError("embed: vector count mismatch", false, 1, res.body);
            return out;
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError("embedding response", std::string(ex.what()) +
                                                       "; body: " + res.body);
        }
    }

private:
    std::string endpoint_;
    std::string api_key_;
    std::size_t dim_;
    HttpTransport transport_;
    RetryPolicy retry_;
};

} // namespace kgrag
