#pragma once
// Engine configuration: a sectioned key=value file plus provider
// factories. CLI flags override file values, which override the defaults
// baked into the structs. Unknown sections or keys are errors so typos
// fail loudly.
//
// Sections and keys (all optional):
//   [chunking]  max_chunk_tokens, overlap_tokens, tokenizer
//   [retrieval] delta1, hops, lambda, alpha, top_k_entities, top_k_chunks,
//               max_anchors_per_keyword
//   [providers] embedding (hash-v1|remote), embedding_dim,
//               generation (echo|remote), generation_model,
//               max_context_tokens, max_attempts,
//               extractor (rules-v1|llm), keywords (simple-v1|llm),
//               dictionary (path, one phrase per line)
//   [rag]       enabled (true|false)
//   [echo]      reply = <prompt substring> => <canned reply>  (repeatable)
//
// Remote endpoints come from the environment: EMBED_API_URL/EMBED_API_KEY
// and LLM_API_URL/LLM_API_KEY.

#include "kgrag/chunker.hpp"
#include "kgrag/embedding.hpp"
#include "kgrag/error.hpp"
#include "kgrag/extract.hpp"
#include "kgrag/generation.hpp"
#include "kgrag/keywords.hpp"
#include "kgrag/retrieval.hpp"
#include "kgrag/text.hpp"
#include "kgrag/transport.hpp"

#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace kgrag {

struct ProviderConfig {
    std::string embedding = "hash-v1";
    std::size_t embedding_dim = 256;
    std::string generation = "echo";
    std::string generation_model = "default";
    std::size_t max_context_tokens = 8192;
    int max_attempts = 3;
    std::string extractor = "rules-v1";
    std::string keywords = "simple-v1";
    std::string dictionary_path;
    std::vector<std::pair<std::string, std::string>> echo_replies;
};

struct Config {
    ChunkingConfig chunking;
    RetrievalParams retrieval;
    ProviderConfig providers;
    bool rag_enabled = true;

    void validate() const {
        chunking.validate();
        retrieval.validate();
        auto one_of = [](const std::string& v, std::initializer_list<const char*> allowed,
                         const char* what) {
            for (const char* a : allowed)
                if (v == a) return;
            throw ArgumentError(std::string("unknown ") + what + ": " + v);
        };
        one_of(providers.embedding, {"hash-v1", "remote"}, "embedding provider");
        one_of(providers.generation, {"echo", "remote"}, "generation provider");
        one_of(providers.extractor, {"rules-v1", "llm"}, "extractor provider");
        one_of(providers.keywords, {"simple-v1", "llm"}, "keyword provider");
        if (providers.embedding_dim == 0)
            throw ArgumentError("embedding_dim must be positive");
        if (providers.max_attempts < 1)
            throw ArgumentError("max_attempts must be >= 1");
    }

    // Canonical fingerprint covering everything that shapes a store build.
    std::string hash() const {
        std::ostringstream s;
        s << "max_chunk_tokens=" << chunking.max_chunk_tokens
          << ";overlap_tokens=" << chunking.overlap_tokens
          << ";tokenizer=" << chunking.tokenizer_id
          << ";extractor=" << providers.extractor
          << ";dictionary=" << providers.dictionary_path
          << ";embedding=" << providers.embedding
          << ";embedding_dim=" << providers.embedding_dim;
        return to_hex(fnv1a64(s.str()));
    }

    static Config load(const std::string& path);
};

namespace detail {

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
    std::istringstream in(value);
    T out{};
    in >> out;
    if (in.fail() || !in.eof())
        throw ArgumentError("config: bad numeric value for " + key + ": " + value);
    return out;
}

inline bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ArgumentError("config: bad boolean value for " + key + ": " + value);
}

} // namespace detail

inline Config Config::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config file " + path);

    Config cfg;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            if (section != "chunking" && section != "retrieval" &&
                section != "providers" && section != "rag" && section != "echo")
                throw ParseError(path, line_no, "unknown section [" + section + "]");
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(path, line_no, "expected key = value: " + t);
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        try {
            if (section == "chunking") {
                if (key == "max_chunk_tokens")
                    cfg.chunking.max_chunk_tokens = detail::parse_number<std::size_t>(value, key);
                else if (key == "overlap_tokens")
                    cfg.chunking.overlap_tokens = detail::parse_number<std::size_t>(value, key);
                else if (key == "tokenizer")
                    cfg.chunking.tokenizer_id = value;
                else
                    throw ArgumentError("unknown key: " + key);
            } else if (section == "retrieval") {
                if (key == "delta1") cfg.retrieval.delta1 = detail::parse_number<double>(value, key);
                else if (key == "hops") cfg.retrieval.hops = detail::parse_number<int>(value, key);
                else if (key == "lambda") cfg.retrieval.lambda = detail::parse_number<double>(value, key);
                else if (key == "alpha") cfg.retrieval.alpha = detail::parse_number<double>(value, key);
                else if (key == "top_k_entities")
                    cfg.retrieval.top_k_entities = detail::parse_number<int>(value, key);
                else if (key == "top_k_chunks")
                    cfg.retrieval.top_k_chunks = detail::parse_number<int>(value, key);
                else if (key == "max_anchors_per_keyword")
                    cfg.retrieval.max_anchors_per_keyword = detail::parse_number<int>(value, key);
                else
                    throw ArgumentError("unknown key: " + key);
            } else if (section == "providers") {
                if (key == "embedding") cfg.providers.embedding = value;
                else if (key == "embedding_dim")
                    cfg.providers.embedding_dim = detail::parse_number<std::size_t>(value, key);
                else if (key == "generation") cfg.providers.generation = value;
                else if (key == "generation_model") cfg.providers.generation_model = value;
                else if (key == "max_context_tokens")
                    cfg.providers.max_context_tokens = detail::parse_number<std::size_t>(value, key);
                else if (key == "max_attempts")
                    cfg.providers.max_attempts = detail::parse_number<int>(value, key);
                else if (key == "extractor") cfg.providers.extractor = value;
                else if (key == "keywords") cfg.providers.keywords = value;
                else if (key == "dictionary") cfg.providers.dictionary_path = value;
                else
                    throw ArgumentError("unknown key: " + key);
            } else if (section == "rag") {
                if (key == "enabled") cfg.rag_enabled = detail::parse_bool(value, key);
                else
                    throw ArgumentError("unknown key: " + key);
            } else if (section == "echo") {
                if (key == "reply") {
                    std::size_t sep = value.find(" => ");
                    if (sep == std::string::npos)
                        throw ArgumentError("echo reply must be '<key> => <reply>'");
                    cfg.providers.echo_replies.emplace_back(trim(value.substr(0, sep)),
                                                            trim(value.substr(sep + 4)));
                } else {
                    throw ArgumentError("unknown key: " + key);
                }
            } else {
                throw ArgumentError("key outside any section: " + key);
            }
        } catch (const ArgumentError& e) {
            throw ParseError(path, line_no, e.what());
        }
    }
    return cfg;
}

// --- provider factories -----------------------------------------------------

inline std::string env_or(const char* name, const std::string& fallback = {}) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

inline std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const Config& cfg, HttpTransport transport = {}) {
    if (cfg.providers.embedding == "hash-v1")
        return std::make_unique<HashEmbedder>(cfg.providers.embedding_dim);
    if (!transport)
        throw ArgumentError("remote embedding provider requires an HTTP transport");
    RetryPolicy retry{cfg.providers.max_attempts, 200};
    return std::make_unique<RemoteEmbedder>(env_or("EMBED_API_URL"),
                                            env_or("EMBED_API_KEY"),
                                            cfg.providers.embedding_dim,
                                            std::move(transport), retry);
}

inline std::unique_ptr<GenerationProvider> make_generation_provider(
    const Config& cfg, HttpTransport transport = {}) {
    if (cfg.providers.generation == "echo") {
        auto echo = std::make_unique<EchoProvider>(cfg.providers.max_context_tokens);
        for (const auto& [key, reply] : cfg.providers.echo_replies)
            echo->add_scripted_reply(key, reply);
        return echo;
    }
    if (!transport)
        throw ArgumentError("remote generation provider requires an HTTP transport");
    RetryPolicy retry{cfg.providers.max_attempts, 200};
    return std::make_unique<OpenAiProvider>(env_or("LLM_API_URL"),
                                            env_or("LLM_API_KEY"),
                                            cfg.providers.generation_model,
                                            cfg.providers.max_context_tokens,
                                            std::move(transport), retry);
}

inline std::unique_ptr<KeywordProvider> make_keyword_provider(const Config& cfg,
                                                              TextCompleter& completer) {
    if (cfg.providers.keywords == "simple-v1")
        return std::make_unique<SimpleKeywordProvider>();
    return std::make_unique<LlmKeywordProvider>(completer);
}

inline std::vector<std::string> load_dictionary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open dictionary file " + path);
    std::vector<std::string> phrases;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (!t.empty() && t[0] != '#') phrases.push_back(std::move(t));
    }
    return phrases;
}

inline std::unique_ptr<ExtractorProvider> make_extractor_provider(const Config& cfg,
                                                                  TextCompleter& completer) {
    if (cfg.providers.extractor == "rules-v1") {
        if (cfg.providers.dictionary_path.empty())
            return std::make_unique<RulesExtractor>();
        return std::make_unique<RulesExtractor>(
            load_dictionary_file(cfg.providers.dictionary_path));
    }
    return std::make_unique<LlmExtractor>(completer);
}

} // namespace kgrag
