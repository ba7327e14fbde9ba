#pragma once
// Prompt assembly and answer-generation providers.
//
// prompt-v1 template: labeled ENTITIES / IMAGES / CONTEXT CHUNKS sections
// in retrieval rank order, then QUESTION and (for multiple choice) an
// OPTIONS block with a letters-only instruction. Assembly is a pure
// function of the request.
//
// When the token estimate exceeds the provider budget, context is trimmed
// in fixed order: lowest-ranked chunks, then entity descriptions (names
// stay), then image captions, then whole images, then whole entities.
// The question and options are never trimmed; if they alone exceed the
// budget the request is unprocessable. Every trim step is recorded.
//
// Providers: "echo" answers offline and deterministically (scripted
// replies or a prompt-hash tag); "remote" posts an OpenAI-compatible
// chat payload with media attached as image_url content parts.

#include "kgrag/completion.hpp"
#include "kgrag/error.hpp"
#include "kgrag/retrieval.hpp"
#include "kgrag/text.hpp"
#include "kgrag/transport.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace kgrag {

inline constexpr const char* kPromptTemplateVersion = "prompt-v1";
inline constexpr const char* kMcqInstruction =
    "Answer using only the option letter(s).";

enum class AnswerMode { mcq, open };

struct GenerationRequest {
    std::string question;
    std::vector<std::pair<std::string, std::string>> options; // (label, text)
    std::vector<std::string> media;                           // image/video URIs
    SubgraphResult context;
    AnswerMode mode = AnswerMode::open;
    std::vector<std::string>* trim_log = nullptr; // optional trace sink

    void validate() const {
        if (question.empty()) throw ArgumentError("question must be non-empty");
        if (mode == AnswerMode::mcq) {
            if (options.empty())
                throw ArgumentError("mcq request requires options");
            std::set<std::string> seen;
            for (const auto& [label, text] : options) {
                if (label.size() != 1 || label[0] < 'A' || label[0] > 'Z')
                    throw ArgumentError("option label must be a single letter A-Z: " + label);
                if (!seen.insert(label).second)
                    throw ArgumentError("duplicate option label: " + label);
            }
        }
    }
};

struct PromptBuild {
    std::string text;
    std::vector<std::string> trimmed; // one entry per trim step
};

namespace detail {

struct PromptParts {
    struct Ent { NodeId id; std::string name; std::string description; };
    struct Img { NodeId id; std::string uri; std::string caption; };
    struct Chk { NodeId id; double score; std::string text; };
    std::vector<Ent> entities;
    std::vector<Img> images;
    std::vector<Chk> chunks;
};

inline std::string render_prompt(const PromptParts& parts, const GenerationRequest& req) {
    std::string out;
    if (!parts.entities.empty()) {
        out += "ENTITIES:\n";
        for (std::size_t i = 0; i < parts.entities.size(); ++i) {
            const auto& e = parts.entities[i];
            out += std::to_string(i + 1) + ". " + e.name;
            if (!e.description.empty()) out += " - " + e.description;
            out += '\n';
        }
        out += '\n';
    }
    if (!parts.images.empty()) {
        out += "IMAGES:\n";
        for (std::size_t i = 0; i < parts.images.size(); ++i) {
            const auto& im = parts.images[i];
            out += std::to_string(i + 1) + ". " + im.uri;
            if (!im.caption.empty()) out += " - " + im.caption;
            out += '\n';
        }
        out += '\n';
    }
    if (!parts.chunks.empty()) {
        out += "CONTEXT CHUNKS:\n";
        for (std::size_t i = 0; i < parts.chunks.size(); ++i) {
            const auto& c = parts.chunks[i];
            char score[40];
            std::snprintf(score, sizeof(score), "%.6f", c.score);
            out += std::to_string(i + 1) + ". [score=" + score + "] " + c.text + '\n';
        }
        out += '\n';
    }
    out += "QUESTION:\n" + req.question + '\n';
    if (req.mode == AnswerMode::mcq) {
        out += "\nOPTIONS:\n";
        for (const auto& [label, text] : req.options)
            out += label + ". " + text + '\n';
        out += '\n';
        out += kMcqInstruction;
        out += '\n';
    }
    return out;
}

} // namespace detail

// Pure prompt assembly with the trimming rule above. max_context_tokens is
// a ws-v1 token estimate of the final prompt.
inline PromptBuild assemble_prompt(const GenerationRequest& req,
                                   std::size_t max_context_tokens) {
    req.validate();

    detail::PromptParts parts;
    for (const auto& e : req.context.entities)
        parts.entities.push_back({e.node.id, e.node.name, e.node.description});
    for (const auto& im : req.context.images)
        parts.images.push_back({im.id, im.uri, im.caption});
    for (const auto& c : req.context.chunks)
        parts.chunks.push_back({c.chunk.id, c.score, c.chunk.text});

    PromptBuild build;
    for (;;) {
        build.text = detail::render_prompt(parts, req);
        if (count_tokens(build.text) <= max_context_tokens) return build;

        if (!parts.chunks.empty()) {
            build.trimmed.push_back("dropped chunk " + parts.chunks.back().id);
            parts.chunks.pop_back();
            continue;
        }
        auto ent_with_desc = std::find_if(parts.entities.rbegin(), parts.entities.rend(),
                                          [](const auto& e) { return !e.description.empty(); });
        if (ent_with_desc != parts.entities.rend()) {
            build.trimmed.push_back("dropped entity description " + ent_with_desc->id);
            ent_with_desc->description.clear();
            continue;
        }
        auto img_with_caption = std::find_if(parts.images.rbegin(), parts.images.rend(),
                                             [](const auto& im) { return !im.caption.empty(); });
        if (img_with_caption != parts.images.rend()) {
            build.trimmed.push_back("dropped image caption " + img_with_caption->id);
            img_with_caption->caption.clear();
            continue;
        }
        if (!parts.images.empty()) {
            build.trimmed.push_back("dropped image " + parts.images.back().id);
            parts.images.pop_back();
            continue;
        }
        if (!parts.entities.empty()) {
            build.trimmed.push_back("dropped entity " + parts.entities.back().id);
            parts.entities.pop_back();
            continue;
        }
        throw UnprocessableError(
            "question and options alone exceed the context budget (" +
            std::to_string(count_tokens(build.text)) + " > " +
            std::to_string(max_context_tokens) + " tokens)");
    }
}

class GenerationProvider : public TextCompleter {
public:
    virtual std::string id() const = 0;
    virtual std::size_t max_context_tokens() const = 0;
    // Assembles the prompt under this provider's budget and answers it.
    virtual std::string generate(const GenerationRequest& req) = 0;
};

// Offline deterministic provider. Reply resolution order: the fixed reply
// if set, the first scripted (key, reply) whose key occurs in the prompt,
// else a stable tag derived from the prompt hash.
class EchoProvider final : public GenerationProvider {
public:
    explicit EchoProvider(std::size_t max_context_tokens = 8192)
        : budget_(max_context_tokens) {}

    std::string id() const override { return "echo"; }
    std::size_t max_context_tokens() const override { return budget_; }

    void set_fixed_reply(std::string reply) { fixed_ = std::move(reply); }
    void add_scripted_reply(std::string key_substring, std::string reply) {
        scripted_.emplace_back(std::move(key_substring), std::move(reply));
    }

    std::string generate(const GenerationRequest& req) override {
        PromptBuild build = assemble_prompt(req, budget_);
        if (req.trim_log)
            req.trim_log->insert(req.trim_log->end(), build.trimmed.begin(),
                                 build.trimmed.end());
        return reply_for(build.text);
    }

    std::string complete(const std::string& prompt) override {
        return reply_for(prompt);
    }

private:
    std::string reply_for(const std::string& prompt) const {
        if (fixed_) return *fixed_;
        for (const auto& [key, reply] : scripted_)
            if (prompt.find(key) != std::string::npos) return reply;
        return "ECHO-" + to_hex(fnv1a64(prompt));
    }

    std::size_t budget_;
    std::optional<std::string> fixed_;
    std::vector<std::pair<std::string, std::string>> scripted_;
};

// OpenAI-compatible chat completion client. Media URIs ride along as
// image_url content parts.
class OpenAiProvider final : public GenerationProvider {
public:
    OpenAiProvider(std::string url, std::string api_key, std::string model,
                   std::size_t max_context_tokens, HttpTransport transport,
                   RetryPolicy retry = {})
        : url_(std::move(url)), api_key_(std::move(api_key)), model_(std::move(model)),
          budget_(max_context_tokens), transport_(std::move(transport)), retry_(retry) {
        if (url_.empty())
            throw ArgumentError("remote generation: endpoint not configured "
                                "(set LLM_API_URL)");
        if (url_.find("/chat/completions") == std::string::npos) {
            if (url_.back() == '/') url_.pop_back();
            url_ += "/chat/completions";
        }
    }

    std::string id() const override { return "remote"; }
    std::size_t max_context_tokens() const override { return budget_; }
    int last_attempts() const { return last_attempts_; }

    std::string generate(const GenerationRequest& req) override {
        PromptBuild build = assemble_prompt(req, budget_);
        if (req.trim_log)
            req.trim_log->insert(req.trim_log->end(), build.trimmed.begin(),
                                 build.trimmed.end());
        return post_chat(build.text, req.media);
    }

    std::string complete(const std::string& prompt) override {
        return post_chat(prompt, {});
    }

private:
    std::string post_chat(const std::string& prompt, const std::vector<std::string>& media) {
        nlohmann::json content;
        if (media.empty()) {
            content = prompt;
        } else {
            content = nlohmann::json::array();
            content.push_back({{"type", "text"}, {"text", prompt}});
            for (const auto& uri : media)
                content.push_back({{"type", "image_url"}, {"image_url", {{"url", uri}}}});
        }
        nlohmann::json payload{
            {"model", model_},
            {"messages", nlohmann::json::array({nlohmann::json{
                             {"role", "user"}, {"content", content}}})}};
        std::vector<Header> headers;
        if (!api_key_.empty())
            headers.emplace_back("Authorization", "Bearer " + api_key_);

        auto [res, attempts] = post_with_retry(transport_, retry_, url_,
                                               payload.dump(), headers, "generate");
        last_attempts_ = attempts;
        try {
            nlohmann::json j = nlohmann::json::parse(res.body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("generation response",
                             std::string(e.what()) + "; body: " + res.body);
        }
    }

    std::string url_;
    std::string api_key_;
    std::string model_;
    std::size_t budget_;
    HttpTransport transport_;
    RetryPolicy retry_;
    int last_attempts_ = 0;
};

} // namespace kgrag
