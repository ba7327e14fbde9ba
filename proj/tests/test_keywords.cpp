#include "kgrag/keywords.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace kgrag;

namespace {

class ScriptedCompleter : public TextCompleter {
public:
    explicit ScriptedCompleter(std::string reply) : reply_(std::move(reply)) {}
    std::string complete(const std::string&) override { return reply_; }

private:
    std::string reply_;
};

} // namespace

TEST_CASE("simple-v1 keeps content words") {
    SimpleKeywordProvider p;
    CHECK(p.extract("What should a driver do at a flooded underpass?") ==
          std::vector<std::string>{"driver", "flooded", "underpass"});
    CHECK(p.id() == "simple-v1");
}

TEST_CASE("simple-v1 falls back to the whole question") {
    SimpleKeywordProvider p;
    CHECK(p.extract("a an the") == std::vector<std::string>{"a an the"});
    CHECK(p.extract("Do it now") == std::vector<std::string>{"Do it now"});
}

TEST_CASE("simple-v1 deduplicates preserving order") {
    SimpleKeywordProvider p;
    CHECK(p.extract("brake Brake BRAKE failure brake") ==
          std::vector<std::string>{"brake", "failure"});
}

TEST_CASE("simple-v1 equals an independent stopword filter") {
    // oracle: its own tokenization (stream extraction), its own punctuation
    // strip, same pinned stopword list
    auto oracle = [](const std::string& question) {
        std::istringstream in(question);
        std::vector<std::string> out;
        std::set<std::string> seen;
        std::string raw;
        while (in >> raw) {
            std::size_t b = 0, e = raw.size();
            auto is_punct = [](char c) {
                return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
                       (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
            };
            while (b < e && is_punct(raw[b])) ++b;
            while (e > b && is_punct(raw[e - 1])) --e;
            std::string tok = raw.substr(b, e - b);
            for (char& c : tok)
                if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            if (tok.size() < 3 || stopwords_v1().count(tok)) continue;
            if (seen.insert(tok).second) out.push_back(tok);
        }
        if (out.empty()) out.push_back(question);
        return out;
    };

    const std::vector<std::string> templates{
        "What happens when the %s fails on a %s?",
        "Should a %s yield to the %s at night.",
        "Explain %s and %s rules, please!",
        "%s %s",
        "Is the %s near a %s dangerous?",
    };
    const std::vector<std::string> words{"brake",  "truck",    "pedestrian", "signal",
                                         "lane",   "crossing", "engine",     "an",
                                         "it",     "fog"};
    std::mt19937 rng(71);
    SimpleKeywordProvider p;
    for (int iter = 0; iter < 50; ++iter) {
        std::string t = templates[rng() % templates.size()];
        std::string w1 = words[rng() % words.size()];
        std::string w2 = words[rng() % words.size()];
        std::string q = t;
        q.replace(q.find("%s"), 2, w1);
        q.replace(q.find("%s"), 2, w2);
        CHECK(p.extract(q) == oracle(q));
    }
}

TEST_CASE("llm keyword provider parses lines and falls back") {
    ScriptedCompleter good("driver\nflood risk\n\ndriver\n");
    LlmKeywordProvider p(good);
    CHECK(p.extract("anything") == std::vector<std::string>{"driver", "flood risk"});

    ScriptedCompleter empty("");
    LlmKeywordProvider q(empty);
    CHECK(q.extract("the question") == std::vector<std::string>{"the question"});
}
