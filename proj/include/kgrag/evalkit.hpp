#pragma once
// QA evaluation: strict multiple-choice grading, ROUGE-1 / ROUGE-L,
// embedding-based SemScore, and the count-weighted composite score.
//
// Multiple-choice answers are extracted by scanning for standalone option
// letters (word-boundary, case-insensitive, so "B", "B.", "(B)" all
// match) and graded by exact set equality: missing or extra options both
// fail.
//
// ROUGE normalization (norm-v1, pinned): lowercase, ASCII punctuation
// replaced by spaces, whitespace tokens. ROUGE-1 is clipped-count unigram
// F1 x 100; ROUGE-L is LCS F1 x 100 over the same tokens. SemScore is
// cosine similarity of provider embeddings clamped to [0,1], x 100.

#include "kgrag/embedding.hpp"
#include "kgrag/error.hpp"
#include "kgrag/generation.hpp"
#include "kgrag/retrieval.hpp"
#include "kgrag/text.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace kgrag {

enum class TaskCategory { accident, corner_case, commonsense };
enum class ItemKind { mcq_single, mcq_multiple, open };

inline std::string to_string(TaskCategory t) {
    switch (t) {
        case TaskCategory::accident: return "accident";
        case TaskCategory::corner_case: return "corner_case";
        default: return "commonsense";
    }
}
inline std::string to_string(ItemKind k) {
    switch (k) {
        case ItemKind::mcq_single: return "mcq_single";
        case ItemKind::mcq_multiple: return "mcq_multiple";
        default: return "open";
    }
}

struct QAItem {
    std::string id;
    TaskCategory task = TaskCategory::commonsense;
    ItemKind kind = ItemKind::open;
    std::string question;
    std::vector<std::pair<std::string, std::string>> options;
    std::set<std::string> gold_labels; // mcq
    std::string gold_text;             // open
    std::vector<std::string> media;

    void validate() const {
        if (id.empty()) throw ArgumentError("QA item id must be non-empty");
        if (question.empty()) throw ArgumentError("QA item question must be non-empty: " + id);
        if (kind == ItemKind::open) {
            if (gold_text.empty())
                throw ArgumentError("open item needs a reference answer: " + id);
            return;
        }
        if (options.size() < 2)
            throw ArgumentError("mcq item needs >= 2 options: " + id);
        if (gold_labels.empty())
            throw ArgumentError("mcq item needs gold labels: " + id);
        std::set<std::string> labels;
        for (const auto& [label, text] : options) labels.insert(label);
        for (const auto& g : gold_labels)
            if (!labels.count(g))
                throw ArgumentError("gold label " + g + " not among options: " + id);
    }
};

struct GradedItem {
    std::string id;
    TaskCategory task = TaskCategory::commonsense;
    ItemKind kind = ItemKind::open;
    std::string raw_output;
    std::set<std::string> extracted_labels;
    std::string extracted_text;
    std::optional<bool> mcq_correct;
    std::optional<double> rouge1;
    std::optional<double> rougeL;
    std::optional<double> semscore;
    bool failed = false;
    std::string error;

    nlohmann::json to_json() const {
        nlohmann::json j{{"id", id},
                         {"task", to_string(task)},
                         {"kind", to_string(kind)},
                         {"raw_output", raw_output},
                         {"failed", failed}};
        if (kind == ItemKind::open) {
            j["extracted"] = extracted_text;
            if (rouge1) j["rouge1"] = *rouge1;
            if (rougeL) j["rougeL"] = *rougeL;
            if (semscore) j["semscore"] = *semscore;
        } else {
            j["extracted"] = extracted_labels;
            if (mcq_correct) j["mcq_correct"] = *mcq_correct;
        }
        if (!error.empty()) j["error"] = error;
        return j;
    }
};

struct ReportCard {
    double mcq_single_acc = 0.0;
    double mcq_multiple_acc = 0.0;
    double mcq_overall = 0.0;
    double qa_r1 = 0.0;
    double qa_rl = 0.0;
    double qa_sem = 0.0;
    double qa_overall = 0.0;
    double safedrive_score = 0.0;
    std::size_t n_mcq_single = 0;
    std::size_t n_mcq_multiple = 0;
    std::size_t n_open = 0;
    std::size_t n_failed = 0;

    nlohmann::json to_json() const {
        return {{"mcq_single_acc", mcq_single_acc},
                {"mcq_multiple_acc", mcq_multiple_acc},
                {"mcq_overall", mcq_overall},
                {"qa_r1", qa_r1},
                {"qa_rl", qa_rl},
                {"qa_sem", qa_sem},
                {"qa_overall", qa_overall},
                {"safedrive_score", safedrive_score},
                {"counts",
                 {{"mcq_single", n_mcq_single},
                  {"mcq_multiple", n_mcq_multiple},
                  {"open", n_open},
                  {"failed", n_failed}}}};
    }
};

// --- multiple choice -------------------------------------------------------

// Distinct standalone option letters found in the raw output.
inline std::set<std::string> extract_options(const std::string& raw,
                                             const std::set<std::string>& valid_labels) {
    if (valid_labels.empty()) throw ArgumentError("extract_options: no valid labels");
    auto is_alnum = [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    };
    std::set<std::string> found;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        char upper = (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
        if (upper < 'A' || upper > 'Z') continue;
        std::string label(1, upper);
        if (!valid_labels.count(label)) continue;
        bool left_ok = i == 0 || !is_alnum(raw[i - 1]);
        bool right_ok = i + 1 == raw.size() || !is_alnum(raw[i + 1]);
        if (left_ok && right_ok) found.insert(label);
    }
    return found;
}

// Correct only when the extracted set equals the gold set exactly.
inline bool grade_mcq(const std::set<std::string>& extracted,
                      const std::set<std::string>& gold) {
    if (gold.empty()) throw ArgumentError("grade_mcq: gold set must be non-empty");
    return extracted == gold;
}

// --- ROUGE ------------------------------------------------------------------

// norm-v1 tokenization shared by rouge1 and rougeL.
inline std::vector<std::string> rouge_tokens(const std::string& text) {
    std::string cleaned = lowercase_ascii(text);
    for (char& c : cleaned)
        if (is_ascii_punct(c)) c = ' ';
    return tokenize(cleaned);
}

namespace detail {

inline double f1_times_100(double overlap, double cand_len, double ref_len) {
    if (overlap == 0.0) return 0.0;
    double p = overlap / cand_len;
    double r = overlap / ref_len;
    return 100.0 * (2.0 * p * r) / (p + r);
}

} // namespace detail

inline double rouge1(const std::string& candidate, const std::string& reference) {
    std::vector<std::string> ref = rouge_tokens(reference);
    if (ref.empty()) throw ArgumentError("rouge1: reference is empty after normalization");
    std::vector<std::string> cand = rouge_tokens(candidate);
    if (cand.empty()) return 0.0;

    std::map<std::string, std::size_t> ref_counts;
    for (const auto& t : ref) ++ref_counts[t];
    std::size_t overlap = 0;
    for (const auto& t : cand) {
        auto it = ref_counts.find(t);
        if (it != ref_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    return detail::f1_times_100(static_cast<double>(overlap),
                                static_cast<double>(cand.size()),
                                static_cast<double>(ref.size()));
}

inline std::size_t lcs_length(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                          : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline double rougeL(const std::string& candidate, const std::string& reference) {
    std::vector<std::string> ref = rouge_tokens(reference);
    if (ref.empty()) throw ArgumentError("rougeL: reference is empty after normalization");
    std::vector<std::string> cand = rouge_tokens(candidate);
    if (cand.empty()) return 0.0;
    std::size_t lcs = lcs_length(cand, ref);
    return detail::f1_times_100(static_cast<double>(lcs),
                                static_cast<double>(cand.size()),
                                static_cast<double>(ref.size()));
}

// --- semantic similarity ------------------------------------------------------

inline double semscore(const std::string& candidate, const std::string& reference,
                       EmbeddingProvider& provider) {
    if (trim(candidate).empty() || trim(reference).empty())
        throw ArgumentError("semscore: texts must be non-empty");
    double cos = similarity(provider.embed(candidate), provider.embed(reference));
    cos = std::clamp(cos, 0.0, 1.0);
    return 100.0 * cos;
}

// --- aggregates ----------------------------------------------------------------

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

// Open-QA overall: arithmetic mean of the three metrics, 2 decimals.
inline double qa_overall(double r1, double rl, double sem) {
    for (double v : {r1, rl, sem})
        if (v < 0.0 || v > 100.0)
            throw ArgumentError("qa_overall: inputs must be in [0,100]");
    return round2((r1 + rl + sem) / 3.0);
}

// Composite: count-weighted mean of the MCQ and open-QA overalls.
inline double safedrive_score(double mcq_overall_score, std::size_t n_mcq,
                              double qa_overall_score, std::size_t n_qa) {
    if (n_mcq + n_qa == 0)
        throw ArgumentError("safedrive_score: zero item count");
    double weighted = (static_cast<double>(n_mcq) * mcq_overall_score +
                       static_cast<double>(n_qa) * qa_overall_score) /
                      static_cast<double>(n_mcq + n_qa);
    return round2(weighted);
}

// --- harness ---------------------------------------------------------------------

struct EvalPipeline {
    const Store* store = nullptr; // required when rag_enabled
    RetrievalParams params;
    bool rag_enabled = true;
    KeywordProvider* keywords = nullptr;
    EmbeddingProvider* embedder = nullptr; // retrieval + semscore
    GenerationProvider* generator = nullptr;
};

inline GradedItem grade_item(const QAItem& item, const std::string& raw,
                             EmbeddingProvider& embedder) {
    GradedItem graded;
    graded.id = item.id;
    graded.task = item.task;
    graded.kind = item.kind;
    graded.raw_output = raw;
    if (item.kind == ItemKind::open) {
        graded.extracted_text = trim(raw);
        graded.rouge1 = rouge1(raw, item.gold_text);
        graded.rougeL = rougeL(raw, item.gold_text);
        graded.semscore = graded.extracted_text.empty()
                              ? 0.0
                              : semscore(raw, item.gold_text, embedder);
    } else {
        std::set<std::string> valid;
        for (const auto& [label, text] : item.options) valid.insert(label);
        graded.extracted_labels = extract_options(raw, valid);
        graded.mcq_correct = grade_mcq(graded.extracted_labels, item.gold_labels);
    }
    return graded;
}

inline ReportCard aggregate_report(const std::vector<GradedItem>& graded) {
    ReportCard card;
    std::size_t correct_single = 0, correct_multiple = 0;
    double sum_r1 = 0.0, sum_rl = 0.0, sum_sem = 0.0;
    for (const auto& g : graded) {
        if (g.failed) {
            ++card.n_failed;
            continue;
        }
        switch (g.kind) {
            case ItemKind::mcq_single:
                ++card.n_mcq_single;
                if (g.mcq_correct.value_or(false)) ++correct_single;
                break;
            case ItemKind::mcq_multiple:
                ++card.n_mcq_multiple;
                if (g.mcq_correct.value_or(false)) ++correct_multiple;
                break;
            case ItemKind::open:
                ++card.n_open;
                sum_r1 += g.rouge1.value_or(0.0);
                sum_rl += g.rougeL.value_or(0.0);
                sum_sem += g.semscore.value_or(0.0);
                break;
        }
    }
    if (card.n_mcq_single)
        card.mcq_single_acc = 100.0 * static_cast<double>(correct_single) /
                              static_cast<double>(card.n_mcq_single);
    if (card.n_mcq_multiple)
        card.mcq_multiple_acc = 100.0 * static_cast<double>(correct_multiple) /
                                static_cast<double>(card.n_mcq_multiple);
    const std::size_t n_mcq = card.n_mcq_single + card.n_mcq_multiple;
    if (n_mcq)
        card.mcq_overall = (static_cast<double>(card.n_mcq_single) * card.mcq_single_acc +
                            static_cast<double>(card.n_mcq_multiple) * card.mcq_multiple_acc) /
                           static_cast<double>(n_mcq);
    if (card.n_open) {
        card.qa_r1 = sum_r1 / static_cast<double>(card.n_open);
        card.qa_rl = sum_rl / static_cast<double>(card.n_open);
        card.qa_sem = sum_sem / static_cast<double>(card.n_open);
        card.qa_overall = qa_overall(card.qa_r1, card.qa_rl, card.qa_sem);
    }
    if (n_mcq + card.n_open)
        card.safedrive_score =
            safedrive_score(card.mcq_overall, n_mcq, card.qa_overall, card.n_open);
    return card;
}

// Runs retrieve -> assemble -> generate -> grade per item. Provider
// failures mark the item failed and the run continues.
inline ReportCard run_eval(const std::vector<QAItem>& items, EvalPipeline& pipeline,
                           std::vector<GradedItem>* out_graded = nullptr) {
    if (items.empty()) throw ArgumentError("run_eval: item list is empty");
    if (!pipeline.generator || !pipeline.embedder || !pipeline.keywords)
        throw ArgumentError("run_eval: pipeline providers missing");
    if (pipeline.rag_enabled && !pipeline.store)
        throw ArgumentError("run_eval: rag enabled but no store");

    std::vector<GradedItem> graded;
    graded.reserve(items.size());
    for (const auto& item : items) {
        item.validate();
        GradedItem g;
        try {
            GenerationRequest req;
            req.question = item.question;
            req.options = item.options;
            req.media = item.media;
            req.mode = item.kind == ItemKind::open ? AnswerMode::open : AnswerMode::mcq;
            if (pipeline.rag_enabled)
                req.context = retrieve(*pipeline.store, item.question, pipeline.params,
                                       *pipeline.keywords, *pipeline.embedder);
            std::string raw = pipeline.generator->generate(req);
            g = grade_item(item, raw, *pipeline.embedder);
        } catch (const Error& e) {
            g.id = item.id;
            g.task = item.task;
            g.kind = item.kind;
            g.failed = true;
            g.error = e.what();
        }
        graded.push_back(std::move(g));
    }
    ReportCard card = aggregate_report(graded);
    if (out_graded) *out_graded = std::move(graded);
    return card;
}

// --- QA file parsing ----------------------------------------------------------

inline QAItem parse_qa_json(const nlohmann::json& j) {
    QAItem item;
    item.id = j.at("id").get<std::string>();
    const std::string task = j.at("task").get<std::string>();
    if (task == "accident") item.task = TaskCategory::accident;
    else if (task == "corner_case") item.task = TaskCategory::corner_case;
    else if (task == "commonsense") item.task = TaskCategory::commonsense;
    else throw ArgumentError("unknown task: " + task);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "mcq_single") item.kind = ItemKind::mcq_single;
    else if (kind == "mcq_multiple") item.kind = ItemKind::mcq_multiple;
    else if (kind == "open") item.kind = ItemKind::open;
    else throw ArgumentError("unknown kind: " + kind);
    item.question = j.at("question").get<std::string>();
    if (j.contains("options"))
        for (const auto& opt : j.at("options"))
            item.options.emplace_back(opt.at(0).get<std::string>(),
                                      opt.at(1).get<std::string>());
    if (item.kind == ItemKind::open) {
        item.gold_text = j.at("gold").get<std::string>();
    } else {
        for (const auto& g : j.at("gold"))
            item.gold_labels.insert(g.get<std::string>());
    }
    if (j.contains("media"))
        item.media = j.at("media").get<std::vector<std::string>>();
    item.validate();
    return item;
}

inline std::vector<QAItem> parse_qa_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::vector<QAItem> items;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            QAItem item = parse_qa_json(nlohmann::json::parse(line));
            if (!ids.insert(item.id).second)
                throw ArgumentError("duplicate item id: " + item.id);
            items.push_back(std::move(item));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path, line_no, e.what());
        } catch (const Error& e) {
            throw ParseError(path, line_no, e.what());
        }
    }
    return items;
}

} // namespace kgrag
