#pragma once
// Per-namespace vector index ("entity", "image", "chunk"). Exact top-k by
// full scan; stores in scope stay small enough that a scan beats any ANN
// structure and keeps results bit-reproducible.
//
// Persistence: vectors-<namespace>.jsonl, one {"id":..., "values":[...]}
// per line sorted by id, doubles at full round-trip precision.

#include "kgrag/embedding.hpp"
#include "kgrag/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kgrag {

struct Scored {
    std::string id;
    double score = 0.0;

    bool operator==(const Scored&) const = default;
};

// Descending score, ascending id. The single ordering used everywhere a
// ranked list is produced.
inline bool scored_less(const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

class VectorIndex {
public:
    VectorIndex() = default;
    explicit VectorIndex(std::string ns) : namespace_(std::move(ns)) {}

    const std::string& ns() const { return namespace_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    std::size_t dim() const { return dim_; }

    void add(const std::string& id, Embedding e) {
        if (id.empty()) throw ArgumentError("vector id must be non-empty");
        if (e.values.empty()) throw ArgumentError("vector must be non-empty");
        if (records_.empty())
            dim_ = e.dim();
        else if (e.dim() != dim_)
            throw ArgumentError("vector dim " + std::to_string(e.dim()) +
                                " does not match index dim " + std::to_string(dim_));
        records_[id] = std::move(e);
    }

    const Embedding* find(const std::string& id) const {
        auto it = records_.find(id);
        return it == records_.end() ? nullptr : &it->second;
    }

    const std::map<std::string, Embedding>& records() const { return records_; }

    // Exact top-k: descending score, ascending-id ties, entries below
    // threshold dropped. May return fewer than k.
    std::vector<Scored> top_k(const Embedding& query, std::size_t k,
                              std::optional<double> threshold = std::nullopt) const {
        if (k < 1) throw ArgumentError("top_k: k must be >= 1");
        std::vector<Scored> hits;
        hits.reserve(records_.size());
        for (const auto& [id, vec] : records_) {
            double s = similarity(query, vec);
            if (threshold && s < *threshold) continue;
            hits.push_back({id, s});
        }
        std::sort(hits.begin(), hits.end(), scored_less);
        if (hits.size() > k) hits.resize(k);
        return hits;
    }

    bool operator==(const VectorIndex& other) const {
        return namespace_ == other.namespace_ && records_ == other.records_;
    }

    void persist(const std::string& dir) const {
        const std::string path = dir + "/" + filename();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path);
        for (const auto& [id, e] : records_) {
            nlohmann::json j{{"id", id}, {"values", e.values}};
            out << j.dump() << '\n';
        }
        if (!out) throw Error("write failed: " + path);
    }

    static VectorIndex restore(const std::string& dir, const std::string& ns) {
        VectorIndex index(ns);
        const std::string path = dir + "/" + index.filename();
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open " + path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                nlohmann::json j = nlohmann::json::parse(line);
                Embedding e;
                e.values = j.at("values").get<std::vector<double>>();
                index.add(j.at("id").get<std::string>(), std::move(e));
            } catch (const nlohmann::json::exception& ex) {
                throw ParseError(path, line_no, ex.what());
            } catch (const ArgumentError& ex) {
                throw ParseError(path, line_no, ex.what());
            }
        }
        return index;
    }

    std::string filename() const { return "vectors-" + namespace_ + ".jsonl"; }

private:
    std::string namespace_;
    std::map<std::string, Embedding> records_;
    std::size_t dim_ = 0;
};

} // namespace kgrag
