#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "metaeval/errors.hpp"

namespace metaeval {

namespace detail {

// Pairwise (tree) summation. Deterministic for a fixed element order and
// order-robust enough that shuffling ~10k columns moves a row mean by less
// than 1e-12 relative.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double mean_of(std::span<const double> v) {
    return pairwise_sum(v) / static_cast<double>(v.size());
}

// Selected ids in draw order, "#k" suffixes keeping repeated picks unique.
inline std::vector<std::string> reselect_ids(const std::vector<std::string>& ids,
                                             std::span<const std::size_t> indices) {
    std::unordered_set<std::string> used;
    used.reserve(indices.size() * 2);
    std::vector<std::string> out;
    out.reserve(indices.size());
    for (std::size_t idx : indices) {
        std::string name = ids[idx];
        for (std::size_t k = 1; used.count(name) != 0; ++k)
            name = ids[idx] + "#" + std::to_string(k);
        used.insert(name);
        out.push_back(std::move(name));
    }
    return out;
}

}  // namespace detail

// Dense system x document score table. Immutable after construction, so
// instances can be shared freely across threads.
class ScoreMatrix {
public:
    // Validates and adopts the components; `values` is row-major N x M.
    static ScoreMatrix make(std::vector<std::string> system_ids,
                            std::vector<std::string> doc_ids,
                            std::vector<double> values,
                            std::string label = "") {
        if (system_ids.empty()) throw input_error("score matrix: no systems");
        if (doc_ids.empty()) throw input_error("score matrix: no documents");
        check_unique(system_ids, "system_id");
        check_unique(doc_ids, "doc_id");
        if (values.size() != system_ids.size() * doc_ids.size())
            throw input_error("score matrix: value grid is " + std::to_string(values.size()) +
                              " entries, expected " +
                              std::to_string(system_ids.size() * doc_ids.size()));
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i]))
                throw input_error("score matrix: non-finite score for (" +
                                  system_ids[i / doc_ids.size()] + ", " +
                                  doc_ids[i % doc_ids.size()] + ")");
        }
        return ScoreMatrix(std::move(system_ids), std::move(doc_ids), std::move(values),
                           std::move(label));
    }

    std::size_t n_systems() const noexcept { return system_ids_.size(); }
    std::size_t n_docs() const noexcept { return doc_ids_.size(); }
    const std::vector<std::string>& system_ids() const noexcept { return system_ids_; }
    const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
    const std::string& label() const noexcept { return label_; }

    double at(std::size_t system, std::size_t doc) const {
        return values_[system * n_docs() + doc];
    }
    std::span<const double> row(std::size_t system) const {
        return std::span<const double>(values_).subspan(system * n_docs(), n_docs());
    }
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const ScoreMatrix& a, const ScoreMatrix& b) {
        return a.system_ids_ == b.system_ids_ && a.doc_ids_ == b.doc_ids_ &&
               a.values_ == b.values_ && a.label_ == b.label_;
    }

private:
    ScoreMatrix(std::vector<std::string> sys, std::vector<std::string> docs,
                std::vector<double> values, std::string label)
        : system_ids_(std::move(sys)),
          doc_ids_(std::move(docs)),
          values_(std::move(values)),
          label_(std::move(label)) {}

    static void check_unique(const std::vector<std::string>& ids, const char* what) {
        std::unordered_set<std::string> seen;
        seen.reserve(ids.size() * 2);
        for (const auto& id : ids) {
            if (id.empty()) throw input_error(std::string("score matrix: empty ") + what);
            if (!seen.insert(id).second)
                throw input_error(std::string("score matrix: duplicate ") + what + " \"" + id +
                                  "\"");
        }
    }

    std::vector<std::string> system_ids_;
    std::vector<std::string> doc_ids_;
    std::vector<double> values_;
    std::string label_;
};

// Per-system mean scores over the M selected documents.
struct SystemAggregate {
    std::vector<std::string> system_ids;
    std::vector<double> means;
    std::size_t doc_count = 0;
};

inline SystemAggregate system_means(const ScoreMatrix& m) {
    SystemAggregate agg;
    agg.system_ids = m.system_ids();
    agg.doc_count = m.n_docs();
    agg.means.reserve(m.n_systems());
    for (std::size_t i = 0; i < m.n_systems(); ++i) agg.means.push_back(detail::mean_of(m.row(i)));
    return agg;
}

// Column selection with repetition: the resampling primitive. Output columns
// are exactly `indices` in order; repeated doc_ids get "#k" suffixes.
inline ScoreMatrix select_docs(const ScoreMatrix& m, std::span<const std::size_t> indices) {
    if (indices.empty()) throw input_error("select_docs: empty index list");
    for (std::size_t idx : indices)
        if (idx >= m.n_docs())
            throw input_error("select_docs: index " + std::to_string(idx) + " out of range [0, " +
                              std::to_string(m.n_docs()) + ")");
    std::vector<double> values;
    values.reserve(m.n_systems() * indices.size());
    for (std::size_t i = 0; i < m.n_systems(); ++i) {
        const auto row = m.row(i);
        for (std::size_t idx : indices) values.push_back(row[idx]);
    }
    return ScoreMatrix::make(m.system_ids(), detail::reselect_ids(m.doc_ids(), indices),
                             std::move(values), m.label());
}

// Row analogue of select_docs.
inline ScoreMatrix select_systems(const ScoreMatrix& m, std::span<const std::size_t> indices) {
    if (indices.empty()) throw input_error("select_systems: empty index list");
    for (std::size_t idx : indices)
        if (idx >= m.n_systems())
            throw input_error("select_systems: index " + std::to_string(idx) +
                              " out of range [0, " + std::to_string(m.n_systems()) + ")");
    std::vector<double> values;
    values.reserve(indices.size() * m.n_docs());
    for (std::size_t idx : indices) {
        const auto row = m.row(idx);
        values.insert(values.end(), row.begin(), row.end());
    }
    return ScoreMatrix::make(detail::reselect_ids(m.system_ids(), indices), m.doc_ids(),
                             std::move(values), m.label());
}

// Restricts both matrices to their common systems, in lexicographic order.
inline std::pair<ScoreMatrix, ScoreMatrix> align_systems(const ScoreMatrix& a,
                                                         const ScoreMatrix& b) {
    std::unordered_map<std::string, std::size_t> b_index;
    b_index.reserve(b.n_systems() * 2);
    for (std::size_t i = 0; i < b.n_systems(); ++i) b_index.emplace(b.system_ids()[i], i);

    std::vector<std::string> common;
    for (const auto& id : a.system_ids())
        if (b_index.count(id) != 0) common.push_back(id);
    std::sort(common.begin(), common.end());
    if (common.size() < 2)
        throw input_error("align_systems: only " + std::to_string(common.size()) +
                          " common system(s) between \"" + a.label() + "\" and \"" + b.label() +
                          "\"");

    std::unordered_map<std::string, std::size_t> a_index;
    a_index.reserve(a.n_systems() * 2);
    for (std::size_t i = 0; i < a.n_systems(); ++i) a_index.emplace(a.system_ids()[i], i);

    const auto gather = [&common](const ScoreMatrix& m,
                                  const std::unordered_map<std::string, std::size_t>& index) {
        std::vector<double> values;
        values.reserve(common.size() * m.n_docs());
        for (const auto& id : common) {
            const auto row = m.row(index.at(id));
            values.insert(values.end(), row.begin(), row.end());
        }
        return ScoreMatrix::make(common, m.doc_ids(), std::move(values), m.label());
    };
    return {gather(a, a_index), gather(b, b_index)};
}

// Restricts the metric matrix to exactly the human matrix's documents, in the
// human matrix's order: the judged-only scoring mode.
inline ScoreMatrix restrict_to_common_docs(const ScoreMatrix& metric, const ScoreMatrix& human) {
    std::unordered_map<std::string, std::size_t> col;
    col.reserve(metric.n_docs() * 2);
    for (std::size_t j = 0; j < metric.n_docs(); ++j) col.emplace(metric.doc_ids()[j], j);

    std::vector<std::size_t> indices;
    indices.reserve(human.n_docs());
    for (const auto& id : human.doc_ids()) {
        const auto it = col.find(id);
        if (it == col.end())
            throw input_error("restrict_to_common_docs: doc_id \"" + id +
                              "\" is not in the metric matrix \"" + metric.label() + "\"");
        indices.push_back(it->second);
    }
    return select_docs(metric, indices);
}

}  // namespace metaeval
