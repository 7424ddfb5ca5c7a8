#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "metaeval/errors.hpp"
#include "metaeval/score_matrix.hpp"

namespace metaeval {

enum class TableFormat { csv_long, json };

namespace detail {

inline constexpr std::string_view kCsvHeader = "system_id,doc_id,score";

// One RFC 4180 record starting at `pos`. Handles quoted fields (embedded
// commas, quotes, newlines) and both LF and CRLF endings. Returns false at
// end of input.
inline bool next_csv_record(std::string_view text, std::size_t& pos, std::size_t& line,
                            std::vector<std::string>& fields) {
    fields.clear();
    if (pos >= text.size()) return false;
    std::string field;
    bool quoted = false;
    bool at_field_start = true;
    while (pos < text.size()) {
        const char c = text[pos];
        if (quoted) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field += '"';
                    pos += 2;
                } else {
                    quoted = false;
                    ++pos;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
                ++pos;
            }
            continue;
        }
        if (c == '"' && at_field_start) {
            quoted = true;
            at_field_start = false;
            ++pos;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            at_field_start = true;
            ++pos;
        } else if (c == '\n' || (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n')) {
            pos += (c == '\r') ? 2 : 1;
            ++line;
            fields.push_back(std::move(field));
            return true;
        } else {
            if (c == '"')
                throw parse_error("csv line " + std::to_string(line) +
                                  ": stray quote inside unquoted field");
            field += c;
            at_field_start = false;
            ++pos;
        }
    }
    if (quoted) throw parse_error("csv: unterminated quoted field at end of input");
    fields.push_back(std::move(field));
    return true;
}

inline double parse_score(std::string_view field, std::size_t line) {
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || field.empty())
        throw parse_error("csv line " + std::to_string(line) + ": score \"" +
                          std::string(field) + "\" is not a decimal literal");
    if (!std::isfinite(value))
        throw parse_error("csv line " + std::to_string(line) + ": non-finite score \"" +
                          std::string(field) + "\"");
    return value;
}

inline std::string format_score(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline ScoreMatrix parse_csv_table(std::string_view text, std::string label) {
    // Tolerate a UTF-8 BOM.
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::size_t pos = 0;
    std::size_t line = 1;
    std::vector<std::string> fields;
    if (!next_csv_record(text, pos, line, fields))
        throw parse_error("csv: empty input, expected header \"" + std::string(kCsvHeader) +
                          "\"");
    if (fields.size() != 3 || fields[0] != "system_id" || fields[1] != "doc_id" ||
        fields[2] != "score")
        throw parse_error("csv: malformed header, expected exactly \"" +
                          std::string(kCsvHeader) + "\"");

    std::vector<std::string> systems, docs;
    std::unordered_map<std::string, std::size_t> sys_index, doc_index;
    struct Entry {
        std::size_t system, doc;
        double score;
    };
    std::vector<Entry> entries;

    std::size_t row_line = line;
    while (next_csv_record(text, pos, line, fields)) {
        if (fields.size() == 1 && fields[0].empty()) {  // blank line
            row_line = line;
            continue;
        }
        if (fields.size() != 3)
            throw parse_error("csv line " + std::to_string(row_line) + ": expected 3 fields, got " +
                              std::to_string(fields.size()));
        const auto sys_it = sys_index.emplace(fields[0], systems.size());
        if (sys_it.second) systems.push_back(fields[0]);
        const auto doc_it = doc_index.emplace(fields[1], docs.size());
        if (doc_it.second) docs.push_back(fields[1]);
        entries.push_back(
            {sys_it.first->second, doc_it.first->second, parse_score(fields[2], row_line)});
        row_line = line;
    }
    if (entries.empty()) throw parse_error("csv: no data rows");

    const std::size_t n = systems.size(), m = docs.size();
    const double unset = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> values(n * m, unset);
    for (const auto& e : entries) {
        double& cell = values[e.system * m + e.doc];
        if (!std::isnan(cell))
            throw parse_error("csv: duplicate entry for (" + systems[e.system] + ", " +
                              docs[e.doc] + ")");
        cell = e.score;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (std::isnan(values[i * m + j]))
                throw parse_error("csv: missing score for (" + systems[i] + ", " + docs[j] + ")");

    return ScoreMatrix::make(std::move(systems), std::move(docs), std::move(values),
                             std::move(label));
}

inline ScoreMatrix parse_json_table(std::string_view text, std::string fallback_label) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("json: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("label") || !doc.contains("systems") ||
        !doc.contains("docs") || !doc.contains("scores"))
        throw parse_error("json: expected an object with label/systems/docs/scores");
    if (!doc["label"].is_string() || !doc["systems"].is_array() || !doc["docs"].is_array() ||
        !doc["scores"].is_array())
        throw parse_error("json: label must be a string, systems/docs/scores arrays");

    std::vector<std::string> systems, docs;
    for (const auto& s : doc["systems"]) {
        if (!s.is_string()) throw parse_error("json: system ids must be strings");
        systems.push_back(s.get<std::string>());
    }
    for (const auto& d : doc["docs"]) {
        if (!d.is_string()) throw parse_error("json: doc ids must be strings");
        docs.push_back(d.get<std::string>());
    }
    const auto& rows = doc["scores"];
    if (rows.size() != systems.size())
        throw parse_error("json: scores has " + std::to_string(rows.size()) + " rows, expected " +
                          std::to_string(systems.size()));
    std::vector<double> values;
    values.reserve(systems.size() * docs.size());
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != docs.size())
            throw parse_error("json: each scores row must list " + std::to_string(docs.size()) +
                              " numbers");
        for (const auto& v : row) {
            if (!v.is_number()) throw parse_error("json: scores must be numbers");
            values.push_back(v.get<double>());
        }
    }
    std::string label = doc["label"].get<std::string>();
    if (label.empty()) label = std::move(fallback_label);
    return ScoreMatrix::make(std::move(systems), std::move(docs), std::move(values),
                             std::move(label));
}

}  // namespace detail

// Parses the canonical long-format CSV or the JSON object format into a
// validated ScoreMatrix. Row/column order is first-appearance order; the
// (system, doc) coverage must be complete.
inline ScoreMatrix parse_score_table(std::string_view text, TableFormat format,
                                     std::string label = "") {
    switch (format) {
        case TableFormat::csv_long:
            return detail::parse_csv_table(text, std::move(label));
        case TableFormat::json:
            return detail::parse_json_table(text, std::move(label));
    }
    throw input_error("parse_score_table: unknown format");
}

inline std::string serialize_csv(const ScoreMatrix& m) {
    std::string out(detail::kCsvHeader);
    out += '\n';
    for (std::size_t i = 0; i < m.n_systems(); ++i)
        for (std::size_t j = 0; j < m.n_docs(); ++j) {
            out += detail::csv_quote(m.system_ids()[i]);
            out += ',';
            out += detail::csv_quote(m.doc_ids()[j]);
            out += ',';
            out += detail::format_score(m.at(i, j));
            out += '\n';
        }
    return out;
}

inline std::string serialize_json(const ScoreMatrix& m) {
    nlohmann::ordered_json doc;
    doc["label"] = m.label();
    doc["systems"] = m.system_ids();
    doc["docs"] = m.doc_ids();
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < m.n_systems(); ++i) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t j = 0; j < m.n_docs(); ++j) row.push_back(m.at(i, j));
        rows.push_back(std::move(row));
    }
    doc["scores"] = std::move(rows);
    return doc.dump(2) + "\n";
}

}  // namespace metaeval
