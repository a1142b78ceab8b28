// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#include "nbstat/store.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nbstat/util.hpp"

namespace nbstat::store {

namespace fs = std::filesystem;
using nlohmann::json;
using util::csv_escape;
using util::csv_real;
using util::format_real;

namespace {

const char* kind_name(ingest::DocKind k) {
    return k == ingest::DocKind::Notebook ? "notebook" : "script";
}
const char* cell_type_name(ingest::CellType t) {
    switch (t) {
        case ingest::CellType::Code: return "code";
        case ingest::CellType::Markdown: return "markdown";
        case ingest::CellType::Raw: return "raw";
    }
    return "raw";
}
ingest::DocKind kind_from(const std::string& s) {
    return s == "notebook" ? ingest::DocKind::Notebook : ingest::DocKind::Script;
}
ingest::CellType cell_type_from(const std::string& s) {
    if (s == "code") return ingest::CellType::Code;
    if (s == "markdown") return ingest::CellType::Markdown;
    return ingest::CellType::Raw;
}

void put_opt(json& j, const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
}
std::optional<double> get_opt(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

json to_json(const DocumentRecord& r) {
    const metrics::DocumentMetrics& m = r.metrics;
    json j{{"doc_id", r.doc_id},
           {"origin_path", r.origin_path},
           {"kind", kind_name(r.kind)},
           {"language_tag", r.language_tag},
           {"byte_size", r.byte_size},
           {"sloc", m.sloc},
           {"comment_loc", m.comment_loc},
           {"extended_comment_loc", m.extended_comment_loc},
           {"blank_loc", m.blank_loc},
           {"builtin_unique", m.builtin_unique},
           {"builtin_count", m.builtin_count},
           {"user_unique", m.user_unique},
           {"user_count", m.user_count},
           {"api_unique", m.api_unique},
           {"api_count", m.api_count},
           {"other_count", m.other_count},
           {"function_coupling", m.function_coupling},
           {"analyzed_cells", m.analyzed_cells},
           {"failed_cells", m.failed_cells},
           {"error_total", r.error_total}};
    put_opt(j, "cyclomatic", m.cyclomatic);
    put_opt(j, "cell_coupling", m.cell_coupling);
    put_opt(j, "npavg", m.npavg);
    put_opt(j, "comment_loc_norm", m.comment_loc_norm);
    put_opt(j, "extended_comment_loc_norm", m.extended_comment_loc_norm);
    put_opt(j, "blank_loc_norm", m.blank_loc_norm);
    put_opt(j, "builtin_unique_norm", m.builtin_unique_norm);
    put_opt(j, "builtin_count_norm", m.builtin_count_norm);
    put_opt(j, "user_unique_norm", m.user_unique_norm);
    put_opt(j, "user_count_norm", m.user_count_norm);
    put_opt(j, "api_unique_norm", m.api_unique_norm);
    put_opt(j, "api_count_norm", m.api_count_norm);
    put_opt(j, "other_count_norm", m.other_count_norm);
    put_opt(j, "error_per_line", r.error_per_line);
    return j;
}

DocumentRecord doc_from_json(const json& j) {
    DocumentRecord r;
    r.doc_id = j.at("doc_id").get<std::string>();
    r.origin_path = j.value("origin_path", "");
    r.kind = kind_from(j.value("kind", "script"));
    r.language_tag = j.value("language_tag", "");
    r.byte_size = j.value("byte_size", 0LL);
    metrics::DocumentMetrics& m = r.metrics;
    m.sloc = j.value("sloc", 0);
    m.comment_loc = j.value("comment_loc", 0);
    m.extended_comment_loc = j.value("extended_comment_loc", 0);
    m.blank_loc = j.value("blank_loc", 0);
    m.builtin_unique = j.value("builtin_unique", 0);
    m.builtin_count = j.value("builtin_count", 0);
    m.user_unique = j.value("user_unique", 0);
    m.user_count = j.value("user_count", 0);
    m.api_unique = j.value("api_unique", 0);
    m.api_count = j.value("api_count", 0);
    m.other_count = j.value("other_count", 0);
    m.function_coupling = j.value("function_coupling", 0.0);
    m.analyzed_cells = j.value("analyzed_cells", 0);
    m.failed_cells = j.value("failed_cells", 0);
    m.cyclomatic = get_opt(j, "cyclomatic");
    m.cell_coupling = get_opt(j, "cell_coupling");
    m.npavg = get_opt(j, "npavg");
    m.comment_loc_norm = get_opt(j, "comment_loc_norm");
    m.extended_comment_loc_norm = get_opt(j, "extended_comment_loc_norm");
    m.blank_loc_norm = get_opt(j, "blank_loc_norm");
    m.builtin_unique_norm = get_opt(j, "builtin_unique_norm");
    m.builtin_count_norm = get_opt(j, "builtin_count_norm");
    m.user_unique_norm = get_opt(j, "user_unique_norm");
    m.user_count_norm = get_opt(j, "user_count_norm");
    m.api_unique_norm = get_opt(j, "api_unique_norm");
    m.api_count_norm = get_opt(j, "api_count_norm");
    m.other_count_norm = get_opt(j, "other_count_norm");
    r.error_total = j.value("error_total", 0);
    r.error_per_line = get_opt(j, "error_per_line");
    return r;
}

json to_json(const CellRecord& r) {
    const metrics::CellMetricVector& v = r.metrics;
    json j{{"doc_id", r.doc_id},
           {"cell_index", r.cell_index},
           {"cell_type", cell_type_name(r.cell_type)},
           {"line_count", r.line_count},
           {"sloc", v.line_counts.sloc},
           {"blank", v.line_counts.blank},
           {"comment", v.line_counts.comment},
           {"extended_comment_loc", v.extended_comment_loc},
           {"builtin_unique", v.builtin_unique},
           {"builtin_count", v.builtin_count},
           {"user_unique", v.user_unique},
           {"user_count", v.user_count},
           {"api_unique", v.api_unique},
           {"api_count", v.api_count},
           {"other_count", v.other_count},
           {"npavg_numerator", v.npavg_numerator},
           {"npavg_denominator", v.npavg_denominator},
           {"parse_ok", v.parse_ok}};
    if (v.cyclomatic) j["cyclomatic"] = *v.cyclomatic;
    if (r.source) j["source"] = *r.source;
    return j;
}

CellRecord cell_from_json(const json& j) {
    CellRecord r;
    r.doc_id = j.at("doc_id").get<std::string>();
    r.cell_index = j.value("cell_index", 0);
    r.cell_type = cell_type_from(j.value("cell_type", "code"));
    r.line_count = j.value("line_count", 0);
    metrics::CellMetricVector& v = r.metrics;
    v.line_counts.sloc = j.value("sloc", 0);
    v.line_counts.blank = j.value("blank", 0);
    v.line_counts.comment = j.value("comment", 0);
    v.extended_comment_loc = j.value("extended_comment_loc", 0);
    v.builtin_unique = j.value("builtin_unique", 0);
    v.builtin_count = j.value("builtin_count", 0);
    v.user_unique = j.value("user_unique", 0);
    v.user_count = j.value("user_count", 0);
    v.api_unique = j.value("api_unique", 0);
    v.api_count = j.value("api_count", 0);
    v.other_count = j.value("other_count", 0);
    v.npavg_numerator = j.value("npavg_numerator", 0);
    v.npavg_denominator = j.value("npavg_denominator", 0);
    v.parse_ok = j.value("parse_ok", false);
    if (j.contains("cyclomatic")) v.cyclomatic = j["cyclomatic"].get<int>();
    if (j.contains("source")) r.source = j["source"].get<std::string>();
    return r;
}

json to_json(const FindingRecord& r) {
    return json{{"doc_id", r.doc_id},
                {"rule_id", r.rule_id},
                {"category", r.category},
                {"cell_index", r.cell_index},
                {"local_line", r.local_line},
                {"suppressed", r.suppressed},
                {"suppression_reason", r.suppression_reason}};
}

FindingRecord finding_from_json(const json& j) {
    FindingRecord r;
    r.doc_id = j.at("doc_id").get<std::string>();
    r.rule_id = j.value("rule_id", "");
    r.category = j.value("category", "");
    r.cell_index = j.value("cell_index", 0);
    r.local_line = j.value("local_line", 0);
    r.suppressed = j.value("suppressed", false);
    r.suppression_reason = j.value("suppression_reason", "");
    return r;
}

void write_atomically(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StoreError(StoreErrorKind::IOFailure, "cannot write " + tmp);
        out << content;
        if (!out) throw StoreError(StoreErrorKind::IOFailure, "write failed: " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw StoreError(StoreErrorKind::IOFailure, "rename failed: " + path);
}

}  // namespace

Store::Store(std::string directory) : dir_(std::move(directory)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw StoreError(StoreErrorKind::IOFailure, "cannot create " + dir_);
    load();
}

void Store::load() {
    auto load_table = [&](const char* file, auto parse_row) {
        std::ifstream in(dir_ + "/" + file);
        if (!in) return;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            parse_row(json::parse(line));
        }
    };
    load_table("documents.jsonl", [&](const json& j) {
        DocumentRecord r = doc_from_json(j);
        docs_[r.doc_id] = std::move(r);
    });
    load_table("cells.jsonl", [&](const json& j) {
        CellRecord r = cell_from_json(j);
        cells_[r.doc_id].push_back(std::move(r));
    });
    load_table("findings.jsonl", [&](const json& j) {
        FindingRecord r = finding_from_json(j);
        findings_[r.doc_id].push_back(std::move(r));
    });
}

void Store::put_document(const DocumentRecord& record) {
    std::lock_guard lock(mutex_);
    docs_[record.doc_id] = record;  // last write wins
}

void Store::put_cells(const std::vector<CellRecord>& records) {
    std::lock_guard lock(mutex_);
    for (const CellRecord& r : records)
        if (!docs_.count(r.doc_id))
            throw StoreError(StoreErrorKind::ForeignDocMissing,
                             "cells for unknown document " + r.doc_id);
    std::map<std::string, std::vector<CellRecord>> grouped;
    for (const CellRecord& r : records) grouped[r.doc_id].push_back(r);
    for (auto& [doc_id, rows] : grouped) cells_[doc_id] = std::move(rows);
}

void Store::put_findings(const std::vector<FindingRecord>& records) {
    std::lock_guard lock(mutex_);
    for (const FindingRecord& r : records)
        if (!docs_.count(r.doc_id))
            throw StoreError(StoreErrorKind::ForeignDocMissing,
                             "findings for unknown document " + r.doc_id);
    std::map<std::string, std::vector<FindingRecord>> grouped;
    for (const FindingRecord& r : records) grouped[r.doc_id].push_back(r);
    for (auto& [doc_id, rows] : grouped) findings_[doc_id] = std::move(rows);
}

void Store::save() const {
    std::lock_guard lock(mutex_);
    std::string docs, cells, findings;
    for (const auto& [id, r] : docs_) docs += to_json(r).dump() + "\n";
    for (const auto& [id, rows] : cells_)
        for (const CellRecord& r : rows) cells += to_json(r).dump() + "\n";
    for (const auto& [id, rows] : findings_)
        for (const FindingRecord& r : rows) findings += to_json(r).dump() + "\n";
    write_atomically(dir_ + "/documents.jsonl", docs);
    write_atomically(dir_ + "/cells.jsonl", cells);
    write_atomically(dir_ + "/findings.jsonl", findings);
}

size_t Store::document_count() const {
    std::lock_guard lock(mutex_);
    return docs_.size();
}

std::vector<DocumentRecord> Store::documents(std::optional<ingest::DocKind> kind) const {
    std::lock_guard lock(mutex_);
    std::vector<DocumentRecord> out;
    for (const auto& [id, r] : docs_)
        if (!kind || r.kind == *kind) out.push_back(r);
    return out;  // map order == doc_id order
}

std::vector<CellRecord> Store::cells_of(const std::string& doc_id) const {
    std::lock_guard lock(mutex_);
    auto it = cells_.find(doc_id);
    return it == cells_.end() ? std::vector<CellRecord>{} : it->second;
}

std::vector<FindingRecord> Store::findings_of(const std::string& doc_id) const {
    std::lock_guard lock(mutex_);
    auto it = findings_.find(doc_id);
    return it == findings_.end() ? std::vector<FindingRecord>{} : it->second;
}

std::vector<FindingRecord> Store::all_findings() const {
    std::lock_guard lock(mutex_);
    std::vector<FindingRecord> out;
    for (const auto& [id, rows] : findings_) out.insert(out.end(), rows.begin(), rows.end());
    return out;
}

std::vector<std::pair<std::string, double>> Store::query_metric(
    const std::string& metric_name, std::optional<ingest::DocKind> kind) const {
    std::lock_guard lock(mutex_);
    bool known = metric_name == "error_total" || metric_name == "error_per_line";
    if (!known) {
        const auto& names = metrics::metric_names();
        known = std::find(names.begin(), names.end(), metric_name) != names.end();
    }
    if (!known)
        throw StoreError(StoreErrorKind::UnknownMetric, "unknown metric: " + metric_name);

    std::vector<std::pair<std::string, double>> out;
    for (const auto& [id, r] : docs_) {
        if (kind && r.kind != *kind) continue;
        std::optional<double> value;
        if (metric_name == "error_total") value = double(r.error_total);
        else if (metric_name == "error_per_line") value = r.error_per_line;
        else value = metrics::metric_by_name(r.metrics, metric_name).value;
        if (value) out.emplace_back(id, *value);
    }
    return out;
}

namespace {

const char* kDocColumns =
    "doc_id,origin_path,kind,language_tag,byte_size,analyzed_cells,failed_cells,"
    "sloc,comment_loc,extended_comment_loc,blank_loc,builtin_unique,builtin_count,"
    "user_unique,user_count,api_unique,api_count,other_count,cyclomatic,"
    "function_coupling,cell_coupling,npavg,comment_loc_norm,extended_comment_loc_norm,"
    "blank_loc_norm,builtin_unique_norm,builtin_count_norm,user_unique_norm,"
    "user_count_norm,api_unique_norm,api_count_norm,other_count_norm,"
    "error_total,error_per_line";

}  // namespace

std::string Store::documents_csv() const {
    std::lock_guard lock(mutex_);
    std::string out = std::string(kDocColumns) + "\n";
    for (const auto& [id, r] : docs_) {
        const metrics::DocumentMetrics& m = r.metrics;
        out += csv_escape(r.doc_id) + "," + csv_escape(r.origin_path) + "," +
               kind_name(r.kind) + "," + csv_escape(r.language_tag) + "," +
               std::to_string(r.byte_size) + "," + std::to_string(m.analyzed_cells) + "," +
               std::to_string(m.failed_cells) + "," + std::to_string(m.sloc) + "," +
               std::to_string(m.comment_loc) + "," + std::to_string(m.extended_comment_loc) +
               "," + std::to_string(m.blank_loc) + "," + std::to_string(m.builtin_unique) +
               "," + std::to_string(m.builtin_count) + "," + std::to_string(m.user_unique) +
               "," + std::to_string(m.user_count) + "," + std::to_string(m.api_unique) + "," +
               std::to_string(m.api_count) + "," + std::to_string(m.other_count) + "," +
               csv_real(m.cyclomatic) + "," + format_real(m.function_coupling) + "," +
               csv_real(m.cell_coupling) + "," + csv_real(m.npavg) + "," +
               csv_real(m.comment_loc_norm) + "," + csv_real(m.extended_comment_loc_norm) +
               "," + csv_real(m.blank_loc_norm) + "," + csv_real(m.builtin_unique_norm) +
               "," + csv_real(m.builtin_count_norm) + "," + csv_real(m.user_unique_norm) +
               "," + csv_real(m.user_count_norm) + "," + csv_real(m.api_unique_norm) + "," +
               csv_real(m.api_count_norm) + "," + csv_real(m.other_count_norm) + "," +
               std::to_string(r.error_total) + "," + csv_real(r.error_per_line) + "\n";
    }
    return out;
}

std::string Store::cells_csv() const {
    std::lock_guard lock(mutex_);
    std::string out =
        "doc_id,cell_index,cell_type,line_count,sloc,blank,comment,extended_comment_loc,"
        "builtin_unique,builtin_count,user_unique,user_count,api_unique,api_count,"
        "other_count,cyclomatic,npavg_numerator,npavg_denominator,parse_ok,source\n";
    for (const auto& [id, rows] : cells_) {
        for (const CellRecord& r : rows) {
            const metrics::CellMetricVector& v = r.metrics;
            out += csv_escape(r.doc_id) + "," + std::to_string(r.cell_index) + "," +
                   cell_type_name(r.cell_type) + "," + std::to_string(r.line_count) + "," +
                   std::to_string(v.line_counts.sloc) + "," +
                   std::to_string(v.line_counts.blank) + "," +
                   std::to_string(v.line_counts.comment) + "," +
                   std::to_string(v.extended_comment_loc) + "," +
                   std::to_string(v.builtin_unique) + "," + std::to_string(v.builtin_count) +
                   "," + std::to_string(v.user_unique) + "," + std::to_string(v.user_count) +
                   "," + std::to_string(v.api_unique) + "," + std::to_string(v.api_count) +
                   "," + std::to_string(v.other_count) + "," +
                   (v.cyclomatic ? std::to_string(*v.cyclomatic) : std::string()) + "," +
                   std::to_string(v.npavg_numerator) + "," +
                   std::to_string(v.npavg_denominator) + "," +
                   (v.parse_ok ? "true" : "false") + "," +
                   (r.source ? csv_escape(*r.source) : std::string()) + "\n";
        }
    }
    return out;
}

std::string Store::findings_csv() const {
    std::lock_guard lock(mutex_);
    std::string out = "doc_id,rule_id,category,cell_index,local_line,suppressed,"
                      "suppression_reason\n";
    for (const auto& [id, rows] : findings_) {
        for (const FindingRecord& r : rows) {
            out += csv_escape(r.doc_id) + "," + csv_escape(r.rule_id) + "," +
                   csv_escape(r.category) + "," + std::to_string(r.cell_index) + "," +
                   std::to_string(r.local_line) + "," + (r.suppressed ? "true" : "false") +
                   "," + csv_escape(r.suppression_reason) + "\n";
        }
    }
    return out;
}

void Store::export_documents_csv(const std::string& path) const {
    write_atomically(path, documents_csv());
}
void Store::export_cells_csv(const std::string& path) const {
    write_atomically(path, cells_csv());
}
void Store::export_findings_csv(const std::string& path) const {
    write_atomically(path, findings_csv());
}

}  // namespace nbstat::store
