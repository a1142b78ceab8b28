// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0
//
// Two-table result store (documents, cells) plus a findings table,
// persisted as newline-delimited JSON record files under one directory.
// Upserts are idempotent by doc_id; re-running an analysis replaces the
// prior rows for that document. Single writer, concurrent readers.

#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nbstat/ingest.hpp"
#include "nbstat/lint.hpp"
#include "nbstat/metrics.hpp"

namespace nbstat::store {

struct DocumentRecord {
    std::string doc_id;
    std::string origin_path;
    ingest::DocKind kind = ingest::DocKind::Script;
    std::string language_tag;
    long long byte_size = 0;
    metrics::DocumentMetrics metrics;
    int error_total = 0;
    std::optional<double> error_per_line;
};

struct CellRecord {
    std::string doc_id;
    int cell_index = 0;
    ingest::CellType cell_type = ingest::CellType::Code;
    int line_count = 0;
    metrics::CellMetricVector metrics;
    std::optional<std::string> source;  // only when source storage is enabled
};

struct FindingRecord {
    std::string doc_id;
    std::string rule_id;
    std::string category;
    int cell_index = 0;
    int local_line = 0;
    bool suppressed = false;
    std::string suppression_reason;
};

enum class StoreErrorKind { IOFailure, ForeignDocMissing, UnknownMetric };

struct StoreError : std::runtime_error {
    StoreErrorKind kind;
    StoreError(StoreErrorKind k, const std::string& msg)
        : std::runtime_error(msg), kind(k) {}
};

class Store {
public:
    // Opens (creating if needed) a store directory and loads its tables.
    explicit Store(std::string directory);

    void put_document(const DocumentRecord& record);
    void put_cells(const std::vector<CellRecord>& records);      // replaces the doc's rows
    void put_findings(const std::vector<FindingRecord>& records);  // replaces the doc's rows

    // Persists all tables; atomic per file (write temp, rename).
    void save() const;

    size_t document_count() const;
    std::vector<DocumentRecord> documents(std::optional<ingest::DocKind> kind = {}) const;
    std::vector<CellRecord> cells_of(const std::string& doc_id) const;
    std::vector<FindingRecord> findings_of(const std::string& doc_id) const;
    std::vector<FindingRecord> all_findings() const;

    // (doc_id, value) pairs ordered by doc_id; absent values skipped.
    std::vector<std::pair<std::string, double>> query_metric(
        const std::string& metric_name, std::optional<ingest::DocKind> kind = {}) const;

    // CSV export with fixed column order, header row, LF endings, reals
    // at 6 significant digits.
    void export_documents_csv(const std::string& path) const;
    void export_cells_csv(const std::string& path) const;
    void export_findings_csv(const std::string& path) const;

    std::string documents_csv() const;
    std::string cells_csv() const;
    std::string findings_csv() const;

private:
    void load();

    std::string dir_;
    std::map<std::string, DocumentRecord> docs_;
    std::map<std::string, std::vector<CellRecord>> cells_;
    std::map<std::string, std::vector<FindingRecord>> findings_;
    mutable std::mutex mutex_;
};

}  // namespace nbstat::store
