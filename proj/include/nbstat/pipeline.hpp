// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end orchestration: file discovery, data-parallel per-document
// analysis with an ordered merge into the single-writer store, and the
// notebook-vs-script comparison. Worker count has no effect on output;
// results are merged in (doc_id, path) order.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nbstat/ingest.hpp"
#include "nbstat/lint.hpp"
#include "nbstat/stats.hpp"
#include "nbstat/store.hpp"

namespace nbstat::pipeline {

struct RunConfig {
    std::vector<std::string> notebook_roots;
    std::vector<std::string> script_roots;
    std::vector<std::string> include_globs;
    std::vector<std::string> exclude_globs;
    int workers = 1;
    bool notebook_aware = false;
    std::string store_path;
    std::optional<size_t> sample_size;
    bool subset_filter = false;
    bool store_source = false;
    uint64_t seed = 0;  // sampling PRNG (std::mt19937_64)
};

enum class PipelineErrorKind { NoInputs, StoreUnwritable, InsufficientCorpus };

struct PipelineError : std::runtime_error {
    PipelineErrorKind kind;
    PipelineError(PipelineErrorKind k, const std::string& msg)
        : std::runtime_error(msg), kind(k) {}
};

struct DocumentAnalysis {
    store::DocumentRecord document;
    std::vector<store::CellRecord> cells;
    std::vector<store::FindingRecord> finding_records;
    std::vector<lint::LintFinding> findings;  // full findings, for text reports
};

// Pure per-document analysis: ingest -> per-cell metrics -> aggregate ->
// lint (with optional notebook-aware suppression).
DocumentAnalysis analyze_document(std::string_view bytes, const std::string& path,
                                  ingest::DocKind kind, bool notebook_aware,
                                  bool keep_source);

struct FileTask {
    std::string path;
    ingest::DocKind kind;
};

// Sorted walk of the configured roots; __init__.py and setup.py are
// skipped, include/exclude globs applied to the path.
std::vector<FileTask> discover_files(const RunConfig& config);

struct RunSummary {
    size_t documents = 0;
    size_t skipped_language = 0;  // declared language is not Python
    size_t failures = 0;          // per-file failures, never fatal
    size_t cells_failed = 0;
    double elapsed_seconds = 0.0;
    std::vector<std::string> failure_messages;
};

RunSummary analyze(const RunConfig& config, store::Store& store);

struct MetricComparison {
    std::string metric;
    std::optional<stats::SampleDescriptor> notebooks;
    std::optional<stats::SampleDescriptor> scripts;
    std::optional<stats::TTestResult> ttest;
};

struct ComparisonReport {
    size_t notebooks_total = 0, scripts_total = 0;  // in the store
    size_t notebooks_used = 0, scripts_used = 0;    // after sampling and filtering
    bool subset_filter = false;
    std::optional<size_t> sample_size;
    uint64_t seed = 0;
    bool sample_clamped = false;  // requested sample exceeded the corpus
    bool include_suppressed = false;
    std::vector<MetricComparison> metrics;
    std::vector<stats::IssueFrequencyRow> issue_rows;
    std::map<std::string, std::vector<stats::IssueFrequencyRow>> top5;
};

// Metrics included in reports; notebook-only rows carry no t-test.
const std::vector<std::string>& compared_metrics();

ComparisonReport compare(const RunConfig& config, const store::Store& store,
                         bool include_suppressed = false);

}  // namespace nbstat::pipeline
