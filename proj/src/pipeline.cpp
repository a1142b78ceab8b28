// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#include "nbstat/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "nbstat/metrics.hpp"
#include "nbstat/util.hpp"

namespace nbstat::pipeline {

namespace fs = std::filesystem;

using ingest::CellDocument;
using ingest::CellType;
using ingest::DocKind;

DocumentAnalysis analyze_document(std::string_view bytes, const std::string& path,
                                  DocKind kind, bool notebook_aware, bool keep_source) {
    CellDocument doc = kind == DocKind::Notebook ? ingest::parse_notebook(bytes, path)
                                                 : ingest::parse_script(bytes, path);

    // Per-cell parses; facts are kept for parse-ok code cells.
    std::vector<std::optional<pyast::CellFacts>> facts(doc.cells.size());
    for (const ingest::Cell& cell : doc.cells) {
        if (cell.cell_type != CellType::Code) continue;
        pyast::ParseResult parsed = pyast::parse_cell(cell.source);
        if (parsed.ok()) facts[cell.index] = pyast::extract_facts(*parsed.tree);
    }

    // Document-wide classification context. Calls of locally defined
    // classes count as user-defined usages, so class names join the set.
    metrics::DocumentContext ctx;
    ctx.registry = &metrics::BuiltinRegistry::standard();
    std::vector<pyast::FunctionDefInfo> all_defs;
    for (const auto& f : facts) {
        if (!f) continue;
        ctx.imports.insert(ctx.imports.end(), f->imports.begin(), f->imports.end());
        ctx.def_names.insert(f->def_class_names.begin(), f->def_class_names.end());
        for (const auto& def : f->defs) all_defs.push_back(def);
    }

    // Per-cell metrics with the contiguous preceding-Markdown attribution.
    std::vector<metrics::CellMetricVector> per_code_cell;
    int markdown_run = 0;
    for (const ingest::Cell& cell : doc.cells) {
        if (cell.cell_type == CellType::Markdown) {
            markdown_run += cell.line_count;
            continue;
        }
        if (cell.cell_type == CellType::Raw) {
            markdown_run = 0;
            continue;
        }
        const pyast::CellFacts* f = facts[cell.index] ? &*facts[cell.index] : nullptr;
        per_code_cell.push_back(metrics::cell_metrics(cell, ctx, f, markdown_run));
        markdown_run = 0;
    }

    metrics::DocumentMetrics doc_metrics = metrics::aggregate(per_code_cell, doc, all_defs);

    // Lint over the flattened source.
    lint::FlatSource flat = lint::flatten(doc);
    std::vector<lint::LintFinding> findings =
        lint::run_checks(flat, metrics::BuiltinRegistry::standard());
    if (notebook_aware && doc.kind == DocKind::Notebook) {
        std::vector<std::set<std::string>> bound_by_cell(doc.cells.size());
        for (size_t i = 0; i < facts.size(); ++i)
            if (facts[i]) bound_by_cell[i] = facts[i]->top_level_bound;
        findings = lint::apply_notebook_context(std::move(findings), flat, doc, bound_by_cell);
    }
    lint::ErrorRates rates = lint::error_rates(findings, doc_metrics.sloc);

    DocumentAnalysis result;
    result.document.doc_id = doc.doc_id;
    result.document.origin_path = doc.origin_path;
    result.document.kind = doc.kind;
    result.document.language_tag = doc.language_tag;
    result.document.byte_size = doc.byte_size;
    result.document.metrics = doc_metrics;
    result.document.error_total = rates.total;
    result.document.error_per_line = rates.per_line;

    size_t code_seen = 0;
    for (const ingest::Cell& cell : doc.cells) {
        store::CellRecord rec;
        rec.doc_id = doc.doc_id;
        rec.cell_index = cell.index;
        rec.cell_type = cell.cell_type;
        rec.line_count = cell.line_count;
        if (cell.cell_type == CellType::Code) rec.metrics = per_code_cell[code_seen++];
        if (keep_source) rec.source = cell.source;
        result.cells.push_back(std::move(rec));
    }

    for (const lint::LintFinding& f : findings) {
        store::FindingRecord rec;
        rec.doc_id = doc.doc_id;
        rec.rule_id = f.rule_id;
        const lint::LintRule* rule = lint::find_rule(f.rule_id);
        rec.category = rule ? lint::category_name(rule->category) : "";
        rec.cell_index = f.cell_index;
        rec.local_line = f.local_line;
        rec.suppressed = f.suppressed;
        rec.suppression_reason = f.suppression_reason;
        result.finding_records.push_back(std::move(rec));
    }
    result.findings = std::move(findings);
    return result;
}

namespace {

bool matches_globs(const std::string& path, const RunConfig& config) {
    if (!config.include_globs.empty()) {
        bool any = false;
        for (const std::string& g : config.include_globs)
            if (util::glob_match(g, path)) { any = true; break; }
        if (!any) return false;
    }
    for (const std::string& g : config.exclude_globs)
        if (util::glob_match(g, path)) return false;
    return true;
}

void walk_root(const std::string& root, const char* extension, DocKind kind,
               const RunConfig& config, std::vector<FileTask>& out) {
    if (!fs::exists(root))
        throw PipelineError(PipelineErrorKind::NoInputs, "input root not found: " + root);
    if (fs::is_regular_file(root)) {
        out.push_back({root, kind});
        return;
    }
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        const fs::path& p = entry.path();
        if (p.extension() != extension) continue;
        std::string filename = p.filename().string();
        if (filename == "__init__.py" || filename == "setup.py") continue;
        std::string path = p.string();
        if (!matches_globs(path, config)) continue;
        out.push_back({std::move(path), kind});
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace

std::vector<FileTask> discover_files(const RunConfig& config) {
    std::vector<FileTask> tasks;
    for (const std::string& root : config.notebook_roots)
        walk_root(root, ".ipynb", DocKind::Notebook, config, tasks);
    for (const std::string& root : config.script_roots)
        walk_root(root, ".py", DocKind::Script, config, tasks);
    std::sort(tasks.begin(), tasks.end(),
              [](const FileTask& a, const FileTask& b) { return a.path < b.path; });
    return tasks;
}

RunSummary analyze(const RunConfig& config, store::Store& store) {
    auto start = std::chrono::steady_clock::now();
    std::vector<FileTask> tasks = discover_files(config);

    struct Slot {
        std::optional<DocumentAnalysis> result;
        std::string error;
        bool skipped = false;
    };
    std::vector<Slot> slots(tasks.size());
    std::atomic<size_t> next{0};

    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            Slot& slot = slots[i];
            try {
                std::string bytes = read_file(tasks[i].path);
                if (tasks[i].kind == DocKind::Notebook) {
                    CellDocument probe = ingest::parse_notebook(bytes, tasks[i].path);
                    if (!ingest::is_analyzable(probe)) {
                        slot.skipped = true;
                        continue;
                    }
                }
                slot.result = analyze_document(bytes, tasks[i].path, tasks[i].kind,
                                               config.notebook_aware, config.store_source);
            } catch (const std::exception& e) {
                slot.error = tasks[i].path + ": " + e.what();
            }
        }
    };

    int n_workers = std::max(1, config.workers);
    std::vector<std::thread> pool;
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    // Deterministic merge: (doc_id, path) order, so the store contents do
    // not depend on worker scheduling.
    std::vector<size_t> order;
    for (size_t i = 0; i < slots.size(); ++i)
        if (slots[i].result) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const auto& da = slots[a].result->document;
        const auto& db = slots[b].result->document;
        if (da.doc_id != db.doc_id) return da.doc_id < db.doc_id;
        return da.origin_path < db.origin_path;
    });

    RunSummary summary;
    for (size_t i : order) {
        DocumentAnalysis& r = *slots[i].result;
        store.put_document(r.document);
        store.put_cells(r.cells);
        store.put_findings(r.finding_records);
        ++summary.documents;
        summary.cells_failed += size_t(r.document.metrics.failed_cells);
    }
    for (const Slot& slot : slots) {
        if (slot.skipped) ++summary.skipped_language;
        if (!slot.error.empty()) {
            ++summary.failures;
            summary.failure_messages.push_back(slot.error);
        }
    }
    store.save();

    summary.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return summary;
}

const std::vector<std::string>& compared_metrics() {
    static const std::vector<std::string> names = {
        "sloc",
        "comment_loc_norm",
        "extended_comment_loc_norm",
        "blank_loc_norm",
        "builtin_unique_norm",
        "builtin_count_norm",
        "user_unique_norm",
        "user_count_norm",
        "api_unique_norm",
        "api_count_norm",
        "other_count_norm",
        "cyclomatic",
        "function_coupling",
        "cell_coupling",
        "npavg",
        "error_total",
        "error_per_line",
    };
    return names;
}

namespace {

// Deterministic sample without replacement (partial Fisher-Yates over the
// doc_id-ordered corpus, std::mt19937_64).
std::vector<store::DocumentRecord> sample_corpus(std::vector<store::DocumentRecord> docs,
                                                 size_t size, std::mt19937_64& rng) {
    if (size >= docs.size()) return docs;
    for (size_t i = 0; i < size; ++i) {
        std::uniform_int_distribution<size_t> dist(i, docs.size() - 1);
        std::swap(docs[i], docs[dist(rng)]);
    }
    docs.resize(size);
    std::sort(docs.begin(), docs.end(),
              [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
    return docs;
}

std::vector<store::DocumentRecord> subset_by_length(
    const std::vector<store::DocumentRecord>& docs) {
    std::vector<double> sloc;
    sloc.reserve(docs.size());
    for (const auto& d : docs) sloc.push_back(double(d.metrics.sloc));
    std::vector<store::DocumentRecord> kept;
    for (size_t i : stats::length_subset_indices(sloc)) kept.push_back(docs[i]);
    return kept;
}

std::vector<double> metric_values(const std::vector<store::DocumentRecord>& docs,
                                  const std::string& name) {
    std::vector<double> out;
    for (const auto& d : docs) {
        std::optional<double> v;
        if (name == "error_total") v = double(d.error_total);
        else if (name == "error_per_line") v = d.error_per_line;
        else v = metrics::metric_by_name(d.metrics, name).value;
        if (v) out.push_back(*v);
    }
    return out;
}

}  // namespace

ComparisonReport compare(const RunConfig& config, const store::Store& store,
                         bool include_suppressed) {
    ComparisonReport report;
    report.subset_filter = config.subset_filter;
    report.sample_size = config.sample_size;
    report.seed = config.seed;
    report.include_suppressed = include_suppressed;

    std::vector<store::DocumentRecord> notebooks = store.documents(DocKind::Notebook);
    std::vector<store::DocumentRecord> scripts = store.documents(DocKind::Script);
    report.notebooks_total = notebooks.size();
    report.scripts_total = scripts.size();
    if (notebooks.size() < 2 || scripts.size() < 2)
        throw PipelineError(PipelineErrorKind::InsufficientCorpus,
                            "compare needs at least 2 documents of each kind");

    if (config.sample_size) {
        if (*config.sample_size >= notebooks.size() ||
            *config.sample_size >= scripts.size())
            report.sample_clamped = true;
        std::mt19937_64 rng(config.seed);
        notebooks = sample_corpus(std::move(notebooks), *config.sample_size, rng);
        scripts = sample_corpus(std::move(scripts), *config.sample_size, rng);
    }
    if (config.subset_filter) {
        notebooks = subset_by_length(notebooks);
        scripts = subset_by_length(scripts);
    }
    report.notebooks_used = notebooks.size();
    report.scripts_used = scripts.size();

    for (const std::string& name : compared_metrics()) {
        MetricComparison mc;
        mc.metric = name;
        std::vector<double> nb = metric_values(notebooks, name);
        std::vector<double> sc = metric_values(scripts, name);
        if (!nb.empty()) mc.notebooks = stats::describe(nb);
        if (!sc.empty()) mc.scripts = stats::describe(sc);
        if (nb.size() >= 2 && sc.size() >= 2) mc.ttest = stats::welch_t(nb, sc);
        report.metrics.push_back(std::move(mc));
    }

    // Issue frequency: per document, the set of rule ids present.
    auto rule_sets = [&](const std::vector<store::DocumentRecord>& docs) {
        std::vector<std::set<std::string>> sets;
        sets.reserve(docs.size());
        for (const auto& d : docs) {
            std::set<std::string> present;
            for (const store::FindingRecord& f : store.findings_of(d.doc_id))
                if (include_suppressed || !f.suppressed) present.insert(f.rule_id);
            sets.push_back(std::move(present));
        }
        return sets;
    };
    std::vector<std::pair<std::string, std::string>> all_rules;
    for (const lint::LintRule& r : lint::rule_catalog())
        all_rules.emplace_back(r.rule_id, lint::category_name(r.category));
    report.issue_rows = stats::issue_frequency(rule_sets(notebooks), rule_sets(scripts),
                                               all_rules);
    report.top5 = stats::top_k(report.issue_rows, 5);
    return report;
}

}  // namespace nbstat::pipeline
