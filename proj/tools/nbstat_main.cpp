// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0
//
// nbstat: analyze notebook/script corpora, store per-document metrics
// and lint findings, and emit notebook-vs-script comparison reports.
//
// Exit codes: 0 success (per-file failures are reported, not fatal),
// 1 usage error, 2 environment error (unreadable inputs or store).

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nbstat/pipeline.hpp"
#include "nbstat/report.hpp"
#include "nbstat/util.hpp"

namespace {

constexpr const char* kVersion = "nbstat 1.0.0";

void add_common_inputs(CLI::App* cmd, nbstat::pipeline::RunConfig& config) {
    cmd->add_option("--notebooks", config.notebook_roots,
                    "Notebook roots (directories or .ipynb files)");
    cmd->add_option("--scripts", config.script_roots,
                    "Script roots (directories or .py files)");
    cmd->add_option("--include", config.include_globs, "Only analyze paths matching a glob");
    cmd->add_option("--exclude", config.exclude_globs, "Skip paths matching a glob");
}

int run_analyze(const nbstat::pipeline::RunConfig& config) {
    nbstat::store::Store store(config.store_path);
    nbstat::pipeline::RunSummary summary = nbstat::pipeline::analyze(config, store);
    for (const std::string& msg : summary.failure_messages)
        std::cerr << "failed: " << msg << "\n";
    std::cout << "documents: " << summary.documents << "\n"
              << "skipped (language): " << summary.skipped_language << "\n"
              << "file failures: " << summary.failures << "\n"
              << "cells failed to parse: " << summary.cells_failed << "\n"
              << "elapsed: " << nbstat::util::format_real(summary.elapsed_seconds) << "s\n";
    return 0;
}

int run_compare(const nbstat::pipeline::RunConfig& config, bool include_suppressed,
                const std::string& out_dir, int histogram_bins) {
    nbstat::store::Store store(config.store_path);
    nbstat::pipeline::ComparisonReport report =
        nbstat::pipeline::compare(config, store, include_suppressed);
    if (report.sample_clamped)
        std::cerr << "warning: sample size exceeds corpus, using all documents\n";
    std::cout << nbstat::report::comparison_text(report);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        auto write = [&](const std::string& name, const std::string& content) {
            std::ofstream out(out_dir + "/" + name, std::ios::binary);
            out << content;
        };
        write("comparison_metrics.csv", nbstat::report::comparison_metrics_csv(report));
        write("comparison_issues.csv", nbstat::report::comparison_issues_csv(report));
        if (histogram_bins > 0) {
            std::string csv = "metric,kind,bin,value\n";
            for (const char* kind : {"notebook", "script"}) {
                auto docs = store.documents(std::string(kind) == "notebook"
                                                ? nbstat::ingest::DocKind::Notebook
                                                : nbstat::ingest::DocKind::Script);
                for (const std::string& metric : nbstat::pipeline::compared_metrics()) {
                    std::vector<double> values;
                    for (const auto& d : docs) {
                        std::optional<double> v;
                        if (metric == "error_total") v = double(d.error_total);
                        else if (metric == "error_per_line") v = d.error_per_line;
                        else v = nbstat::metrics::metric_by_name(d.metrics, metric).value;
                        if (v) values.push_back(*v);
                    }
                    auto hist = nbstat::stats::normalized_histogram(values, histogram_bins);
                    for (size_t b = 0; b < hist.size(); ++b)
                        csv += metric + "," + kind + "," + std::to_string(b) + "," +
                               nbstat::util::format_real(hist[b]) + "\n";
                }
            }
            write("histograms.csv", csv);
        }
    }
    return 0;
}

int run_lint(const nbstat::pipeline::RunConfig& config) {
    auto tasks = nbstat::pipeline::discover_files(config);
    int failures = 0;
    for (const auto& task : tasks) {
        try {
            std::ifstream in(task.path, std::ios::binary);
            if (!in) throw std::runtime_error("cannot read file");
            std::string bytes((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
            auto analysis = nbstat::pipeline::analyze_document(
                bytes, task.path, task.kind, config.notebook_aware, false);
            for (const auto& f : analysis.findings)
                std::cout << nbstat::lint::format_finding(task.path, f) << "\n";
        } catch (const std::exception& e) {
            std::cerr << "failed: " << task.path << ": " << e.what() << "\n";
            ++failures;
        }
    }
    if (failures > 0) std::cerr << failures << " file(s) could not be analyzed\n";
    return 0;
}

int run_export(const std::string& store_path, const std::string& out_dir) {
    nbstat::store::Store store(store_path);
    std::filesystem::create_directories(out_dir);
    store.export_documents_csv(out_dir + "/documents.csv");
    store.export_cells_csv(out_dir + "/cells.csv");
    store.export_findings_csv(out_dir + "/findings.csv");
    std::cout << "exported documents.csv, cells.csv, findings.csv to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural metrics and style analysis for notebooks and scripts"};
    app.set_version_flag("--version",
                         std::string(kVersion) + " (builtin registry: " +
                             nbstat::metrics::BuiltinRegistry::standard().language_version() +
                             ")");

    nbstat::pipeline::RunConfig config;

    // Options also honor NBSTAT_* environment overrides.
    CLI::App* analyze = app.add_subcommand("analyze", "Analyze a corpus into a store");
    add_common_inputs(analyze, config);
    analyze->add_option("--store", config.store_path, "Store directory")
        ->envname("NBSTAT_STORE")
        ->required();
    analyze->add_option("--workers", config.workers, "Worker threads")
        ->envname("NBSTAT_WORKERS")
        ->check(CLI::Range(1, 256));
    analyze->add_flag("--notebook-aware", config.notebook_aware,
                      "Mark notebook-explained findings as suppressed");
    analyze->add_flag("--store-source", config.store_source,
                      "Keep cell source text in the store");

    bool include_suppressed = false;
    std::string out_dir;
    int histogram_bins = 0;
    size_t sample_size = 0;
    CLI::App* compare = app.add_subcommand("compare", "Notebook-vs-script comparison report");
    compare->add_option("--store", config.store_path, "Store directory")
        ->envname("NBSTAT_STORE")
        ->required();
    compare->add_option("--sample-size", sample_size,
                        "Sample this many documents per corpus (0 = all)")
        ->envname("NBSTAT_SAMPLE_SIZE");
    compare->add_option("--seed", config.seed, "Sampling seed (std::mt19937_64)")
        ->envname("NBSTAT_SEED");
    compare->add_flag("--subset-filter", config.subset_filter,
                      "Keep only documents with sloc < mean + sd per corpus");
    compare->add_flag("--include-suppressed", include_suppressed,
                      "Count suppressed findings in issue tables");
    compare->add_option("--out-dir", out_dir, "Write CSV reports to this directory");
    compare->add_option("--histogram-bins", histogram_bins,
                        "Also export normalized histograms with this many bins");

    CLI::App* lint_cmd = app.add_subcommand("lint", "Print findings for files");
    add_common_inputs(lint_cmd, config);
    lint_cmd->add_flag("--notebook-aware", config.notebook_aware,
                       "Mark notebook-explained findings as suppressed");

    std::string export_store, export_dir;
    CLI::App* export_cmd = app.add_subcommand("export", "Export store tables to CSV");
    export_cmd->add_option("--store", export_store, "Store directory")->required();
    export_cmd->add_option("--out-dir", export_dir, "Output directory")->required();

    app.require_subcommand(1);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*analyze) return run_analyze(config);
        if (*compare) {
            if (sample_size > 0) config.sample_size = sample_size;
            return run_compare(config, include_suppressed, out_dir, histogram_bins);
        }
        if (*lint_cmd) return run_lint(config);
        if (*export_cmd) return run_export(export_store, export_dir);
    } catch (const nbstat::pipeline::PipelineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nbstat::store::StoreError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
