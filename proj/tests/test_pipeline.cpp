// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nbstat/pipeline.hpp"
#include "nbstat/report.hpp"

using namespace nbstat;
namespace fs = std::filesystem;
using pipeline::RunConfig;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const char* tag) {
        path = fs::temp_directory_path() / (std::string("nbstat_pipe_") + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    void write(const std::string& rel, const std::string& content) const {
        fs::path p = path / rel;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        out << content;
    }
};

std::string one_cell_notebook(const std::string& code) {
    nlohmann::json cell = {{"cell_type", "code"}, {"source", code}};
    nlohmann::json nb = {{"nbformat", 4},
                         {"metadata", {{"kernelspec", {{"language", "python"}}}}},
                         {"cells", nlohmann::json::array({cell})}};
    return nb.dump();
}

}  // namespace

TEST_CASE("analyze_document end to end for a script") {
    std::string code = "import os\n\n\ndef main(path):\n    return os.stat(path)\n";
    auto analysis =
        pipeline::analyze_document(code, "tool.py", ingest::DocKind::Script, false, false);
    CHECK(analysis.document.kind == ingest::DocKind::Script);
    CHECK(analysis.document.metrics.sloc == 3);
    CHECK(analysis.document.metrics.blank_loc == 2);
    CHECK(analysis.document.metrics.analyzed_cells == 1);
    CHECK_FALSE(analysis.document.metrics.cell_coupling.has_value());
    REQUIRE(analysis.cells.size() == 1);
    CHECK_FALSE(analysis.cells[0].source.has_value());  // keep_source off
}

TEST_CASE("analyze_document keeps source only when asked") {
    auto with = pipeline::analyze_document("x = 1\n", "k.py", ingest::DocKind::Script,
                                           false, true);
    REQUIRE(with.cells[0].source.has_value());
    CHECK(*with.cells[0].source == "x = 1\n");
}

TEST_CASE("discover_files walks, filters, and sorts") {
    TempDir dir("discover");
    dir.write("pkg/a.py", "x = 1\n");
    dir.write("pkg/__init__.py", "\n");
    dir.write("pkg/setup.py", "\n");
    dir.write("pkg/deep/b.py", "y = 2\n");
    dir.write("nb/c.ipynb", one_cell_notebook("z = 3\n"));
    dir.write("nb/skip.txt", "not code");

    RunConfig config;
    config.script_roots = {(dir.path / "pkg").string()};
    config.notebook_roots = {(dir.path / "nb").string()};
    auto tasks = pipeline::discover_files(config);
    REQUIRE(tasks.size() == 3);  // a.py, deep/b.py, c.ipynb
    CHECK(tasks[0].path < tasks[1].path);

    config.exclude_globs = {"*deep*"};
    CHECK(pipeline::discover_files(config).size() == 2);
    config.exclude_globs.clear();
    config.include_globs = {"*.ipynb"};
    CHECK(pipeline::discover_files(config).size() == 1);

    RunConfig missing;
    missing.script_roots = {(dir.path / "no_such").string()};
    CHECK_THROWS_AS(pipeline::discover_files(missing), pipeline::PipelineError);
}

TEST_CASE("analyze handles empty, mixed, and corrupt inputs") {
    TempDir dir("analyze");
    fs::create_directories(dir.path / "empty");
    RunConfig config;
    config.script_roots = {(dir.path / "empty").string()};
    config.store_path = (dir.path / "store_empty").string();

    store::Store store_empty(config.store_path);
    auto summary = pipeline::analyze(config, store_empty);
    CHECK(summary.documents == 0);
    CHECK(summary.failures == 0);

    // One notebook + one script -> two records.
    dir.write("corpus/a.py", "a = 1\n");
    dir.write("corpus/b.ipynb", one_cell_notebook("b = 2\n"));
    RunConfig both;
    both.script_roots = {(dir.path / "corpus").string()};
    both.notebook_roots = {(dir.path / "corpus").string()};
    both.store_path = (dir.path / "store_both").string();
    store::Store store_both(both.store_path);
    summary = pipeline::analyze(both, store_both);
    CHECK(summary.documents == 2);
    CHECK(store_both.document_count() == 2);

    // A corrupt notebook among good files is logged, not fatal.
    dir.write("corpus/broken.ipynb", "{this is not json");
    store::Store store_corrupt((dir.path / "store_corrupt").string());
    both.store_path = (dir.path / "store_corrupt").string();
    summary = pipeline::analyze(both, store_corrupt);
    CHECK(summary.documents == 2);
    CHECK(summary.failures == 1);
    REQUIRE(summary.failure_messages.size() == 1);
    CHECK(summary.failure_messages[0].find("broken.ipynb") != std::string::npos);

    // Non-python notebooks are skipped, not failed.
    nlohmann::json r_nb = {{"nbformat", 4},
                           {"metadata", {{"kernelspec", {{"language", "R"}}}}},
                           {"cells", nlohmann::json::array()}};
    dir.write("corpus/stats.ipynb", r_nb.dump());
    store::Store store_lang((dir.path / "store_lang").string());
    both.store_path = (dir.path / "store_lang").string();
    summary = pipeline::analyze(both, store_lang);
    CHECK(summary.documents == 2);
    CHECK(summary.skipped_language == 1);
}

TEST_CASE("worker count never changes the exported bytes") {
    TempDir dir("workers");
    for (int i = 0; i < 40; ++i) {
        std::string code = "import os\nv" + std::to_string(i) + " = " + std::to_string(i) +
                           "\nprint(os.name, v" + std::to_string(i) + ")\n";
        if (i % 2 == 0) dir.write("c/s" + std::to_string(i) + ".py", code);
        else dir.write("c/n" + std::to_string(i) + ".ipynb", one_cell_notebook(code));
    }
    auto run_with = [&](int workers, const char* tag) {
        RunConfig config;
        config.script_roots = {(dir.path / "c").string()};
        config.notebook_roots = {(dir.path / "c").string()};
        config.workers = workers;
        config.store_path = (dir.path / tag).string();
        store::Store store(config.store_path);
        pipeline::analyze(config, store);
        return store.documents_csv() + store.cells_csv() + store.findings_csv();
    };
    CHECK(run_with(1, "w1") == run_with(4, "w4"));
}

TEST_CASE("compare requires two documents of each kind") {
    TempDir dir("insufficient");
    dir.write("c/a.py", "x = 1\n");
    RunConfig config;
    config.script_roots = {(dir.path / "c").string()};
    config.store_path = (dir.path / "store").string();
    store::Store store(config.store_path);
    pipeline::analyze(config, store);
    CHECK_THROWS_AS(pipeline::compare(config, store), pipeline::PipelineError);
}

TEST_CASE("identical corpora give t=0 p=1 on every tested metric") {
    TempDir dir("identical");
    for (int i = 0; i < 6; ++i) {
        std::string code;
        for (int k = 0; k <= i; ++k)
            code += "value_" + std::to_string(k) + " = " + std::to_string(k * i) + "\n";
        code += "print(value_0)\n";
        dir.write("c/s" + std::to_string(i) + ".py", code);
        dir.write("c/n" + std::to_string(i) + ".ipynb", one_cell_notebook(code));
    }
    RunConfig config;
    config.script_roots = {(dir.path / "c").string()};
    config.notebook_roots = {(dir.path / "c").string()};
    config.store_path = (dir.path / "store").string();
    store::Store store(config.store_path);
    pipeline::analyze(config, store);

    auto report = pipeline::compare(config, store);
    for (const auto& mc : report.metrics) {
        if (!mc.ttest) continue;
        CHECK(mc.ttest->t == doctest::Approx(0.0));
        CHECK(mc.ttest->p == doctest::Approx(1.0));
    }
}

TEST_CASE("a constructed sloc shift is detected as significant") {
    TempDir dir("shift");
    // Scripts ~5 lines, notebooks ~55 lines, 12 documents per side.
    for (int i = 0; i < 12; ++i) {
        std::string small, large;
        for (int k = 0; k < 5 + (i % 3); ++k)
            small += "s" + std::to_string(k) + " = " + std::to_string(k + i) + "\n";
        for (int k = 0; k < 55 + (i % 3); ++k)
            large += "n" + std::to_string(k) + " = " + std::to_string(k + i) + "\n";
        dir.write("c/s" + std::to_string(i) + ".py", small);
        dir.write("c/n" + std::to_string(i) + ".ipynb", one_cell_notebook(large));
    }
    RunConfig config;
    config.script_roots = {(dir.path / "c").string()};
    config.notebook_roots = {(dir.path / "c").string()};
    config.store_path = (dir.path / "store").string();
    store::Store store(config.store_path);
    pipeline::analyze(config, store);

    auto report = pipeline::compare(config, store);
    bool found = false;
    for (const auto& mc : report.metrics) {
        if (mc.metric != "sloc") continue;
        found = true;
        REQUIRE(mc.ttest.has_value());
        CHECK(mc.ttest->significant);
        CHECK(mc.ttest->t > 0.0);  // notebooks minus scripts
        CHECK(mc.notebooks->mean > mc.scripts->mean);
    }
    CHECK(found);
}

TEST_CASE("sampling is reproducible and clamped with a warning flag") {
    TempDir dir("sampling");
    for (int i = 0; i < 10; ++i) {
        std::string code = "x" + std::to_string(i) + " = " + std::to_string(i) + "\n";
        dir.write("c/s" + std::to_string(i) + ".py", code + "y = 1\n");
        dir.write("c/n" + std::to_string(i) + ".ipynb",
                  one_cell_notebook(code + "z = 2\n"));
    }
    RunConfig config;
    config.script_roots = {(dir.path / "c").string()};
    config.notebook_roots = {(dir.path / "c").string()};
    config.store_path = (dir.path / "store").string();
    store::Store store(config.store_path);
    pipeline::analyze(config, store);

    config.sample_size = 4;
    config.seed = 7;
    auto a = pipeline::compare(config, store);
    auto b = pipeline::compare(config, store);
    CHECK(a.notebooks_used == 4);
    CHECK(a.scripts_used == 4);
    CHECK(report::comparison_metrics_csv(a) == report::comparison_metrics_csv(b));

    config.seed = 8;
    auto c = pipeline::compare(config, store);
    CHECK(c.notebooks_used == 4);  // same size, possibly different members

    config.sample_size = 1000;
    auto clamped = pipeline::compare(config, store);
    CHECK(clamped.sample_clamped);
    CHECK(clamped.notebooks_used == 10);
}

TEST_CASE("subset filter applies the strict mean+sd rule per corpus") {
    TempDir dir("subset");
    // Three small scripts and one huge outlier; same for notebooks.
    std::vector<int> sizes = {2, 3, 4, 80};
    for (size_t i = 0; i < sizes.size(); ++i) {
        std::string code;
        for (int k = 0; k < sizes[i]; ++k)
            code += "v" + std::to_string(k) + " = " + std::to_string(k) + "\n";
        dir.write("c/s" + std::to_string(i) + ".py", code);
        dir.write("c/n" + std::to_string(i) + ".ipynb", one_cell_notebook(code));
    }
    RunConfig config;
    config.script_roots = {(dir.path / "c").string()};
    config.notebook_roots = {(dir.path / "c").string()};
    config.store_path = (dir.path / "store").string();
    store::Store store(config.store_path);
    pipeline::analyze(config, store);

    config.subset_filter = true;
    auto report = pipeline::compare(config, store);
    CHECK(report.scripts_used == 3);    // the outlier is dropped
    CHECK(report.notebooks_used == 3);
}

TEST_CASE("comparison report renders text and csv forms") {
    TempDir dir("render");
    for (int i = 0; i < 3; ++i) {
        std::string code = "import os\nv" + std::to_string(i) + " = " + std::to_string(i) +
                           "\nprint(os.sep)\n";
        dir.write("c/s" + std::to_string(i) + ".py", code);
        dir.write("c/n" + std::to_string(i) + ".ipynb", one_cell_notebook(code));
    }
    RunConfig config;
    config.script_roots = {(dir.path / "c").string()};
    config.notebook_roots = {(dir.path / "c").string()};
    config.store_path = (dir.path / "store").string();
    store::Store store(config.store_path);
    pipeline::analyze(config, store);
    auto report = pipeline::compare(config, store);

    std::string text = report::comparison_text(report);
    CHECK(text.find("== metrics ==") != std::string::npos);
    CHECK(text.find("sloc") != std::string::npos);
    CHECK(text.find("top issues per category") != std::string::npos);

    std::string metrics_csv = report::comparison_metrics_csv(report);
    CHECK(metrics_csv.rfind("metric,", 0) == 0);
    std::string issues_csv = report::comparison_issues_csv(report);
    CHECK(issues_csv.rfind("rule_id,", 0) == 0);
    // Every catalog rule appears in the issues table.
    for (const auto& rule : lint::rule_catalog())
        CHECK(issues_csv.find(rule.rule_id) != std::string::npos);
}
