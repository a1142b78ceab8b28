// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#include "nbstat/report.hpp"

#include <map>

#include "nbstat/util.hpp"

namespace nbstat::report {

using pipeline::ComparisonReport;
using pipeline::MetricComparison;
using util::format_real;

std::string comparison_text(const ComparisonReport& report) {
    std::string out;
    out += "corpus: " + std::to_string(report.notebooks_used) + " notebooks, " +
           std::to_string(report.scripts_used) + " scripts";
    if (report.sample_size)
        out += " (sample_size=" + std::to_string(*report.sample_size) +
               ", seed=" + std::to_string(report.seed) + ")";
    if (report.subset_filter) out += " [length subset: sloc < mean + sd]";
    out += "\n";
    out += "significance: p <= " + format_real(stats::kSignificanceP) +
           " (alpha=" + format_real(stats::kConfiguredAlpha) + " configured)\n\n";

    out += "== metrics ==\n";
    for (const MetricComparison& mc : report.metrics) {
        out += mc.metric + ": ";
        if (mc.notebooks) out += "notebooks " + stats::apa_sample(*mc.notebooks) + "; ";
        if (mc.scripts) out += "scripts " + stats::apa_sample(*mc.scripts) + "; ";
        if (mc.ttest) {
            out += stats::apa_t_test(*mc.ttest);
            out += mc.ttest->significant ? " [significant]" : " [n.s.]";
        } else {
            out += "(no test)";
        }
        out += "\n";
    }

    out += "\n== top issues per category ==\n";
    for (const auto& [category, rows] : report.top5) {
        out += "-- " + category + " --\n";
        for (const auto& row : rows) {
            const lint::LintRule* rule = lint::find_rule(row.rule_id);
            std::string nb = format_real(row.pct_notebooks) + "%";
            std::string sc = format_real(row.pct_scripts) + "%";
            if (row.pct_notebooks > row.pct_scripts) nb += "*";
            else if (row.pct_scripts > row.pct_notebooks) sc += "*";
            out += row.rule_id + "  " + (rule ? rule->description : "") +
                   "  notebooks " + nb + "  scripts " + sc + "\n";
        }
    }
    return out;
}

std::string comparison_metrics_csv(const ComparisonReport& report) {
    std::string out =
        "metric,n_notebooks,mean_notebooks,sd_notebooks,median_notebooks,"
        "n_scripts,mean_scripts,sd_scripts,median_scripts,t,df,p,significant\n";
    for (const MetricComparison& mc : report.metrics) {
        out += mc.metric + ",";
        if (mc.notebooks)
            out += std::to_string(mc.notebooks->n) + "," + format_real(mc.notebooks->mean) +
                   "," + format_real(mc.notebooks->sd) + "," +
                   format_real(mc.notebooks->median) + ",";
        else
            out += ",,,,";
        if (mc.scripts)
            out += std::to_string(mc.scripts->n) + "," + format_real(mc.scripts->mean) + "," +
                   format_real(mc.scripts->sd) + "," + format_real(mc.scripts->median) + ",";
        else
            out += ",,,,";
        if (mc.ttest)
            out += format_real(mc.ttest->t) + "," + format_real(mc.ttest->df) + "," +
                   format_real(mc.ttest->p) + "," + (mc.ttest->significant ? "true" : "false");
        else
            out += ",,,";
        out += "\n";
    }
    return out;
}

std::string comparison_issues_csv(const ComparisonReport& report) {
    // Rank within category when the row made the top-5 table.
    std::map<std::string, int> rank;
    for (const auto& [category, rows] : report.top5)
        for (size_t i = 0; i < rows.size(); ++i) rank[rows[i].rule_id] = int(i) + 1;

    std::string out = "rule_id,category,pct_notebooks,pct_scripts,mean_pct,top5_rank\n";
    for (const auto& row : report.issue_rows) {
        auto it = rank.find(row.rule_id);
        out += row.rule_id + "," + row.category + "," + format_real(row.pct_notebooks) +
               "," + format_real(row.pct_scripts) + "," + format_real(row.mean_pct) + "," +
               (it == rank.end() ? std::string() : std::to_string(it->second)) + "\n";
    }
    return out;
}

}  // namespace nbstat::report
