// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0
//
// A native 15-row style rule engine over the cell-concatenated source of
// a document. The statement-with-no-effect pair is implemented as one
// detector under the combined id NOEFFECT, so 14 rule ids run in total.
// Notebook-aware mode marks findings as suppressed instead of dropping
// them, so frequency tables can be produced both raw and notebook-aware.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nbstat/builtins.hpp"
#include "nbstat/ingest.hpp"
#include "nbstat/metrics.hpp"
#include "nbstat/pyast.hpp"

namespace nbstat::lint {

enum class RuleCategory { ErrorProneness, CodeStyle, BestPractices };

std::string category_name(RuleCategory c);

struct LintRule {
    std::string rule_id;
    RuleCategory category;
    std::string description;
};

// The full catalog, in category order.
const std::vector<LintRule>& rule_catalog();
const LintRule* find_rule(const std::string& rule_id);

struct FlatSource {
    std::string text;  // code cells joined with single LF, in order
    // flat line (1-based) -> (cell index, cell-local line); entry 0 unused.
    std::vector<std::pair<int, int>> boundary_map;

    int line_count() const { return int(boundary_map.size()) - 1; }
    std::pair<int, int> locate(int flat_line) const { return boundary_map.at(flat_line); }
};

FlatSource flatten(const ingest::CellDocument& doc);

struct LintFinding {
    std::string rule_id;
    int flat_line = 0;
    int cell_index = 0;
    int local_line = 0;
    std::string message;
    std::string symbol;  // offending name, when the rule has one
    bool suppressed = false;
    std::string suppression_reason;  // empty unless suppressed
};

struct RunStats {
    bool flat_parse_ok = true;
    int skipped_ast_rules = 0;  // rules not run because the flat source failed to parse
};

// Runs the full catalog; pass `rules` to keep only a subset of rule ids.
std::vector<LintFinding> run_checks(const FlatSource& flat,
                                    const metrics::BuiltinRegistry& registry,
                                    RunStats* stats = nullptr);
std::vector<LintFinding> run_checks(const FlatSource& flat,
                                    const std::vector<LintRule>& rules,
                                    const metrics::BuiltinRegistry& registry,
                                    RunStats* stats = nullptr);

// Notebook-aware pass: suppresses cell-tail display expressions and
// undefined-name findings whose name is bound in a later cell. Scripts
// pass through unchanged.
std::vector<LintFinding> apply_notebook_context(
    std::vector<LintFinding> findings, const FlatSource& flat,
    const ingest::CellDocument& doc,
    const std::vector<std::set<std::string>>& names_bound_by_cell);

struct ErrorRates {
    int total = 0;                    // unsuppressed findings
    std::optional<double> per_line;   // absent when SLOC is 0
};

ErrorRates error_rates(const std::vector<LintFinding>& findings, int document_sloc);
ErrorRates error_rates(const std::vector<LintFinding>& findings,
                       const metrics::DocumentMetrics& doc_metrics);

// `path:cell:line rule_id message [suppressed:reason]`
std::string format_finding(const std::string& path, const LintFinding& f);

}  // namespace nbstat::lint
