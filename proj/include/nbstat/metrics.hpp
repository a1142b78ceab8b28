// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0
//
// The 15 per-cell structural metrics, the four-way function taxonomy,
// and document-level aggregation. Classification context (imports and
// definition names) is document-wide because notebooks import in one
// cell and call in another.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nbstat/builtins.hpp"
#include "nbstat/ingest.hpp"
#include "nbstat/pyast.hpp"

namespace nbstat::metrics {

enum class FunctionCategory { BuiltIn, UserDefined, Api, Other };

struct DocumentContext {
    std::vector<pyast::ImportBinding> imports;  // all cells
    std::set<std::string> def_names;            // all cells
    const BuiltinRegistry* registry = nullptr;
};

// Precedence: UserDefined > BuiltIn > Api > Other.
FunctionCategory classify_call(const pyast::CallSite& call, const DocumentContext& ctx);

struct CellMetricVector {
    pyast::LineCounts line_counts;
    int extended_comment_loc = 0;
    int builtin_unique = 0, builtin_count = 0;
    int user_unique = 0, user_count = 0;
    int api_unique = 0, api_count = 0;
    int other_count = 0;
    std::optional<int> cyclomatic;  // absent on parse failure
    int npavg_numerator = 0;        // sum of declared parameter counts
    int npavg_denominator = 0;      // number of defs
    std::set<std::string> variables_used;
    bool parse_ok = false;
};

// Per-cell computation; `facts` is absent when the cell failed to parse,
// in which case only the lexical fields are filled.
CellMetricVector cell_metrics(const ingest::Cell& cell, const DocumentContext& ctx,
                              const pyast::CellFacts* facts, int preceding_markdown_lines);

// Mean pairwise |calls_inside_i ∩ calls_inside_j| over unordered pairs;
// 0 when fewer than two defs.
double function_coupling(const std::vector<pyast::FunctionDefInfo>& defs);

// Mean pairwise |variables_used_i ∩ variables_used_j| over the parse-ok
// cells of a notebook; 0 when fewer than two eligible cells.
double cell_coupling(const std::vector<CellMetricVector>& cells);

struct DocumentMetrics {
    int sloc = 0;
    int comment_loc = 0;
    int extended_comment_loc = 0;  // equals comment_loc for scripts
    int blank_loc = 0;
    int builtin_unique = 0, builtin_count = 0;
    int user_unique = 0, user_count = 0;
    int api_unique = 0, api_count = 0;
    int other_count = 0;
    std::optional<double> cyclomatic;   // max over parse-ok cells
    double function_coupling = 0.0;
    std::optional<double> cell_coupling;  // notebooks only
    std::optional<double> npavg;

    // Normalized variants (per document SLOC); absent when SLOC is 0.
    std::optional<double> comment_loc_norm;
    std::optional<double> extended_comment_loc_norm;
    std::optional<double> blank_loc_norm;
    std::optional<double> builtin_unique_norm, builtin_count_norm;
    std::optional<double> user_unique_norm, user_count_norm;
    std::optional<double> api_unique_norm, api_count_norm;
    std::optional<double> other_count_norm;

    int analyzed_cells = 0;  // code cells that parsed
    int failed_cells = 0;    // code cells that did not
};

// `per_cell` has one entry per Code cell of `doc`, in cell order.
DocumentMetrics aggregate(const std::vector<CellMetricVector>& per_cell,
                          const ingest::CellDocument& doc,
                          const std::vector<pyast::FunctionDefInfo>& all_defs);

// Named access for the store/stats layers; nullopt when the metric is
// absent for this document. Unknown names are reported via the bool.
struct MetricLookup {
    bool known = false;
    std::optional<double> value;
};
MetricLookup metric_by_name(const DocumentMetrics& m, const std::string& name);

const std::vector<std::string>& metric_names();  // all queryable names

}  // namespace nbstat::metrics
