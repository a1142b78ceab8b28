// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#include "nbstat/metrics.hpp"

#include <algorithm>

namespace nbstat::metrics {

using pyast::CallSite;
using pyast::ImportBinding;

FunctionCategory classify_call(const CallSite& call, const DocumentContext& ctx) {
    const bool plain = call.shape == CallSite::Shape::PlainName;

    if (plain && ctx.def_names.count(call.full_name)) return FunctionCategory::UserDefined;
    if (plain && ctx.registry && ctx.registry->contains(call.full_name))
        return FunctionCategory::BuiltIn;

    if (plain) {
        for (const ImportBinding& b : ctx.imports)
            if (b.kind == ImportBinding::Kind::FromImport && b.bound_name == call.full_name)
                return FunctionCategory::Api;
        return FunctionCategory::Other;
    }

    // Dotted call: API when the head is a module binding.
    if (!call.head.empty()) {
        for (const ImportBinding& b : ctx.imports)
            if (b.kind == ImportBinding::Kind::ModuleImport && b.bound_name == call.head)
                return FunctionCategory::Api;
    }
    return FunctionCategory::Other;
}

CellMetricVector cell_metrics(const ingest::Cell& cell, const DocumentContext& ctx,
                              const pyast::CellFacts* facts, int preceding_markdown_lines) {
    CellMetricVector v;
    v.line_counts = pyast::classify_lines(cell.source);
    v.extended_comment_loc = v.line_counts.comment + preceding_markdown_lines;
    if (facts == nullptr) return v;  // parse failure: lexical fields only

    v.parse_ok = true;
    std::set<std::string> builtin_names, user_names, api_names;
    for (const CallSite& call : facts->calls) {
        switch (classify_call(call, ctx)) {
            case FunctionCategory::BuiltIn:
                ++v.builtin_count;
                builtin_names.insert(call.full_name);
                break;
            case FunctionCategory::UserDefined:
                ++v.user_count;
                user_names.insert(call.full_name);
                break;
            case FunctionCategory::Api:
                ++v.api_count;
                api_names.insert(call.full_name);
                break;
            case FunctionCategory::Other: ++v.other_count; break;
        }
    }
    v.builtin_unique = int(builtin_names.size());
    v.user_unique = int(user_names.size());
    v.api_unique = int(api_names.size());

    v.cyclomatic = 1 + facts->decision_count;

    for (const pyast::FunctionDefInfo& def : facts->defs) {
        v.npavg_numerator += def.param_count;
        ++v.npavg_denominator;
    }

    // Variables: anything read or bound, except definition names and
    // call heads (the fact walker already excludes heads from reads).
    for (const std::string& n : facts->names_read)
        if (!facts->def_class_names.count(n)) v.variables_used.insert(n);
    for (const std::string& n : facts->names_bound)
        if (!facts->def_class_names.count(n)) v.variables_used.insert(n);

    return v;
}

namespace {

template <typename Sets>
double mean_pairwise_intersection(const Sets& sets) {
    size_t n = sets.size();
    if (n < 2) return 0.0;
    long long total = 0;
    long long pairs = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            std::vector<std::string> common;
            std::set_intersection(sets[i]->begin(), sets[i]->end(), sets[j]->begin(),
                                  sets[j]->end(), std::back_inserter(common));
            total += (long long)(common.size());
            ++pairs;
        }
    }
    return double(total) / double(pairs);
}

std::optional<double> norm(long long raw, int sloc) {
    if (sloc == 0) return std::nullopt;
    return double(raw) / double(sloc);
}

}  // namespace

double function_coupling(const std::vector<pyast::FunctionDefInfo>& defs) {
    std::vector<const std::set<std::string>*> sets;
    sets.reserve(defs.size());
    for (const auto& d : defs) sets.push_back(&d.calls_inside);
    return mean_pairwise_intersection(sets);
}

double cell_coupling(const std::vector<CellMetricVector>& cells) {
    std::vector<const std::set<std::string>*> sets;
    for (const auto& c : cells)
        if (c.parse_ok) sets.push_back(&c.variables_used);
    return mean_pairwise_intersection(sets);
}

DocumentMetrics aggregate(const std::vector<CellMetricVector>& per_cell,
                          const ingest::CellDocument& doc,
                          const std::vector<pyast::FunctionDefInfo>& all_defs) {
    DocumentMetrics m;
    long long npavg_num = 0, npavg_den = 0;

    for (const CellMetricVector& v : per_cell) {
        // Line metrics cover every code cell, parse failures included.
        m.sloc += v.line_counts.sloc;
        m.comment_loc += v.line_counts.comment;
        m.extended_comment_loc += v.extended_comment_loc;
        m.blank_loc += v.line_counts.blank;

        if (!v.parse_ok) {
            ++m.failed_cells;
            continue;
        }
        ++m.analyzed_cells;
        m.builtin_unique += v.builtin_unique;
        m.builtin_count += v.builtin_count;
        m.user_unique += v.user_unique;
        m.user_count += v.user_count;
        m.api_unique += v.api_unique;
        m.api_count += v.api_count;
        m.other_count += v.other_count;
        if (v.cyclomatic) {
            double c = double(*v.cyclomatic);
            m.cyclomatic = m.cyclomatic ? std::max(*m.cyclomatic, c) : c;
        }
        npavg_num += v.npavg_numerator;
        npavg_den += v.npavg_denominator;
    }

    if (npavg_den > 0) m.npavg = double(npavg_num) / double(npavg_den);
    m.function_coupling = function_coupling(all_defs);
    if (doc.kind == ingest::DocKind::Notebook) m.cell_coupling = cell_coupling(per_cell);

    m.comment_loc_norm = norm(m.comment_loc, m.sloc);
    m.extended_comment_loc_norm = norm(m.extended_comment_loc, m.sloc);
    m.blank_loc_norm = norm(m.blank_loc, m.sloc);
    m.builtin_unique_norm = norm(m.builtin_unique, m.sloc);
    m.builtin_count_norm = norm(m.builtin_count, m.sloc);
    m.user_unique_norm = norm(m.user_unique, m.sloc);
    m.user_count_norm = norm(m.user_count, m.sloc);
    m.api_unique_norm = norm(m.api_unique, m.sloc);
    m.api_count_norm = norm(m.api_count, m.sloc);
    m.other_count_norm = norm(m.other_count, m.sloc);
    return m;
}

MetricLookup metric_by_name(const DocumentMetrics& m, const std::string& name) {
    auto present = [](double v) { return MetricLookup{true, v}; };
    auto opt = [](const std::optional<double>& v) { return MetricLookup{true, v}; };

    if (name == "sloc") return present(m.sloc);
    if (name == "comment_loc") return present(m.comment_loc);
    if (name == "extended_comment_loc") return present(m.extended_comment_loc);
    if (name == "blank_loc") return present(m.blank_loc);
    if (name == "builtin_unique") return present(m.builtin_unique);
    if (name == "builtin_count") return present(m.builtin_count);
    if (name == "user_unique") return present(m.user_unique);
    if (name == "user_count") return present(m.user_count);
    if (name == "api_unique") return present(m.api_unique);
    if (name == "api_count") return present(m.api_count);
    if (name == "other_count") return present(m.other_count);
    if (name == "cyclomatic") return opt(m.cyclomatic);
    if (name == "function_coupling") return present(m.function_coupling);
    if (name == "cell_coupling") return opt(m.cell_coupling);
    if (name == "npavg") return opt(m.npavg);
    if (name == "comment_loc_norm") return opt(m.comment_loc_norm);
    if (name == "extended_comment_loc_norm") return opt(m.extended_comment_loc_norm);
    if (name == "blank_loc_norm") return opt(m.blank_loc_norm);
    if (name == "builtin_unique_norm") return opt(m.builtin_unique_norm);
    if (name == "builtin_count_norm") return opt(m.builtin_count_norm);
    if (name == "user_unique_norm") return opt(m.user_unique_norm);
    if (name == "user_count_norm") return opt(m.user_count_norm);
    if (name == "api_unique_norm") return opt(m.api_unique_norm);
    if (name == "api_count_norm") return opt(m.api_count_norm);
    if (name == "other_count_norm") return opt(m.other_count_norm);
    if (name == "analyzed_cells") return present(m.analyzed_cells);
    if (name == "failed_cells") return present(m.failed_cells);
    return {};
}

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {
        "sloc", "comment_loc", "extended_comment_loc", "blank_loc",
        "builtin_unique", "builtin_count", "user_unique", "user_count",
        "api_unique", "api_count", "other_count", "cyclomatic",
        "function_coupling", "cell_coupling", "npavg",
        "comment_loc_norm", "extended_comment_loc_norm", "blank_loc_norm",
        "builtin_unique_norm", "builtin_count_norm", "user_unique_norm",
        "user_count_norm", "api_unique_norm", "api_count_norm",
        "other_count_norm", "analyzed_cells", "failed_cells",
    };
    return names;
}

}  // namespace nbstat::metrics
