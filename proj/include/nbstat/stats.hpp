// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0
//
// Descriptive statistics, Welch's unequal-variance two-sample t-test
// with Welch–Satterthwaite degrees of freedom, issue-frequency tables,
// and the top-k-by-mean-frequency selection. Significance is decided at
// p <= 0.001; the configured alpha is echoed in reports only.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace nbstat::stats {

enum class StatsErrorKind { EmptySample, InsufficientSample, EmptyCorpus };

struct StatsError : std::runtime_error {
    StatsErrorKind kind;
    StatsError(StatsErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct SampleDescriptor {
    size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;      // sample standard deviation (n-1); 0 when n == 1
    double median = 0.0;  // midpoint average for even n
};

SampleDescriptor describe(const std::vector<double>& values);

struct TTestResult {
    double t = 0.0;
    double df = 0.0;  // Welch–Satterthwaite, real-valued
    double p = 1.0;   // two-sided
    bool significant = false;  // p <= 0.001
    bool degenerate = false;   // both variances zero
};

constexpr double kSignificanceP = 0.001;
constexpr double kConfiguredAlpha = 0.005;  // echoed, not operative

TTestResult welch_t(const std::vector<double>& a, const std::vector<double>& b);

// Two-sided tail probability of Student's t distribution, via the
// regularized incomplete beta function (relative accuracy ~1e-10).
double student_t_two_sided_p(double t, double df);

struct IssueFrequencyRow {
    std::string rule_id;
    std::string category;
    double pct_notebooks = 0.0;  // percent of documents with >= 1 occurrence
    double pct_scripts = 0.0;
    double mean_pct = 0.0;
};

// `notebooks` / `scripts`: per document, the set of rule ids present
// (already filtered for suppression upstream). `all_rules` fixes the
// rows; rules that never occur get zeros.
std::vector<IssueFrequencyRow> issue_frequency(
    const std::vector<std::set<std::string>>& notebooks,
    const std::vector<std::set<std::string>>& scripts,
    const std::vector<std::pair<std::string, std::string>>& all_rules);

// Within each category: mean_pct descending, rule_id ascending on ties,
// first k rows.
std::map<std::string, std::vector<IssueFrequencyRow>> top_k(
    const std::vector<IssueFrequencyRow>& rows, size_t k = 5);

// Keeps values strictly below MEAN + STD of the given corpus.
std::vector<size_t> length_subset_indices(const std::vector<double>& sloc_values);

// Histogram bin counts normalized to the largest bin (1.0).
std::vector<double> normalized_histogram(const std::vector<double>& values, int bins);

// "M=…, SD=…" / "t(df)=…, p …" inline summaries.
std::string apa_sample(const SampleDescriptor& d);
std::string apa_t_test(const TTestResult& r);

}  // namespace nbstat::stats
