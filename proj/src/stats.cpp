// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#include "nbstat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nbstat/util.hpp"

namespace nbstat::stats {

SampleDescriptor describe(const std::vector<double>& values) {
    if (values.empty()) throw StatsError(StatsErrorKind::EmptySample, "empty sample");
    SampleDescriptor d;
    d.n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    d.mean = sum / double(d.n);
    if (d.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - d.mean) * (v - d.mean);
        d.sd = std::sqrt(ss / double(d.n - 1));
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    size_t mid = d.n / 2;
    d.median = (d.n % 2 == 1) ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
    return d;
}

namespace {

// Lanczos approximation (g=7, n=9), |relative error| < 1e-13 on the
// positive real axis.
double log_gamma(double x) {
    static const double coeff[9] = {
        0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
        771.32342877765313,   -176.61502916214059, 12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5) {
        // Reflection formula.
        return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
    }
    x -= 1.0;
    double a = coeff[0];
    double t = x + 7.5;
    for (int i = 1; i < 9; ++i) a += coeff[i] / (x + double(i));
    return 0.5 * std::log(2.0 * M_PI) + (x + 0.5) * std::log(t) - t + std::log(a);
}

// Continued fraction for the regularized incomplete beta function
// (modified Lentz), used for x < (a+1)/(a+b+2).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) +
                      b * std::log(1.0 - x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) return 1.0;
    if (!std::isfinite(t)) return 0.0;
    double x = df / (df + t * t);
    double p = reg_inc_beta(df / 2.0, 0.5, x);
    if (p < 1e-300) p = 0.0;
    if (p > 1.0) p = 1.0;
    return p;
}

TTestResult welch_t(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw StatsError(StatsErrorKind::InsufficientSample,
                         "welch_t needs at least two values per sample");
    SampleDescriptor da = describe(a);
    SampleDescriptor db = describe(b);
    double va = da.sd * da.sd, vb = db.sd * db.sd;
    double na = double(da.n), nb = double(db.n);

    TTestResult r;
    if (va == 0.0 && vb == 0.0) {
        r.degenerate = true;
        if (da.mean == db.mean) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = da.mean > db.mean ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
            r.p = 0.0;
        }
        r.df = na + nb - 2.0;
        r.significant = r.p <= kSignificanceP;
        return r;
    }

    double se2 = va / na + vb / nb;
    r.t = (da.mean - db.mean) / std::sqrt(se2);
    r.df = se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    r.p = student_t_two_sided_p(r.t, r.df);
    r.significant = r.p <= kSignificanceP;
    return r;
}

std::vector<IssueFrequencyRow> issue_frequency(
    const std::vector<std::set<std::string>>& notebooks,
    const std::vector<std::set<std::string>>& scripts,
    const std::vector<std::pair<std::string, std::string>>& all_rules) {
    if (notebooks.empty() || scripts.empty())
        throw StatsError(StatsErrorKind::EmptyCorpus, "issue_frequency needs both corpora");
    std::vector<IssueFrequencyRow> rows;
    for (const auto& [rule_id, category] : all_rules) {
        IssueFrequencyRow row;
        row.rule_id = rule_id;
        row.category = category;
        size_t nb = 0, sc = 0;
        for (const auto& doc : notebooks)
            if (doc.count(rule_id)) ++nb;
        for (const auto& doc : scripts)
            if (doc.count(rule_id)) ++sc;
        row.pct_notebooks = 100.0 * double(nb) / double(notebooks.size());
        row.pct_scripts = 100.0 * double(sc) / double(scripts.size());
        row.mean_pct = (row.pct_notebooks + row.pct_scripts) / 2.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::map<std::string, std::vector<IssueFrequencyRow>> top_k(
    const std::vector<IssueFrequencyRow>& rows, size_t k) {
    std::map<std::string, std::vector<IssueFrequencyRow>> by_category;
    for (const IssueFrequencyRow& r : rows) by_category[r.category].push_back(r);
    for (auto& [cat, list] : by_category) {
        std::sort(list.begin(), list.end(),
                  [](const IssueFrequencyRow& a, const IssueFrequencyRow& b) {
                      if (a.mean_pct != b.mean_pct) return a.mean_pct > b.mean_pct;
                      return a.rule_id < b.rule_id;
                  });
        if (list.size() > k) list.resize(k);
    }
    return by_category;
}

std::vector<size_t> length_subset_indices(const std::vector<double>& sloc_values) {
    if (sloc_values.empty())
        throw StatsError(StatsErrorKind::EmptyCorpus, "length_subset over empty corpus");
    SampleDescriptor d = describe(sloc_values);
    double threshold = d.mean + d.sd;
    std::vector<size_t> kept;
    for (size_t i = 0; i < sloc_values.size(); ++i)
        if (sloc_values[i] < threshold) kept.push_back(i);
    return kept;
}

std::vector<double> normalized_histogram(const std::vector<double>& values, int bins) {
    std::vector<double> counts(size_t(std::max(bins, 1)), 0.0);
    if (values.empty()) return counts;
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    double width = hi - lo;
    for (double v : values) {
        size_t idx = width == 0.0
                         ? 0
                         : std::min(size_t((v - lo) / width * double(bins)), size_t(bins - 1));
        counts[idx] += 1.0;
    }
    double peak = *std::max_element(counts.begin(), counts.end());
    if (peak > 0.0)
        for (double& c : counts) c /= peak;
    return counts;
}

std::string apa_sample(const SampleDescriptor& d) {
    return "M=" + util::format_real(d.mean) + ", SD=" + util::format_real(d.sd);
}

std::string apa_t_test(const TTestResult& r) {
    std::string p_text = r.p < 0.001 ? "p < 0.001" : "p = " + util::format_real(r.p);
    return "t(" + util::format_real(r.df) + ")=" + util::format_real(r.t) + ", " + p_text;
}

}  // namespace nbstat::stats
