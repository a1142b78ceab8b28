// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "nbstat/pipeline.hpp"

namespace nbstat::report {

// Human-readable comparison: descriptive stats with APA-style inline
// summaries plus per-category top-5 issue tables (larger side starred).
std::string comparison_text(const pipeline::ComparisonReport& report);

// Machine-readable forms.
std::string comparison_metrics_csv(const pipeline::ComparisonReport& report);
std::string comparison_issues_csv(const pipeline::ComparisonReport& report);

}  // namespace nbstat::report
