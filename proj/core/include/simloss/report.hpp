#pragma once

#include <string>

#include "simloss/experiment.hpp"

namespace simloss {

enum class ReportFormat { json, markdown, both };

/// Canonical machine-readable form: top-level `config`, `rows`, `meta`.
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

/// One table row per grid value; best validation values bold, significance
/// marks appended to test values.
std::string report_to_markdown(const ExperimentReport& report);

/// Writes report.json / report.md into `out_dir` (which must exist).
void emit_report(const ExperimentReport& report, const std::string& out_dir,
                 ReportFormat format);

}  // namespace simloss
