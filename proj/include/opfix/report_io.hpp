#pragma once

// Bit-stable output files: CSV with shortest-round-trip floats and a
// deterministic JSON report (no wall-clock fields), so identical inputs give
// hash-identical files.

#include <filesystem>
#include <string>
#include <vector>

#include "opfix/config.hpp"
#include "opfix/montecarlo.hpp"

namespace opfix {

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

std::string format_hex64(std::uint64_t v);

void write_text(const std::filesystem::path& path, const std::string& text);

/// trajectories.csv: columns trial, ell, block, dist, fpr_summand, cum_fpr,
/// beta, mask, sigma. Rows cover the first output.csv_trials trials at
/// iterations 0, stride, 2*stride, ... plus the final one. The step-scoped
/// columns (fpr_summand, mask, sigma) describe the step leaving x^ell and
/// are zero on the final row.
std::string trajectories_csv(const Experiment& exp);

std::string bounds_csv(const std::vector<BoundCurve>& curves);

/// eta.csv: columns ell, block, eta for the configured (zeta, p_i).
std::string eta_csv(const Experiment& exp);

nlohmann::json report_json(const Experiment& exp, const EnsembleStats& stats,
                           const std::vector<BoundCurve>& curves,
                           const std::vector<CoverageRecord>& records);

nlohmann::json audit_json(long num_samples, std::uint64_t seed,
                          const std::vector<ClosureRule>& closure,
                          const std::vector<ClosureRule>& samplers);

}  // namespace opfix
