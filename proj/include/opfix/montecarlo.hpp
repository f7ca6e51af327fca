#pragma once

// Trial ensembles and the statistical certification of bound curves.
//
// Coverage is checked pointwise on a sparse iteration grid (every 10th
// iteration plus {1, L}) with a Hoeffding union-bound slack
// sqrt(log(2 G / alpha) / (2 M)) at harness level alpha = 0.01, so a failed
// check means the curve is wrong, not that the sampler got unlucky.

#include <cstdint>
#include <string>
#include <vector>

#include "opfix/bounds.hpp"

namespace opfix {

/// Iterations at which ensembles store per-trial metric values. Step
/// metrics (cumulative FPR, raw residual) end at horizon - 1.
std::vector<long> checked_grid(long horizon, CurveMetric metric);

struct EnsembleStats {
    long trials = 0;
    long horizon = 0;
    int num_blocks = 0;

    std::vector<long> dist_grid;  // checked iterations for distance metrics
    std::vector<long> fpr_grid;   // checked iterations for step metrics

    // Per-trial samples at the checked iterations, laid out as
    // (grid_index * num_blocks + block) * trials + trial.
    std::vector<double> dist_samples;
    std::vector<double> fpr_samples;       // cumulative FPR
    std::vector<double> residual_samples;  // unmasked ||(I - T) x^ell||^2

    std::vector<double> mean_dist;  // (horizon + 1) x blocks, mean over trials
    std::vector<double> mean_fpr;   // horizon x blocks

    long clamp_events = 0;
    std::uint64_t digest = 0;  // FNV-1a over every aggregate buffer

    double dist_sample(std::size_t g, int block, long trial) const {
        return dist_samples[sample_index(g, block, trial)];
    }
    double fpr_sample(std::size_t g, int block, long trial) const {
        return fpr_samples[sample_index(g, block, trial)];
    }
    double residual_sample(std::size_t g, int block, long trial) const {
        return residual_samples[sample_index(g, block, trial)];
    }
    double mean_dist_at(long ell, int block) const {
        return mean_dist[static_cast<std::size_t>(ell) * static_cast<std::size_t>(num_blocks) +
                         static_cast<std::size_t>(block)];
    }
    double mean_fpr_at(long ell, int block) const {
        return mean_fpr[static_cast<std::size_t>(ell) * static_cast<std::size_t>(num_blocks) +
                        static_cast<std::size_t>(block)];
    }
    std::size_t sample_index(std::size_t g, int block, long trial) const {
        return (g * static_cast<std::size_t>(num_blocks) + static_cast<std::size_t>(block)) *
                   static_cast<std::size_t>(trials) +
               static_cast<std::size_t>(trial);
    }
};

/// Runs num_trials trajectories with per-trial seeds base_seed + t.
/// Deterministic given (config, num_trials, base_seed); aggregation follows
/// trial order regardless of scheduling.
EnsembleStats run_ensemble(const IterationConfig& config, long num_trials,
                           std::uint64_t base_seed);

struct CoverageRecord {
    Proposition proposition = Proposition::mean_contractive;
    int block = 0;
    std::optional<double> delta;
    CurveCheck kind = CurveCheck::coverage;
    std::vector<long> grid;
    // Per-grid-point statistic: coverage fraction for hp/sanov checks,
    // empirical mean for mean checks, tail-window mean for tail checks.
    std::vector<double> observed;
    std::vector<double> required;  // the statistic must stay on the right side
    double slack = 0.0;
    bool passed = false;
    double worst_margin = 0.0;  // min over grid of (observed satisfying side)
    long worst_ell = 0;
};

/// Certifies one curve against the ensemble. Throws std::invalid_argument
/// when the curve's horizon or block does not fit the ensemble.
CoverageRecord check_coverage(const EnsembleStats& stats, const BoundCurve& curve);

/// Lower sample quantile (nearest-rank) of a copy of `values`.
double sample_quantile(std::vector<double> values, double level);

struct ClosureRule {
    std::string name;
    double theta = 0.0;  // composed envelope parameters being audited
    double nu = 0.0;
    double max_ratio = 0.0;
    double worst_k = 1.0;
    double limit = 1.05;  // acceptance threshold for max_ratio
    bool expect_violation = false;
    bool passed = false;  // behaved as expected (violation iff expected)
};

/// Samples each sub-Weibull closure rule at the given sample count and
/// audits the composed variable against the composed envelope on the moment
/// grid k = 1, 1.5, ..., 8.
std::vector<ClosureRule> closure_audit(long num_samples, std::uint64_t seed);

/// Audits every built-in noise family's declared envelope.
std::vector<ClosureRule> sampler_audit(long num_samples, std::uint64_t seed);

}  // namespace opfix
