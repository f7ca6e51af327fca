#pragma once

// The stochastic block-update loop.
//
// One iteration, in order: (1) advance the online operator if drifting,
// (2) draw the update mask, (3) draw additive noise, (4) for every block i
// with mask bit set, replace x_i by T_i x + e_i; unmasked blocks keep their
// value bit-for-bit. All blocks of T read the full pre-update iterate. For
// averaged operators the new iterate is clamped back into the domain box if
// noise pushed it out, and the event is counted.
//
// Masks, noise, and drift draw from three separate streams derived from the
// trajectory seed, so the processes are independent by construction and the
// whole trajectory is reproducible from (config, seed) alone.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "opfix/noise.hpp"
#include "opfix/operators.hpp"

namespace opfix {

enum class MaskCorrelation { independent, fully_coupled };

std::string to_string(MaskCorrelation c);

struct UpdateModel {
    std::vector<double> probabilities;  // p_i in (0, 1] per block
    MaskCorrelation correlation = MaskCorrelation::independent;
};

struct IterationConfig {
    OnlineOperatorSpec op;         // static runs use DriftKind::none
    UpdateModel update;
    std::vector<NoiseSpec> noise;  // one spec per block
    long horizon = 0;              // L; the trajectory holds x^0 .. x^L
    Eigen::VectorXd initial_point;
    std::uint64_t seed = 0;
    long stride = 1;  // keep every stride-th full iterate

    void validate() const;  // throws std::invalid_argument with the reason
};

/// Columnar trajectory record. Distances are indexed by iteration 0..L and
/// block; step quantities (mask, residual summand, sigma) by step 0..L-1.
struct Trajectory {
    int num_blocks = 0;
    long horizon = 0;

    std::vector<double> dist;         // (L+1) x n: ||x_i^ell - x_i^{*,ell}||
    std::vector<std::uint8_t> mask;   // L x n: u_i^ell
    std::vector<double> fpr_summand;  // L x n: u_i^ell ||(I - T^{ell+1})_i x^ell||^2
    std::vector<double> raw_residual_sq;  // L x n: ||(I - T^{ell+1})_i x^ell||^2 (unmasked)
    std::vector<double> sigma;            // L x n: realized drift per step
    std::vector<double> sigma_min;        // L x n: minimal set displacement
    long clamp_events = 0;

    std::vector<long> iterate_steps;        // iterations with a stored iterate
    std::vector<Eigen::VectorXd> iterates;  // every stride-th x^ell plus x^L

    double& dist_at(long ell, int i) {
        return dist[static_cast<std::size_t>(ell) * static_cast<std::size_t>(num_blocks) +
                    static_cast<std::size_t>(i)];
    }
    double dist_at(long ell, int i) const {
        return dist[static_cast<std::size_t>(ell) * static_cast<std::size_t>(num_blocks) +
                    static_cast<std::size_t>(i)];
    }
    std::size_t step_index(long ell, int i) const {
        return static_cast<std::size_t>(ell) * static_cast<std::size_t>(num_blocks) +
               static_cast<std::size_t>(i);
    }

    /// beta_i(ell) = number of updates of block i among steps 0..ell-1.
    long beta(long ell, int i) const;

    /// (1/(ell+1)) sum_{h <= min(ell, L-1)} fpr_summand[h]; the cumulative
    /// fixed-point residual compared against the averaged-case bounds.
    double cumulative_fpr(long ell, int i) const;
};

/// Runs the iteration. Deterministic: identical (config, seed) give a
/// bit-identical Trajectory.
Trajectory run(const IterationConfig& config);

struct PathLength {
    std::vector<double> weighted;  // sum_{h<L} chi^{L-1-h} sigma_i^h per block
    std::vector<double> plain;     // sum_{h<L} sigma_i^h per block
};

/// Drift path-length summaries at the final iteration; zero for static runs.
PathLength weighted_path_length(const Trajectory& traj, double chi);

}  // namespace opfix
