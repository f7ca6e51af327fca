#include "opfix/engine.hpp"

#include <cmath>
#include <stdexcept>

namespace opfix {

std::string to_string(MaskCorrelation c) {
    return c == MaskCorrelation::independent ? "independent" : "fully-coupled";
}

void IterationConfig::validate() const {
    const int n = op.base.partition.num_blocks();
    if (static_cast<int>(update.probabilities.size()) != n)
        throw std::invalid_argument("config: one update probability per block required");
    for (double p : update.probabilities)
        if (!(p > 0.0 && p <= 1.0))
            throw std::invalid_argument(
                "config: update probabilities must lie in (0, 1]; every block needs a "
                "strictly positive chance of being updated");
    if (static_cast<int>(noise.size()) != n)
        throw std::invalid_argument("config: one noise spec per block required");
    for (int i = 0; i < n; ++i)
        if (noise[static_cast<std::size_t>(i)].dim !=
            op.base.partition.dims[static_cast<std::size_t>(i)])
            throw std::invalid_argument("config: noise dimension must match its block");
    if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
    if (initial_point.size() != op.base.partition.total_dim())
        throw std::invalid_argument("config: initial point dimension mismatch");
    if (op.base.is_averaged() && !op.base.domain->contains(initial_point, 0.0))
        throw std::invalid_argument("config: initial point outside the operator domain");
    if (stride < 1) throw std::invalid_argument("config: stride must be >= 1");
}

long Trajectory::beta(long ell, int i) const {
    long count = 0;
    for (long h = 0; h < ell; ++h) count += mask[step_index(h, i)];
    return count;
}

double Trajectory::cumulative_fpr(long ell, int i) const {
    double sum = 0.0;
    const long last = std::min(ell, horizon - 1);
    for (long h = 0; h <= last; ++h) sum += fpr_summand[step_index(h, i)];
    return sum / static_cast<double>(ell + 1);
}

Trajectory run(const IterationConfig& config) {
    config.validate();
    const int n = config.op.base.partition.num_blocks();
    const long total_steps = config.horizon;

    OnlineOperatorSpec op = config.op;  // advance() mutates; work on a copy
    const BlockPartition& part = op.base.partition;

    Rng mask_rng(config.seed, Rng::kMaskStream);
    Rng noise_rng(config.seed, Rng::kNoiseStream);
    Rng drift_rng(config.seed, Rng::kDriftStream);

    Trajectory traj;
    traj.num_blocks = n;
    traj.horizon = total_steps;
    traj.dist.resize(static_cast<std::size_t>(total_steps + 1) * static_cast<std::size_t>(n));
    traj.mask.resize(static_cast<std::size_t>(total_steps) * static_cast<std::size_t>(n));
    traj.fpr_summand.resize(traj.mask.size());
    traj.raw_residual_sq.resize(traj.mask.size());
    traj.sigma.resize(traj.mask.size());
    traj.sigma_min.resize(traj.mask.size());

    Eigen::VectorXd x = config.initial_point;
    Eigen::VectorXd tx(x.size());
    for (int i = 0; i < n; ++i) traj.dist_at(0, i) = op.base.block_distance(x, i);
    traj.iterate_steps.push_back(0);
    traj.iterates.push_back(x);

    std::vector<std::uint8_t> u(static_cast<std::size_t>(n));
    for (long ell = 0; ell < total_steps; ++ell) {
        // (1) The operator for this step: T^{ell+1} in the online case.
        const AdvanceResult drift = op.advance(ell, drift_rng);
        for (int i = 0; i < n; ++i) {
            traj.sigma[traj.step_index(ell, i)] = drift.sigma[static_cast<std::size_t>(i)];
            traj.sigma_min[traj.step_index(ell, i)] =
                drift.sigma_min[static_cast<std::size_t>(i)];
        }

        // (2) Update mask.
        if (config.update.correlation == MaskCorrelation::fully_coupled) {
            const double coin = mask_rng.uniform01();
            for (int i = 0; i < n; ++i)
                u[static_cast<std::size_t>(i)] =
                    coin < config.update.probabilities[static_cast<std::size_t>(i)] ? 1 : 0;
        } else {
            for (int i = 0; i < n; ++i)
                u[static_cast<std::size_t>(i)] =
                    mask_rng.bernoulli(config.update.probabilities[static_cast<std::size_t>(i)])
                        ? 1
                        : 0;
        }

        // (3)+(4) Noise and blockwise update; T reads the pre-update iterate.
        op.base.apply_into(x, tx);
        for (int i = 0; i < n; ++i) {
            const int off = part.offsets[static_cast<std::size_t>(i)];
            const int d = part.dims[static_cast<std::size_t>(i)];
            const double res_sq = (x.segment(off, d) - tx.segment(off, d)).squaredNorm();
            traj.raw_residual_sq[traj.step_index(ell, i)] = res_sq;
            const Eigen::VectorXd e =
                sample_noise(config.noise[static_cast<std::size_t>(i)], d, ell, noise_rng);
            if (u[static_cast<std::size_t>(i)]) {
                traj.fpr_summand[traj.step_index(ell, i)] = res_sq;
                x.segment(off, d) = tx.segment(off, d) + e;
            } else {
                traj.fpr_summand[traj.step_index(ell, i)] = 0.0;
                // unmasked blocks keep their previous value bit-for-bit
            }
            traj.mask[traj.step_index(ell, i)] = u[static_cast<std::size_t>(i)];
        }

        if (op.base.is_averaged() && !op.base.domain->contains(x, 0.0)) {
            x = op.base.domain->clamp(x);
            ++traj.clamp_events;
        }

        for (int i = 0; i < n; ++i) traj.dist_at(ell + 1, i) = op.base.block_distance(x, i);
        if ((ell + 1) % config.stride == 0 || ell + 1 == total_steps) {
            traj.iterate_steps.push_back(ell + 1);
            traj.iterates.push_back(x);
        }
    }
    return traj;
}

PathLength weighted_path_length(const Trajectory& traj, double chi) {
    if (!(chi > 0.0 && chi < 1.0))
        throw std::invalid_argument("weighted_path_length: chi must lie in (0, 1)");
    PathLength out;
    out.weighted.assign(static_cast<std::size_t>(traj.num_blocks), 0.0);
    out.plain.assign(static_cast<std::size_t>(traj.num_blocks), 0.0);
    for (int i = 0; i < traj.num_blocks; ++i) {
        double weighted = 0.0, plain = 0.0;
        for (long h = 0; h < traj.horizon; ++h) {
            const double s = traj.sigma[traj.step_index(h, i)];
            weighted += std::pow(chi, static_cast<double>(traj.horizon - 1 - h)) * s;
            plain += s;
        }
        out.weighted[static_cast<std::size_t>(i)] = weighted;
        out.plain[static_cast<std::size_t>(i)] = plain;
    }
    return out;
}

}  // namespace opfix
