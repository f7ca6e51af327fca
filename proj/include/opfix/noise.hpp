#pragma once

// Additive-noise samplers with certified tail parameters.
//
// Every family ships with analytically derived constants for the Euclidean
// norm of a sampled vector: `declared` sub-Weibull parameters that provably
// upper-bound the norm's k-norms, plus the exact (or safely upper-bounded)
// first and second moments. Bound evaluators consume only these certified
// constants, so a conforming sampler guarantees valid theoretical curves.
// verify_moment_bound() is the empirical audit of that contract.
//
// An optional schedule scales the draw at iteration ell by a multiplier
// m(ell) (constant 1, or r^ell for geometric decay), and the certified
// constants scale along with it.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "opfix/rng.hpp"
#include "opfix/subweibull.hpp"

namespace opfix {

enum class NoiseFamily { zero, gaussian, weibull, bounded_uniform };

std::string to_string(NoiseFamily f);

enum class ScheduleKind { constant, geometric_decay };

struct NoiseSchedule {
    ScheduleKind kind = ScheduleKind::constant;
    double ratio = 1.0;  // geometric decay factor, in (0, 1)

    double multiplier(long ell) const {
        if (kind == ScheduleKind::constant) return 1.0;
        return std::pow(ratio, static_cast<double>(ell));
    }
    bool decays() const { return kind == ScheduleKind::geometric_decay; }
};

struct NoiseSpec {
    NoiseFamily family = NoiseFamily::zero;
    int dim = 1;  // dimension the constants below are certified for

    // Family parameters (only the relevant ones are set).
    double gaussian_std = 0.0;      // s
    double weibull_shape = 0.0;     // Weibull shape = 1/theta_w
    double weibull_scale = 0.0;     // lambda
    double uniform_halfwidth = 0.0; // b

    NoiseSchedule schedule;

    // Certified constants for ||e|| at base scale (schedule multiplier 1).
    SubWeibullParams declared;  // k-norm envelope of ||e||
    double mean_norm = 0.0;     // mu >= E||e||  (exact where tractable)
    double mean_sq_norm = 0.0;  // exact E||e||^2

    bool is_zero() const { return family == NoiseFamily::zero; }

    // Schedule-adjusted constants at iteration ell.
    SubWeibullParams declared_at(long ell) const {
        return sw_scale(declared, schedule.multiplier(ell));
    }
    double mean_norm_at(long ell) const { return mean_norm * schedule.multiplier(ell); }
    double mean_sq_norm_at(long ell) const {
        const double m = schedule.multiplier(ell);
        return mean_sq_norm * m * m;
    }
};

/// Factories compute the certified constants for the requested dimension.
NoiseSpec make_zero_noise(int dim = 1);
NoiseSpec make_gaussian_noise(double std_dev, int dim, NoiseSchedule schedule = {});
NoiseSpec make_weibull_noise(double shape, double scale, int dim, NoiseSchedule schedule = {});
NoiseSpec make_bounded_uniform_noise(double halfwidth, int dim, NoiseSchedule schedule = {});

/// One noise vector for the given iteration (schedule applied). Components
/// are i.i.d.; the Weibull family is sign-symmetrized so the magnitude
/// distribution, and hence the certified constants, are unchanged.
Eigen::VectorXd sample_noise(const NoiseSpec& spec, int dim, long iteration, Rng& rng);

struct MomentReport {
    double max_ratio = 0.0;  // max over grid k of empirical ||e||_k / (nu k^theta)
    double worst_k = 1.0;
};

/// Draws num_samples vectors at base scale and compares empirical k-norms of
/// ||e|| against the declared envelope on the grid k = 1, 1.5, ..., k_max.
MomentReport verify_moment_bound(const NoiseSpec& spec, int dim, long num_samples,
                                 double k_max, Rng& rng);

/// Same audit for an externally provided sample of magnitudes; used to test
/// the closure rules on composed variables.
MomentReport verify_moment_bound_samples(const std::vector<double>& magnitudes,
                                         const SubWeibullParams& declared, double k_max);

}  // namespace opfix
