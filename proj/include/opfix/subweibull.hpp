#pragma once

// Tail-parameter algebra for nonnegative random variables.
//
// A variable x is "sub-Weibull(theta, nu)" when its k-th moment norms obey
// ||x||_k <= nu * k^theta for every real k >= 1. theta = 1/2 covers
// sub-Gaussian tails, theta = 1 sub-exponential, larger theta heavier.
// The pair (theta, nu) is closed under the usual compositions (scaling,
// sums, products, powers), which lets us propagate certified tail bounds
// through every term of an error recursion instead of re-deriving them.
//
// The exact-zero variable is represented by the sentinel (0, 0); `nu > 0`
// is required for every non-sentinel parameter pair.

#include <stdexcept>

namespace opfix {

struct SubWeibullParams {
    double theta = 0.0;  // tail exponent, >= 0
    double nu = 0.0;     // scale, > 0 (== 0 only for the zero sentinel)

    static SubWeibullParams zero() { return {0.0, 0.0}; }
    bool is_zero() const { return nu == 0.0; }

    bool operator==(const SubWeibullParams&) const = default;
};

/// Throws std::invalid_argument unless p is the zero sentinel or satisfies
/// theta >= 0, nu > 0.
void validate(const SubWeibullParams& p);

/// Moment-to-tail conversion constant (2e/theta)^theta, extended
/// continuously by c(0) = 1.
double c_of_theta(double theta);

/// Smallest tail radius certified at confidence 1 - delta:
/// nu * log^theta(2/delta) * c(theta). Zero sentinel maps to 0.
double hp_bound(const SubWeibullParams& p, double delta);

/// a*x for scalar a: (theta, |a| nu). a = 0 collapses to the zero sentinel.
SubWeibullParams sw_scale(const SubWeibullParams& p, double a);

/// x1 + x2, no independence needed: (max theta, nu1 + nu2).
SubWeibullParams sw_sum(const SubWeibullParams& p1, const SubWeibullParams& p2);

/// x1 * x2: (theta1 + theta2, nu1 nu2) when independent, otherwise the
/// scale picks up (theta1+theta2)^(theta1+theta2) / (theta1^theta1 theta2^theta2),
/// with theta^theta read as 1 at theta = 0.
SubWeibullParams sw_product(const SubWeibullParams& p1, const SubWeibullParams& p2,
                            bool independent);

/// x^a for a > 0: (a theta, nu^a max(1, a^{a theta})).
SubWeibullParams sw_power(const SubWeibullParams& p, double a);

/// x - E[x]: (theta, 2 nu).
SubWeibullParams sw_center(const SubWeibullParams& p);

/// Centered version of any variable supported on [a, b]: (1/2, (b-a)/sqrt(2)).
SubWeibullParams sw_bounded(double a, double b);

/// Euclidean norm of a d-vector of (possibly dependent) components each
/// sub-Weibull(theta, nu): (theta, 2^theta sqrt(d) nu).
SubWeibullParams sw_vector_norm(const SubWeibullParams& component, int d);

}  // namespace opfix
