#pragma once

// Evaluators for every convergence bound the project certifies.
//
// Conventions shared by all evaluators:
//   chi = 1 - p + p zeta  is the effective mean contraction rate under
//   Bernoulli(p) block updates; eta(ell) is the numerically computed tail
//   scale of zeta^{beta(ell)} with beta(ell) ~ Binomial(ell, p); theta' is
//   the tail exponent of the combined error and feeds log^{theta'}(2/delta)
//   * c(theta').
//
// Static and online evaluators share one core so that an online problem
// with zero drift reproduces the static curves bit-for-bit.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opfix/engine.hpp"

namespace opfix {

/// ||zeta^{beta(ell)}||_k = (1 - p + p zeta^k)^{ell/k}, evaluated in the log
/// domain.
double knorm_zeta_beta(double zeta, double p, long ell, double k);

/// max over real k >= 1 of knorm_zeta_beta(...)/sqrt(k): the tail scale of
/// zeta^{beta(ell)} as a sub-Weibull(1/2, eta(ell)) variable. Dense log grid
/// over k in [1, max(1000, 10 ell)] followed by golden-section refinement.
double eta(double zeta, double p, long ell);

enum class Proposition {
    mean_contractive,
    hp_contractive,
    hp_contractive_alt,
    markov_contractive,
    mean_averaged_fpr,
    hp_averaged_fpr,
    sanov_no_noise,
    sanov_averaged_no_noise,
    neighborhood_limsup,
    mean_online_contractive,
    hp_online_contractive,
    mean_online_fpr,
    hp_online_fpr,
};

std::string to_string(Proposition p);
std::optional<Proposition> proposition_from_string(const std::string& name);

/// How a curve is certified against an ensemble.
enum class CurveCheck {
    mean,       // empirical mean of the metric <= curve + slack
    coverage,   // fraction of trials below the curve >= 1 - delta - slack
    sanov,      // coverage with a per-ell confidence level
    tail_mean,  // mean over a trailing window <= curve + slack
};

enum class CurveMetric { distance, cumulative_fpr, residual_sq };

CurveCheck check_kind(Proposition p);
CurveMetric metric_kind(Proposition p);

// Per-block constants for the contractive family. sup_* are suprema of the
// schedule over the configured horizon. Zero noise is sup_nu = sup_mu = 0
// with theta = 0; zero drift likewise.
struct ContractiveParams {
    double zeta = 0.0;
    double p = 1.0;
    double d0 = 0.0;     // ||x^0 - x^{*,0}|| for the block
    double theta = 0.0;  // noise tail exponent
    double sup_nu = 0.0;
    double sup_mu = 0.0;
    double phi = 0.0;  // drift tail exponent
    double sup_gamma = 0.0;
    double sup_drift_mean = 0.0;

    double chi() const { return 1.0 - p + p * zeta; }
};

// Per-block constants for the averaged family.
struct AveragedParams {
    double alpha = 0.0;
    double p = 1.0;
    double d0 = 0.0;
    double diam = 0.0;   // block domain diameter
    double theta = 0.0;  // noise tail exponent
    double sup_nu = 0.0;
    double sup_mu = 0.0;
    double sup_mean_sq = 0.0;  // sup E||e||^2
    double phi = 0.0;          // drift tail exponent
    double sup_gamma = 0.0;
    double sup_drift_mean = 0.0;
    double sup_drift_mean_sq = 0.0;
};

// --- contractive family ---

double mean_bound_contractive(const ContractiveParams& q, long ell);
double hp_bound_contractive(const ContractiveParams& q, double delta, long ell);
double hp_bound_contractive_alt(const ContractiveParams& q, double delta, long ell);
double markov_bound_contractive(const ContractiveParams& q, double delta, long ell);
double online_mean_bound(const ContractiveParams& q, long ell);
double online_hp_bound(const ContractiveParams& q, double delta, long ell);

/// Tail exponent used by the contractive hp curves.
double contractive_theta_prime(const ContractiveParams& q);

// --- averaged family ---

enum class SigmaVariant { minimal, maximal };

double mean_fpr_bound(const AveragedParams& q, long ell);
double hp_fpr_bound(const AveragedParams& q, double delta, long ell);
double online_mean_fpr_bound(const AveragedParams& q, long ell);
double online_hp_fpr_bound(const AveragedParams& q, double delta, long ell);

/// Tail exponent used by the averaged hp curves: 2 max(theta, phi).
double averaged_theta_prime(const AveragedParams& q);

// --- update-starvation (no additive noise) family ---

/// exp(-ell D(p - eps || p)), the probability that beta(ell) <= ell (p - eps),
/// with 0 log 0 := 0. Valid for eps in (0, p]; p = 1 requires eps = 1.
double sanov_delta(double p, double eps, long ell);

struct RateWithConfidence {
    double bound = 0.0;
    double confidence = 0.0;  // the bound holds with at least this probability
};

/// zeta^{ell (p-eps)} d0, holding w.p. 1 - sanov_delta(p, eps, ell).
RateWithConfidence no_noise_hp_rate(double zeta, double p, double eps, double d0,
                                    long ell);

/// Instantaneous squared residual bound (alpha/(1-alpha)) d0^2 /
/// ((ell+1)(p-eps)), holding w.p. 1 - sanov_delta(p, eps, ell+1).
RateWithConfidence no_noise_fpr_rate(double alpha, double p, double eps, double d0,
                                     long ell);

/// Almost-sure asymptotic radius sup_mu / (1 - zeta).
double neighborhood_radius(double zeta, double sup_mu);

/// Decaying-noise distance curve for p = 1 schedules: the error is dominated
/// by a sub-Weibull(theta, N(ell)) with N(ell) = zeta^ell d0 +
/// sum_{h<ell} zeta^{ell-1-h} nu_0 r^h, so the curve is hp_bound of that.
double convolved_hp_bound(double zeta, double d0, double theta, double nu0, double r,
                          double delta, long ell);

// --- assembled curves ---

struct BoundCurve {
    Proposition proposition = Proposition::mean_contractive;
    int block = 0;
    std::optional<double> delta;
    std::optional<double> theta_prime;   // hp curves only
    std::vector<double> values;          // indexed by ell = 0..horizon
    std::vector<double> confidence;      // per-ell confidence (sanov curves only)
    std::map<std::string, double> params;  // constants used, for the report
};

struct CurveRequest {
    Proposition proposition = Proposition::mean_contractive;
    std::optional<double> delta;            // hp/markov curves
    std::optional<double> eps;              // sanov curves
    SigmaVariant sigma = SigmaVariant::maximal;  // online averaged fpr
};

/// Extracted per-block constants, shared by curve building and reporting.
ContractiveParams contractive_params(const IterationConfig& config, int block);
AveragedParams averaged_params(const IterationConfig& config, int block,
                               SigmaVariant sigma);

/// Evaluates one curve for one block over ell = 0..config.horizon. Throws
/// std::invalid_argument when the proposition does not apply to the
/// configured operator class or noise model.
BoundCurve build_curve(const IterationConfig& config, const CurveRequest& request,
                       int block);

}  // namespace opfix
