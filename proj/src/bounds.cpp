#include "opfix/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace opfix {

namespace {

// pow evaluated through the log domain once exponents get large, so the
// geometric factors in the bounds never lose the exp/log cancellation.
double geom_pow(double base, double exponent) {
    if (exponent == 0.0) return 1.0;
    if (base == 0.0) return 0.0;
    if (exponent > 500.0) return std::exp(exponent * std::log(base));
    return std::pow(base, exponent);
}

// (1 - rate^ell) / (1 - rate) for rate in (0, 1).
double geometric_sum(double rate, long ell) {
    return (1.0 - geom_pow(rate, static_cast<double>(ell))) / (1.0 - rate);
}

void check_rate(double zeta, const char* what) {
    if (!(zeta > 0.0) || !(zeta < 1.0))
        throw std::invalid_argument(std::string(what) + " must lie in (0, 1)");
}

void check_probability(double p) {
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("update probability must lie in (0, 1]");
}

void check_ell(long ell) {
    if (ell < 0) throw std::invalid_argument("iteration index must be >= 0");
}

// Mean recursion closed form: chi^ell d0 + (1 - chi^ell)/(1 - chi) * rate.
double mean_core(double chi, double d0, double rate, long ell) {
    return geom_pow(chi, static_cast<double>(ell)) * d0 + geometric_sum(chi, ell) * rate;
}

// High-probability core: hp envelope of eta(ell) d0 + (1-zeta^ell)/(1-zeta) * scale.
double hp_core(double zeta, double p, double d0, double scale, double theta_prime,
               double delta, long ell) {
    const double amplitude = eta(zeta, p, ell) * d0 + geometric_sum(zeta, ell) * scale;
    return hp_bound(SubWeibullParams{theta_prime, amplitude}, delta);
}

double averaged_prefactor(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("averagedness constant must lie in (0, 1)");
    return alpha / (1.0 - alpha);
}

}  // namespace

double knorm_zeta_beta(double zeta, double p, long ell, double k) {
    check_rate(zeta, "contraction rate");
    check_probability(p);
    check_ell(ell);
    if (!(k >= 1.0)) throw std::invalid_argument("moment order k must be >= 1");
    // (1 - p + p zeta^k)^(ell/k), with 1 - p + p zeta^k = 1 + p (zeta^k - 1).
    const double log_inner = std::log1p(p * std::expm1(k * std::log(zeta)));
    return std::exp(static_cast<double>(ell) / k * log_inner);
}

namespace {

// log of knorm_zeta_beta(...)/sqrt(k), the objective maximized by eta().
double log_eta_objective(double zeta, double p, long ell, double k) {
    const double log_inner = std::log1p(p * std::expm1(k * std::log(zeta)));
    return static_cast<double>(ell) / k * log_inner - 0.5 * std::log(k);
}

}  // namespace

double eta(double zeta, double p, long ell) {
    check_rate(zeta, "contraction rate");
    check_probability(p);
    check_ell(ell);
    if (ell == 0) return 1.0;  // k = 1 maximizes 1/sqrt(k)

    const double k_max = std::max(1000.0, 10.0 * static_cast<double>(ell));
    constexpr int kGridPoints = 400;
    const double log_span = std::log(k_max);

    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    std::array<double, kGridPoints> grid_k{};
    for (int j = 0; j < kGridPoints; ++j) {
        const double k = std::exp(log_span * j / (kGridPoints - 1));
        grid_k[static_cast<std::size_t>(j)] = k;
        const double value = log_eta_objective(zeta, p, ell, k);
        if (value > best_value) {
            best_value = value;
            best = j;
        }
    }

    // Golden-section refinement on the bracket around the best grid point.
    double lo = grid_k[static_cast<std::size_t>(std::max(0, best - 1))];
    double hi = grid_k[static_cast<std::size_t>(std::min(kGridPoints - 1, best + 1))];
    constexpr double kGolden = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = log_eta_objective(zeta, p, ell, x1);
    double f2 = log_eta_objective(zeta, p, ell, x2);
    while (b - a > 1e-8) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = log_eta_objective(zeta, p, ell, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = log_eta_objective(zeta, p, ell, x1);
        }
    }
    const double refined = std::max(f1, f2);
    return std::exp(std::max(best_value, refined));
}

std::string to_string(Proposition p) {
    switch (p) {
        case Proposition::mean_contractive: return "mean-contractive";
        case Proposition::hp_contractive: return "hp-contractive";
        case Proposition::hp_contractive_alt: return "hp-contractive-alt";
        case Proposition::markov_contractive: return "markov-contractive";
        case Proposition::mean_averaged_fpr: return "mean-averaged-fpr";
        case Proposition::hp_averaged_fpr: return "hp-averaged-fpr";
        case Proposition::sanov_no_noise: return "sanov-no-noise";
        case Proposition::sanov_averaged_no_noise: return "sanov-averaged-no-noise";
        case Proposition::neighborhood_limsup: return "neighborhood-limsup";
        case Proposition::mean_online_contractive: return "mean-online-contractive";
        case Proposition::hp_online_contractive: return "hp-online-contractive";
        case Proposition::mean_online_fpr: return "mean-online-fpr";
        case Proposition::hp_online_fpr: return "hp-online-fpr";
    }
    return "unknown";
}

std::optional<Proposition> proposition_from_string(const std::string& name) {
    static const std::pair<const char*, Proposition> table[] = {
        {"mean-contractive", Proposition::mean_contractive},
        {"hp-contractive", Proposition::hp_contractive},
        {"hp-contractive-alt", Proposition::hp_contractive_alt},
        {"markov-contractive", Proposition::markov_contractive},
        {"mean-averaged-fpr", Proposition::mean_averaged_fpr},
        {"hp-averaged-fpr", Proposition::hp_averaged_fpr},
        {"sanov-no-noise", Proposition::sanov_no_noise},
        {"sanov-averaged-no-noise", Proposition::sanov_averaged_no_noise},
        {"neighborhood-limsup", Proposition::neighborhood_limsup},
        {"mean-online-contractive", Proposition::mean_online_contractive},
        {"hp-online-contractive", Proposition::hp_online_contractive},
        {"mean-online-fpr", Proposition::mean_online_fpr},
        {"hp-online-fpr", Proposition::hp_online_fpr},
    };
    for (const auto& [key, value] : table)
        if (name == key) return value;
    return std::nullopt;
}

CurveCheck check_kind(Proposition p) {
    switch (p) {
        case Proposition::mean_contractive:
        case Proposition::mean_averaged_fpr:
        case Proposition::mean_online_contractive:
        case Proposition::mean_online_fpr:
            return CurveCheck::mean;
        case Proposition::neighborhood_limsup:
            return CurveCheck::tail_mean;
        case Proposition::sanov_no_noise:
        case Proposition::sanov_averaged_no_noise:
            return CurveCheck::sanov;
        default:
            return CurveCheck::coverage;
    }
}

CurveMetric metric_kind(Proposition p) {
    switch (p) {
        case Proposition::mean_averaged_fpr:
        case Proposition::hp_averaged_fpr:
        case Proposition::mean_online_fpr:
        case Proposition::hp_online_fpr:
            return CurveMetric::cumulative_fpr;
        case Proposition::sanov_averaged_no_noise:
            return CurveMetric::residual_sq;
        default:
            return CurveMetric::distance;
    }
}

// --- contractive family ---
//
// The static evaluators delegate to the online cores with the drift fields
// left at zero, so "static" and "online with zero drift" are the same
// floating-point expressions.

double contractive_theta_prime(const ContractiveParams& q) {
    return std::max({0.5, q.theta, q.phi});
}

double online_mean_bound(const ContractiveParams& q, long ell) {
    check_rate(q.zeta, "contraction rate");
    check_probability(q.p);
    check_ell(ell);
    const double rate = q.p * q.sup_mu + q.sup_drift_mean;
    return mean_core(q.chi(), q.d0, rate, ell);
}

double mean_bound_contractive(const ContractiveParams& q, long ell) {
    return online_mean_bound(q, ell);
}

double online_hp_bound(const ContractiveParams& q, double delta, long ell) {
    check_rate(q.zeta, "contraction rate");
    check_probability(q.p);
    check_ell(ell);
    const double scale = q.sup_nu + q.sup_gamma / q.p;
    return hp_core(q.zeta, q.p, q.d0, scale, contractive_theta_prime(q), delta, ell);
}

double hp_bound_contractive(const ContractiveParams& q, double delta, long ell) {
    return online_hp_bound(q, delta, ell);
}

double hp_bound_contractive_alt(const ContractiveParams& q, double delta, long ell) {
    check_rate(q.zeta, "contraction rate");
    check_probability(q.p);
    check_ell(ell);
    const double theta_prime = std::max(0.5, q.theta);
    const double one_minus_zl = 1.0 - geom_pow(q.zeta, static_cast<double>(ell));
    const double fluctuation =
        one_minus_zl / std::sqrt(2.0) * q.d0 + 2.0 * geometric_sum(q.zeta, ell) * q.sup_nu;
    return mean_core(q.chi(), q.d0, q.p * q.sup_mu, ell) +
           hp_bound(SubWeibullParams{theta_prime, fluctuation}, delta);
}

double markov_bound_contractive(const ContractiveParams& q, double delta, long ell) {
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("confidence level delta must lie in (0, 1)");
    return mean_bound_contractive(q, ell) / delta;
}

// --- averaged family ---

double averaged_theta_prime(const AveragedParams& q) {
    return 2.0 * std::max(q.theta, q.phi);
}

double online_mean_fpr_bound(const AveragedParams& q, long ell) {
    check_probability(q.p);
    check_ell(ell);
    const double pref = averaged_prefactor(q.alpha);
    const double noise_term = q.p * (q.sup_mean_sq + 2.0 * q.diam * q.sup_mu) +
                              q.sup_drift_mean_sq + 2.0 * q.diam * q.sup_drift_mean;
    return pref * (q.d0 * q.d0 / static_cast<double>(ell + 1) + noise_term);
}

double mean_fpr_bound(const AveragedParams& q, long ell) {
    return online_mean_fpr_bound(q, ell);
}

double online_hp_fpr_bound(const AveragedParams& q, double delta, long ell) {
    check_probability(q.p);
    check_ell(ell);
    const double pref = averaged_prefactor(q.alpha);
    const double tp = averaged_theta_prime(q);
    const double scale = geom_pow(2.0, tp) * (q.sup_nu * q.sup_nu + q.sup_gamma * q.sup_gamma) +
                         2.0 * q.diam * (q.sup_nu + q.sup_gamma);
    const double hp = hp_bound(SubWeibullParams{tp, scale}, delta);
    return pref * (q.d0 * q.d0 / static_cast<double>(ell + 1) + hp);
}

double hp_fpr_bound(const AveragedParams& q, double delta, long ell) {
    return online_hp_fpr_bound(q, delta, ell);
}

// --- update-starvation family ---

double sanov_delta(double p, double eps, long ell) {
    check_probability(p);
    check_ell(ell);
    if (!(eps > 0.0) || eps > p)
        throw std::invalid_argument(
            "deviation eps must lie in (0, p]: the starved fraction p - eps cannot "
            "exceed the update probability");
    if (ell == 0) return 1.0;
    // Relative entropy D(p - eps || p), with 0 log 0 := 0. For p = 1 the
    // second term is +inf, giving delta = 0: beta(ell) = ell almost surely.
    const double t1 = eps == p ? 0.0 : (p - eps) * std::log1p(-eps / p);
    const double t2 = (1.0 - p + eps) * std::log1p(eps / (1.0 - p));
    return std::exp(-static_cast<double>(ell) * (t1 + t2));
}

RateWithConfidence no_noise_hp_rate(double zeta, double p, double eps, double d0,
                                    long ell) {
    check_rate(zeta, "contraction rate");
    const double delta = sanov_delta(p, eps, ell);  // validates p, eps, ell
    RateWithConfidence out;
    out.bound = geom_pow(zeta, static_cast<double>(ell) * (p - eps)) * d0;
    out.confidence = 1.0 - delta;
    return out;
}

RateWithConfidence no_noise_fpr_rate(double alpha, double p, double eps, double d0,
                                     long ell) {
    const double pref = averaged_prefactor(alpha);
    if (!(eps < p))
        throw std::invalid_argument(
            "the averaged starvation bound needs eps strictly below p so that the "
            "guaranteed update fraction p - eps is positive");
    const double delta = sanov_delta(p, eps, ell + 1);
    RateWithConfidence out;
    out.bound = pref * d0 * d0 / (static_cast<double>(ell + 1) * (p - eps));
    out.confidence = 1.0 - delta;
    return out;
}

double neighborhood_radius(double zeta, double sup_mu) {
    check_rate(zeta, "contraction rate");
    if (sup_mu < 0.0) throw std::invalid_argument("mean noise bound must be >= 0");
    return sup_mu / (1.0 - zeta);
}

double convolved_hp_bound(double zeta, double d0, double theta, double nu0, double r,
                          double delta, long ell) {
    check_rate(zeta, "contraction rate");
    check_rate(r, "noise decay ratio");
    check_ell(ell);
    const double zl = geom_pow(zeta, static_cast<double>(ell));
    double conv;  // sum_{h < ell} zeta^{ell-1-h} r^h
    if (std::abs(zeta - r) > 1e-12 * std::max(zeta, r)) {
        conv = (zl - geom_pow(r, static_cast<double>(ell))) / (zeta - r);
    } else {
        conv = static_cast<double>(ell) * geom_pow(zeta, static_cast<double>(ell - 1));
    }
    const double amplitude = zl * d0 + nu0 * conv;
    return hp_bound(SubWeibullParams{theta, amplitude}, delta);
}

// --- assembled curves ---

ContractiveParams contractive_params(const IterationConfig& config, int block) {
    const auto bi = static_cast<std::size_t>(block);
    ContractiveParams q;
    q.zeta = config.op.base.zeta;
    q.p = config.update.probabilities[bi];
    q.d0 = config.op.base.block_distance(config.initial_point, block);
    const NoiseSpec& noise = config.noise[bi];
    q.theta = noise.declared.theta;
    q.sup_nu = noise.declared.nu;
    q.sup_mu = noise.mean_norm;
    if (!config.op.is_static()) {
        q.phi = config.op.drift_declared[bi].theta;
        q.sup_gamma = config.op.drift_declared[bi].nu;
        q.sup_drift_mean = config.op.drift_mean[bi];
    }
    return q;
}

AveragedParams averaged_params(const IterationConfig& config, int block,
                               SigmaVariant sigma) {
    const auto bi = static_cast<std::size_t>(block);
    AveragedParams q;
    q.alpha = config.op.base.alpha;
    q.p = config.update.probabilities[bi];
    q.d0 = config.op.base.block_distance(config.initial_point, block);
    q.diam = config.op.base.domain_diameter[bi];
    const NoiseSpec& noise = config.noise[bi];
    q.theta = noise.declared.theta;
    q.sup_nu = noise.declared.nu;
    q.sup_mu = noise.mean_norm;
    q.sup_mean_sq = noise.mean_sq_norm;
    if (!config.op.is_static()) {
        const bool minimal = sigma == SigmaVariant::minimal;
        const auto& declared =
            minimal ? config.op.drift_declared_min[bi] : config.op.drift_declared[bi];
        q.phi = declared.theta;
        q.sup_gamma = declared.nu;
        q.sup_drift_mean =
            minimal ? config.op.drift_mean_min[bi] : config.op.drift_mean[bi];
        q.sup_drift_mean_sq =
            minimal ? config.op.drift_mean_sq_min[bi] : config.op.drift_mean_sq[bi];
    }
    return q;
}

namespace {

bool noise_is_zero(const IterationConfig& config) {
    for (const auto& n : config.noise)
        if (!n.is_zero()) return false;
    return true;
}

void require_class(const IterationConfig& config, OperatorClass cls,
                   Proposition prop) {
    if (config.op.base.op_class != cls)
        throw std::invalid_argument("bound " + to_string(prop) + " applies to " +
                                    to_string(cls) + " operators only");
}

void require_static(const IterationConfig& config, Proposition prop) {
    if (!config.op.is_static())
        throw std::invalid_argument("bound " + to_string(prop) +
                                    " does not account for a drifting operator; use the "
                                    "online variant");
}

double require_delta(const CurveRequest& request) {
    if (!request.delta.has_value())
        throw std::invalid_argument("bound " + to_string(request.proposition) +
                                    " needs a confidence level delta");
    const double delta = *request.delta;
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("confidence level delta must lie in (0, 1)");
    return delta;
}

double require_eps(const CurveRequest& request) {
    if (!request.eps.has_value())
        throw std::invalid_argument("bound " + to_string(request.proposition) +
                                    " needs a deviation parameter eps");
    return *request.eps;
}

// Decaying schedules make sup-based curves valid but vacuously loose; the
// dedicated convolution curve below needs p = 1 and a single decay ratio.
const NoiseSchedule& single_decay_schedule(const IterationConfig& config) {
    const NoiseSchedule& first = config.noise.front().schedule;
    for (const auto& n : config.noise)
        if (n.schedule.kind != first.kind || n.schedule.ratio != first.ratio)
            throw std::invalid_argument(
                "the decaying-noise distance curve needs one shared decay schedule");
    return first;
}

}  // namespace

BoundCurve build_curve(const IterationConfig& config, const CurveRequest& request,
                       int block) {
    config.validate();
    if (block < 0 || block >= config.op.base.partition.num_blocks())
        throw std::invalid_argument("bound curve: block index out of range");
    const long horizon = config.horizon;
    const Proposition prop = request.proposition;

    BoundCurve curve;
    curve.proposition = prop;
    curve.block = block;
    curve.values.resize(static_cast<std::size_t>(horizon) + 1);

    const bool contractive_family =
        prop == Proposition::mean_contractive || prop == Proposition::hp_contractive ||
        prop == Proposition::hp_contractive_alt ||
        prop == Proposition::markov_contractive ||
        prop == Proposition::sanov_no_noise ||
        prop == Proposition::neighborhood_limsup ||
        prop == Proposition::mean_online_contractive ||
        prop == Proposition::hp_online_contractive;

    if (contractive_family) {
        require_class(config, OperatorClass::contractive, prop);
        const ContractiveParams q = contractive_params(config, block);
        curve.params = {{"zeta", q.zeta},     {"p", q.p},
                        {"chi", q.chi()},     {"d0", q.d0},
                        {"theta", q.theta},   {"sup_nu", q.sup_nu},
                        {"sup_mu", q.sup_mu}, {"phi", q.phi},
                        {"sup_gamma", q.sup_gamma}, {"sup_drift_mean", q.sup_drift_mean}};
        const bool decaying = config.noise[static_cast<std::size_t>(block)].schedule.decays();

        switch (prop) {
            case Proposition::mean_contractive: {
                require_static(config, prop);
                for (long ell = 0; ell <= horizon; ++ell)
                    curve.values[static_cast<std::size_t>(ell)] =
                        mean_bound_contractive(q, ell);
                break;
            }
            case Proposition::hp_contractive: {
                const double delta = require_delta(request);
                curve.delta = delta;
                require_static(config, prop);
                if (decaying) {
                    // Vanishing noise: every update must fire (p = 1) and the
                    // whole error, initial condition included, is one
                    // sub-Weibull envelope that decays with ell.
                    if (q.p != 1.0)
                        throw std::invalid_argument(
                            "the decaying-noise distance curve needs update probability "
                            "1 so the contraction applies at every step");
                    const NoiseSchedule& sched = single_decay_schedule(config);
                    curve.theta_prime = q.theta;
                    curve.params["decay_ratio"] = sched.ratio;
                    for (long ell = 0; ell <= horizon; ++ell)
                        curve.values[static_cast<std::size_t>(ell)] = convolved_hp_bound(
                            q.zeta, q.d0, q.theta, q.sup_nu, sched.ratio, delta, ell);
                } else {
                    curve.theta_prime = contractive_theta_prime(q);
                    for (long ell = 0; ell <= horizon; ++ell)
                        curve.values[static_cast<std::size_t>(ell)] =
                            hp_bound_contractive(q, delta, ell);
                }
                break;
            }
            case Proposition::hp_contractive_alt: {
                const double delta = require_delta(request);
                curve.delta = delta;
                require_static(config, prop);
                curve.theta_prime = std::max(0.5, q.theta);
                for (long ell = 0; ell <= horizon; ++ell)
                    curve.values[static_cast<std::size_t>(ell)] =
                        hp_bound_contractive_alt(q, delta, ell);
                break;
            }
            case Proposition::markov_contractive: {
                const double delta = require_delta(request);
                curve.delta = delta;
                require_static(config, prop);
                for (long ell = 0; ell <= horizon; ++ell)
                    curve.values[static_cast<std::size_t>(ell)] =
                        markov_bound_contractive(q, delta, ell);
                break;
            }
            case Proposition::sanov_no_noise: {
                require_static(config, prop);
                if (!noise_is_zero(config))
                    throw std::invalid_argument(
                        "bound sanov-no-noise requires the zero noise model");
                const double eps = require_eps(request);
                curve.params["eps"] = eps;
                curve.confidence.resize(static_cast<std::size_t>(horizon) + 1);
                for (long ell = 0; ell <= horizon; ++ell) {
                    const RateWithConfidence rc =
                        no_noise_hp_rate(q.zeta, q.p, eps, q.d0, ell);
                    curve.values[static_cast<std::size_t>(ell)] = rc.bound;
                    curve.confidence[static_cast<std::size_t>(ell)] = rc.confidence;
                }
                break;
            }
            case Proposition::neighborhood_limsup: {
                require_static(config, prop);
                const double radius = neighborhood_radius(q.zeta, q.sup_mu);
                curve.params["radius"] = radius;
                std::fill(curve.values.begin(), curve.values.end(), radius);
                break;
            }
            case Proposition::mean_online_contractive: {
                for (long ell = 0; ell <= horizon; ++ell)
                    curve.values[static_cast<std::size_t>(ell)] =
                        online_mean_bound(q, ell);
                break;
            }
            case Proposition::hp_online_contractive: {
                const double delta = require_delta(request);
                curve.delta = delta;
                curve.theta_prime = contractive_theta_prime(q);
                for (long ell = 0; ell <= horizon; ++ell)
                    curve.values[static_cast<std::size_t>(ell)] =
                        online_hp_bound(q, delta, ell);
                break;
            }
            default: break;
        }
        return curve;
    }

    require_class(config, OperatorClass::averaged, prop);
    const AveragedParams q = averaged_params(config, block, request.sigma);
    curve.params = {{"alpha", q.alpha},
                    {"p", q.p},
                    {"d0", q.d0},
                    {"diam", q.diam},
                    {"theta", q.theta},
                    {"sup_nu", q.sup_nu},
                    {"sup_mu", q.sup_mu},
                    {"sup_mean_sq", q.sup_mean_sq},
                    {"phi", q.phi},
                    {"sup_gamma", q.sup_gamma},
                    {"sup_drift_mean", q.sup_drift_mean},
                    {"sup_drift_mean_sq", q.sup_drift_mean_sq}};

    switch (prop) {
        case Proposition::mean_averaged_fpr: {
            require_static(config, prop);
            for (long ell = 0; ell <= horizon; ++ell)
                curve.values[static_cast<std::size_t>(ell)] = mean_fpr_bound(q, ell);
            break;
        }
        case Proposition::hp_averaged_fpr: {
            const double delta = require_delta(request);
            curve.delta = delta;
            require_static(config, prop);
            curve.theta_prime = averaged_theta_prime(q);
            for (long ell = 0; ell <= horizon; ++ell)
                curve.values[static_cast<std::size_t>(ell)] =
                    hp_fpr_bound(q, delta, ell);
            break;
        }
        case Proposition::sanov_averaged_no_noise: {
            require_static(config, prop);
            if (!noise_is_zero(config))
                throw std::invalid_argument(
                    "bound sanov-averaged-no-noise requires the zero noise model");
            const double eps = require_eps(request);
            curve.params["eps"] = eps;
            curve.confidence.resize(static_cast<std::size_t>(horizon) + 1);
            for (long ell = 0; ell <= horizon; ++ell) {
                const RateWithConfidence rc =
                    no_noise_fpr_rate(q.alpha, q.p, eps, q.d0, ell);
                curve.values[static_cast<std::size_t>(ell)] = rc.bound;
                curve.confidence[static_cast<std::size_t>(ell)] = rc.confidence;
            }
            break;
        }
        case Proposition::mean_online_fpr: {
            for (long ell = 0; ell <= horizon; ++ell)
                curve.values[static_cast<std::size_t>(ell)] =
                    online_mean_fpr_bound(q, ell);
            break;
        }
        case Proposition::hp_online_fpr: {
            const double delta = require_delta(request);
            curve.delta = delta;
            curve.theta_prime = averaged_theta_prime(q);
            for (long ell = 0; ell <= horizon; ++ell)
                curve.values[static_cast<std::size_t>(ell)] =
                    online_hp_fpr_bound(q, delta, ell);
            break;
        }
        default:
            throw std::invalid_argument("bound " + to_string(prop) +
                                        " is not a curve over iterations");
    }
    return curve;
}

}  // namespace opfix
