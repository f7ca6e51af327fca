#include "opfix/subweibull.hpp"

#include <algorithm>
#include <cmath>

namespace opfix {

void validate(const SubWeibullParams& p) {
    if (p.is_zero()) {
        if (p.theta != 0.0)
            throw std::invalid_argument("zero-sentinel params must have theta == 0");
        return;
    }
    if (!(p.theta >= 0.0) || !std::isfinite(p.theta))
        throw std::invalid_argument("sub-Weibull theta must be finite and >= 0");
    if (!(p.nu > 0.0) || !std::isfinite(p.nu))
        throw std::invalid_argument("sub-Weibull nu must be finite and > 0");
}

double c_of_theta(double theta) {
    if (theta < 0.0) throw std::invalid_argument("c_of_theta: theta must be >= 0");
    if (theta == 0.0) return 1.0;  // continuous limit of (2e/theta)^theta
    return std::exp(theta * std::log(2.0 * M_E / theta));
}

double hp_bound(const SubWeibullParams& p, double delta) {
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("hp_bound: delta must lie in (0, 1)");
    if (p.is_zero()) return 0.0;
    return p.nu * std::pow(std::log(2.0 / delta), p.theta) * c_of_theta(p.theta);
}

SubWeibullParams sw_scale(const SubWeibullParams& p, double a) {
    if (!std::isfinite(a)) throw std::invalid_argument("sw_scale: a must be finite");
    if (a == 0.0 || p.is_zero()) return SubWeibullParams::zero();
    return {p.theta, std::abs(a) * p.nu};
}

SubWeibullParams sw_sum(const SubWeibullParams& p1, const SubWeibullParams& p2) {
    if (p1.is_zero()) return p2;
    if (p2.is_zero()) return p1;
    return {std::max(p1.theta, p2.theta), p1.nu + p2.nu};
}

namespace {

// (t1+t2)^(t1+t2) / (t1^t1 * t2^t2) with t^t -> 1 as t -> 0.
double dependent_product_constant(double t1, double t2) {
    auto pow_self = [](double t) { return t == 0.0 ? 1.0 : std::pow(t, t); };
    return pow_self(t1 + t2) / (pow_self(t1) * pow_self(t2));
}

}  // namespace

SubWeibullParams sw_product(const SubWeibullParams& p1, const SubWeibullParams& p2,
                            bool independent) {
    if (p1.is_zero() || p2.is_zero()) return SubWeibullParams::zero();
    const double theta = p1.theta + p2.theta;
    double nu = p1.nu * p2.nu;
    if (!independent) nu *= dependent_product_constant(p1.theta, p2.theta);
    return {theta, nu};
}

SubWeibullParams sw_power(const SubWeibullParams& p, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("sw_power: a must be > 0");
    if (p.is_zero()) return SubWeibullParams::zero();
    const double theta = a * p.theta;
    return {theta, std::pow(p.nu, a) * std::max(1.0, std::pow(a, theta))};
}

SubWeibullParams sw_center(const SubWeibullParams& p) {
    if (p.is_zero()) return SubWeibullParams::zero();
    return {p.theta, 2.0 * p.nu};
}

SubWeibullParams sw_bounded(double a, double b) {
    if (!(a < b)) throw std::invalid_argument("sw_bounded: need a < b");
    return {0.5, (b - a) / std::sqrt(2.0)};
}

SubWeibullParams sw_vector_norm(const SubWeibullParams& component, int d) {
    if (d < 1) throw std::invalid_argument("sw_vector_norm: d must be >= 1");
    if (component.is_zero()) return SubWeibullParams::zero();
    return {component.theta,
            std::pow(2.0, component.theta) * std::sqrt(static_cast<double>(d)) * component.nu};
}

}  // namespace opfix
