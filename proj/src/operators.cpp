#include "opfix/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace opfix {

BlockPartition BlockPartition::from_dims(std::vector<int> dims) {
    if (dims.empty()) throw std::invalid_argument("partition: need at least one block");
    BlockPartition p;
    p.offsets.resize(dims.size() + 1);
    p.offsets[0] = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] < 1) throw std::invalid_argument("partition: block dims must be >= 1");
        p.offsets[i + 1] = p.offsets[i] + dims[i];
    }
    p.dims = std::move(dims);
    return p;
}

BlockPartition BlockPartition::uniform(int num_blocks, int block_dim) {
    return from_dims(std::vector<int>(static_cast<std::size_t>(num_blocks), block_dim));
}

void validate(const Box& box) {
    if (box.lo.size() == 0 || box.lo.size() != box.hi.size())
        throw std::invalid_argument("box: lo/hi must be nonempty and equally sized");
    for (int j = 0; j < box.dim(); ++j)
        if (!(box.lo[j] <= box.hi[j]))
            throw std::invalid_argument("box: lo must be <= hi componentwise");
}

bool Box::contains(const Eigen::VectorXd& x, double tol) const {
    if (x.size() != lo.size()) return false;
    for (int j = 0; j < dim(); ++j)
        if (x[j] < lo[j] - tol || x[j] > hi[j] + tol) return false;
    return true;
}

Eigen::VectorXd Box::clamp(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lo).cwiseMin(hi);
}

namespace {

double point_interval_dist(double x, double lo, double hi) {
    return std::max({0.0, lo - x, x - hi});
}

// sup over x in [alo, ahi] of dist(x, [blo, bhi]); attained at an endpoint.
double directed_axis_sup(double alo, double ahi, double blo, double bhi) {
    return std::max(point_interval_dist(alo, blo, bhi), point_interval_dist(ahi, blo, bhi));
}

double directed_box_dist(const Box& a, const Box& b) {
    double sq = 0.0;
    for (int j = 0; j < a.dim(); ++j) {
        const double s = directed_axis_sup(a.lo[j], a.hi[j], b.lo[j], b.hi[j]);
        sq += s * s;
    }
    return std::sqrt(sq);
}

}  // namespace

double set_distance(const Box& a, const Box& b, SetDistanceMode mode) {
    validate(a);
    validate(b);
    if (a.dim() != b.dim()) throw std::invalid_argument("set_distance: dimension mismatch");
    if (mode == SetDistanceMode::minimal) {
        double sq = 0.0;
        for (int j = 0; j < a.dim(); ++j) {
            const double gap = std::max({0.0, b.lo[j] - a.hi[j], a.lo[j] - b.hi[j]});
            sq += gap * gap;
        }
        return std::sqrt(sq);
    }
    return std::max(directed_box_dist(a, b), directed_box_dist(b, a));
}

std::string to_string(OperatorKind k) {
    switch (k) {
        case OperatorKind::affine_contraction: return "affine-contraction";
        case OperatorKind::gradient_step: return "gradient-step";
        case OperatorKind::projected_gradient_step: return "projected-gradient-step";
        case OperatorKind::km_averaged_projection: return "km-averaged-projection";
    }
    return "?";
}

std::string to_string(OperatorClass c) {
    return c == OperatorClass::contractive ? "contractive" : "averaged";
}

std::string to_string(DriftKind k) {
    switch (k) {
        case DriftKind::none: return "none";
        case DriftKind::random_walk: return "random-walk";
        case DriftKind::deterministic_path: return "deterministic-path";
    }
    return "?";
}

double spectral_norm(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::VectorXd v(a.cols());
    for (int j = 0; j < a.cols(); ++j) v[j] = 1.0 + 1e-3 * j;  // deterministic start
    v.normalize();
    double lambda = 0.0;
    for (int iter = 0; iter < 100000; ++iter) {
        Eigen::VectorXd w = a.transpose() * (a * v);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
        const double next = v.dot(a.transpose() * (a * v));
        if (iter > 0 && std::abs(next - lambda) <= 1e-12 * std::max(next, 1e-300)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return std::sqrt(lambda);
}

void OperatorSpec::apply_into(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    if (x.size() != partition.total_dim())
        throw std::invalid_argument("operator: dimension mismatch");
    if (is_averaged() && !domain->contains(x, 1e-9))
        throw std::invalid_argument("operator: point outside the declared domain");
    out.resize(x.size());
    const int n = partition.num_blocks();
    switch (kind) {
        case OperatorKind::affine_contraction:
        case OperatorKind::gradient_step:
            for (int i = 0; i < n; ++i)
                partition.block(out, i) =
                    block_matrix[static_cast<std::size_t>(i)] * partition.block(x, i) +
                    block_offset[static_cast<std::size_t>(i)];
            break;
        case OperatorKind::projected_gradient_step:
            for (int i = 0; i < n; ++i) {
                const int off = partition.offsets[static_cast<std::size_t>(i)];
                const int d = partition.dims[static_cast<std::size_t>(i)];
                Eigen::VectorXd step =
                    block_matrix[static_cast<std::size_t>(i)] * partition.block(x, i) +
                    block_offset[static_cast<std::size_t>(i)];
                out.segment(off, d) = step.cwiseMax(domain->lo.segment(off, d))
                                          .cwiseMin(domain->hi.segment(off, d));
            }
            break;
        case OperatorKind::km_averaged_projection:
            out = (1.0 - km_weight) * x + km_weight * target->clamp(x);
            break;
    }
}

Eigen::VectorXd OperatorSpec::apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out;
    apply_into(x, out);
    return out;
}

std::vector<double> OperatorSpec::fixed_point_residual(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd tx = apply(x);
    std::vector<double> res(static_cast<std::size_t>(partition.num_blocks()));
    for (int i = 0; i < partition.num_blocks(); ++i)
        res[static_cast<std::size_t>(i)] =
            (partition.block(x, i) - partition.block(tx, i)).norm();
    return res;
}

Eigen::VectorXd OperatorSpec::reference_fixed_point(const Eigen::VectorXd& from) const {
    if (kind == OperatorKind::km_averaged_projection) return target->clamp(from);
    return fixed_point;
}

double OperatorSpec::block_distance(const Eigen::VectorXd& x, int i) const {
    if (kind == OperatorKind::km_averaged_projection)
        return (partition.block(x, i) - partition.block(target->clamp(x), i)).norm();
    return (partition.block(x, i) - partition.block(fixed_point, i)).norm();
}

namespace {

void check_block_data(const BlockPartition& p, const std::vector<Eigen::MatrixXd>& m,
                      const std::vector<Eigen::VectorXd>& v) {
    if (static_cast<int>(m.size()) != p.num_blocks() ||
        static_cast<int>(v.size()) != p.num_blocks())
        throw std::invalid_argument("operator: one matrix/offset per block required");
    for (int i = 0; i < p.num_blocks(); ++i) {
        const int d = p.dims[static_cast<std::size_t>(i)];
        if (m[static_cast<std::size_t>(i)].rows() != d ||
            m[static_cast<std::size_t>(i)].cols() != d ||
            v[static_cast<std::size_t>(i)].size() != d)
            throw std::invalid_argument("operator: block data shape mismatch");
    }
}

std::vector<double> per_block_diameters(const BlockPartition& p, const Box& box) {
    std::vector<double> diam(static_cast<std::size_t>(p.num_blocks()));
    const Eigen::VectorXd edge = box.hi - box.lo;
    for (int i = 0; i < p.num_blocks(); ++i)
        diam[static_cast<std::size_t>(i)] = p.block(edge, i).norm();
    return diam;
}

}  // namespace

OperatorSpec make_scalar_affine(double a, double b) {
    std::vector<Eigen::MatrixXd> m(1, Eigen::MatrixXd::Constant(1, 1, a));
    std::vector<Eigen::VectorXd> v(1, Eigen::VectorXd::Constant(1, b));
    return make_affine_contraction(BlockPartition::uniform(1, 1), std::move(m),
                                   std::move(v));
}

OperatorSpec make_affine_contraction(BlockPartition partition,
                                     std::vector<Eigen::MatrixXd> a,
                                     std::vector<Eigen::VectorXd> b) {
    check_block_data(partition, a, b);
    OperatorSpec spec;
    spec.kind = OperatorKind::affine_contraction;
    spec.op_class = OperatorClass::contractive;
    spec.partition = std::move(partition);
    spec.fixed_point.resize(spec.partition.total_dim());
    double zeta = 0.0;
    for (int i = 0; i < spec.partition.num_blocks(); ++i) {
        const auto& ai = a[static_cast<std::size_t>(i)];
        zeta = std::max(zeta, spectral_norm(ai));
        const Eigen::MatrixXd lhs =
            Eigen::MatrixXd::Identity(ai.rows(), ai.cols()) - ai;
        spec.partition.block(spec.fixed_point, i) =
            lhs.colPivHouseholderQr().solve(b[static_cast<std::size_t>(i)]);
    }
    if (!(zeta > 0.0 && zeta < 1.0))
        throw std::invalid_argument("affine-contraction: block norms must lie in (0, 1)");
    spec.zeta = zeta;
    spec.block_matrix = std::move(a);
    spec.block_offset = std::move(b);
    return spec;
}

OperatorSpec make_gradient_step(BlockPartition partition, std::vector<Eigen::MatrixXd> q,
                                std::vector<Eigen::VectorXd> c, double step) {
    check_block_data(partition, q, c);
    if (!(step > 0.0)) throw std::invalid_argument("gradient-step: step must be > 0");
    OperatorSpec spec;
    spec.kind = OperatorKind::gradient_step;
    spec.op_class = OperatorClass::contractive;
    spec.partition = std::move(partition);
    spec.step_size = step;
    spec.fixed_point.resize(spec.partition.total_dim());
    double zeta = 0.0;
    for (int i = 0; i < spec.partition.num_blocks(); ++i) {
        const auto& qi = q[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(qi);
        const double lmin = eig.eigenvalues().minCoeff();
        const double lmax = eig.eigenvalues().maxCoeff();
        if (!(lmin > 0.0))
            throw std::invalid_argument("gradient-step: blocks must be positive definite");
        zeta = std::max(zeta, std::max(std::abs(1.0 - step * lmin),
                                       std::abs(1.0 - step * lmax)));
        spec.partition.block(spec.fixed_point, i) =
            qi.ldlt().solve(c[static_cast<std::size_t>(i)]);
        spec.block_matrix.push_back(Eigen::MatrixXd::Identity(qi.rows(), qi.cols()) -
                                    step * qi);
        spec.block_offset.push_back(step * c[static_cast<std::size_t>(i)]);
    }
    if (!(zeta > 0.0 && zeta < 1.0))
        throw std::invalid_argument(
            "gradient-step: step incompatible with the spectrum (need zeta in (0, 1))");
    spec.zeta = zeta;
    return spec;
}

OperatorSpec make_projected_gradient_step(BlockPartition partition,
                                          std::vector<Eigen::VectorXd> q_diag,
                                          std::vector<Eigen::VectorXd> c, double step,
                                          Box domain) {
    validate(domain);
    if (domain.dim() != partition.total_dim())
        throw std::invalid_argument("projected-gradient-step: domain dimension mismatch");
    if (static_cast<int>(q_diag.size()) != partition.num_blocks() ||
        static_cast<int>(c.size()) != partition.num_blocks())
        throw std::invalid_argument("projected-gradient-step: one q/c per block");
    if (!(step > 0.0)) throw std::invalid_argument("projected-gradient-step: step > 0");
    OperatorSpec spec;
    spec.kind = OperatorKind::projected_gradient_step;
    spec.op_class = OperatorClass::averaged;
    spec.partition = std::move(partition);
    spec.step_size = step;
    spec.domain = domain;
    spec.domain_diameter = per_block_diameters(spec.partition, domain);
    spec.fixed_point.resize(spec.partition.total_dim());
    double lambda_max = 0.0;
    for (int i = 0; i < spec.partition.num_blocks(); ++i) {
        const auto& qi = q_diag[static_cast<std::size_t>(i)];
        const auto& ci = c[static_cast<std::size_t>(i)];
        const int d = spec.partition.dims[static_cast<std::size_t>(i)];
        const int off = spec.partition.offsets[static_cast<std::size_t>(i)];
        if (qi.size() != d || ci.size() != d)
            throw std::invalid_argument("projected-gradient-step: block shape mismatch");
        if (!(qi.minCoeff() > 0.0))
            throw std::invalid_argument("projected-gradient-step: q must be positive");
        lambda_max = std::max(lambda_max, qi.maxCoeff());
        // Coordinate-separable quadratic over a box: the constrained minimizer
        // is the clamped unconstrained one.
        const Eigen::VectorXd unconstrained = ci.cwiseQuotient(qi);
        spec.partition.block(spec.fixed_point, i) =
            unconstrained.cwiseMax(domain.lo.segment(off, d))
                .cwiseMin(domain.hi.segment(off, d));
        spec.block_matrix.push_back(
            (Eigen::VectorXd::Ones(d) - step * qi).asDiagonal());
        spec.block_offset.push_back(step * ci);
    }
    const double avg_gradient = step * lambda_max / 2.0;
    if (!(avg_gradient < 1.0))
        throw std::invalid_argument("projected-gradient-step: need step * lambda_max < 2");
    // Composition of the 1/2-averaged projection with the (step*lambda_max/2)-
    // averaged gradient map.
    spec.alpha = 1.0 / (2.0 - avg_gradient);
    return spec;
}

OperatorSpec make_km_projection(BlockPartition partition, Box domain, Box target,
                                double weight) {
    validate(domain);
    validate(target);
    if (domain.dim() != partition.total_dim() || target.dim() != domain.dim())
        throw std::invalid_argument("km-averaged-projection: dimension mismatch");
    for (int j = 0; j < domain.dim(); ++j)
        if (target.lo[j] < domain.lo[j] || target.hi[j] > domain.hi[j])
            throw std::invalid_argument(
                "km-averaged-projection: target must lie inside the domain");
    if (!(weight > 0.0 && weight < 1.0))
        throw std::invalid_argument("km-averaged-projection: weight must lie in (0, 1)");
    OperatorSpec spec;
    spec.kind = OperatorKind::km_averaged_projection;
    spec.op_class = OperatorClass::averaged;
    spec.partition = std::move(partition);
    spec.km_weight = weight;
    spec.alpha = weight;  // (1-w)I + w proj is w/2-averaged; declaring w is safe
    spec.domain = std::move(domain);
    spec.target = std::move(target);
    spec.domain_diameter = per_block_diameters(spec.partition, *spec.domain);
    spec.fixed_point = 0.5 * (spec.target->lo + spec.target->hi);
    return spec;
}

Eigen::MatrixXd random_orthogonal(int d, Rng& rng) {
    Eigen::MatrixXd g(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) g(r, c) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

OperatorSpec make_random_affine_contraction(BlockPartition partition, double zeta,
                                            Rng& rng) {
    if (!(zeta > 0.0 && zeta < 1.0))
        throw std::invalid_argument("random affine recipe: zeta must lie in (0, 1)");
    std::vector<Eigen::MatrixXd> a;
    std::vector<Eigen::VectorXd> b;
    for (int i = 0; i < partition.num_blocks(); ++i) {
        const int d = partition.dims[static_cast<std::size_t>(i)];
        Eigen::VectorXd s(d);
        s[0] = zeta;  // top singular value hits the requested rate exactly
        for (int j = 1; j < d; ++j) s[j] = zeta * rng.uniform(0.3, 0.95);
        const Eigen::MatrixXd u = random_orthogonal(d, rng);
        const Eigen::MatrixXd v = random_orthogonal(d, rng);
        Eigen::MatrixXd ai = u * s.asDiagonal() * v.transpose();
        Eigen::VectorXd star(d);
        for (int j = 0; j < d; ++j) star[j] = rng.uniform(-1.0, 1.0);
        b.push_back(star - ai * star);
        a.push_back(std::move(ai));
    }
    return make_affine_contraction(std::move(partition), std::move(a), std::move(b));
}

OperatorSpec make_random_spd_gradient_step(BlockPartition partition, double lambda_max,
                                           double condition, double step, Rng& rng) {
    if (!(lambda_max > 0.0) || !(condition >= 1.0))
        throw std::invalid_argument("random spd recipe: need lambda_max > 0, condition >= 1");
    std::vector<Eigen::MatrixXd> q;
    std::vector<Eigen::VectorXd> c;
    const double lambda_min = lambda_max / condition;
    for (int i = 0; i < partition.num_blocks(); ++i) {
        const int d = partition.dims[static_cast<std::size_t>(i)];
        Eigen::VectorXd lambda(d);
        lambda[0] = lambda_max;
        if (d > 1) lambda[d - 1] = lambda_min;
        for (int j = 1; j < d - 1; ++j)
            lambda[j] = std::exp(rng.uniform(std::log(lambda_min), std::log(lambda_max)));
        const Eigen::MatrixXd u = random_orthogonal(d, rng);
        Eigen::MatrixXd qi = u * lambda.asDiagonal() * u.transpose();
        qi = 0.5 * (qi + qi.transpose());  // enforce exact symmetry
        Eigen::VectorXd star(d);
        for (int j = 0; j < d; ++j) star[j] = rng.uniform(-1.0, 1.0);
        c.push_back(qi * star);
        q.push_back(std::move(qi));
    }
    return make_gradient_step(std::move(partition), std::move(q), std::move(c), step);
}

ClassReport verify_class(const OperatorSpec& spec, long num_samples, Rng& rng,
                         double sample_radius) {
    if (num_samples < 1000)
        throw std::invalid_argument("verify_class: need at least 10^3 samples");
    const int total = spec.partition.total_dim();
    ClassReport report;
    Eigen::VectorXd x(total), tx(total);
    for (long s = 0; s < num_samples; ++s) {
        if (spec.is_averaged()) {
            for (int j = 0; j < total; ++j)
                x[j] = rng.uniform(spec.domain->lo[j], spec.domain->hi[j]);
        } else {
            // Uniform in the ball of sample_radius around the fixed point.
            for (int j = 0; j < total; ++j) x[j] = rng.normal();
            const double norm = x.norm();
            const double r =
                sample_radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(total));
            x = spec.fixed_point + (norm > 0.0 ? (r / norm) * x : x);
        }
        // A random fixed point: box fixed sets quantify over every member.
        Eigen::VectorXd y = spec.fixed_point;
        if (spec.kind == OperatorKind::km_averaged_projection) {
            for (int j = 0; j < total; ++j)
                y[j] = rng.uniform(spec.target->lo[j], spec.target->hi[j]);
        }
        spec.apply_into(x, tx);
        for (int i = 0; i < spec.partition.num_blocks(); ++i) {
            const double to_fix = (spec.partition.block(x, i) - spec.partition.block(y, i)).norm();
            const double img_to_fix =
                (spec.partition.block(tx, i) - spec.partition.block(y, i)).norm();
            double violation;
            if (spec.op_class == OperatorClass::contractive) {
                violation = img_to_fix - spec.zeta * to_fix;
            } else {
                const double res =
                    (spec.partition.block(x, i) - spec.partition.block(tx, i)).norm();
                violation = img_to_fix * img_to_fix - to_fix * to_fix +
                            (1.0 - spec.alpha) / spec.alpha * res * res;
            }
            report.max_violation = std::max(report.max_violation, violation);
        }
    }
    return report;
}

OnlineOperatorSpec make_static_online(OperatorSpec base) {
    OnlineOperatorSpec spec;
    const int n = base.partition.num_blocks();
    spec.base = std::move(base);
    spec.drift = DriftKind::none;
    spec.drift_declared.assign(static_cast<std::size_t>(n), SubWeibullParams::zero());
    spec.drift_mean.assign(static_cast<std::size_t>(n), 0.0);
    spec.drift_mean_sq.assign(static_cast<std::size_t>(n), 0.0);
    spec.drift_declared_min = spec.drift_declared;
    spec.drift_mean_min = spec.drift_mean;
    spec.drift_mean_sq_min = spec.drift_mean_sq;
    return spec;
}

namespace {

void check_drift_supported(const OperatorSpec& base) {
    if (base.kind == OperatorKind::projected_gradient_step)
        throw std::invalid_argument(
            "online drift is unsupported for projected-gradient-step (the constrained "
            "fixed point does not translate with the objective)");
}

}  // namespace

OnlineOperatorSpec make_random_walk_online(OperatorSpec base,
                                           std::vector<NoiseSpec> increments) {
    check_drift_supported(base);
    if (static_cast<int>(increments.size()) != base.partition.num_blocks())
        throw std::invalid_argument("online drift: one increment spec per block");
    for (int i = 0; i < base.partition.num_blocks(); ++i)
        if (increments[static_cast<std::size_t>(i)].dim !=
            base.partition.dims[static_cast<std::size_t>(i)])
            throw std::invalid_argument("online drift: increment dimension mismatch");
    OnlineOperatorSpec spec;
    spec.base = std::move(base);
    spec.drift = DriftKind::random_walk;
    for (const auto& inc : increments) {
        spec.drift_declared.push_back(inc.declared);
        spec.drift_mean.push_back(inc.mean_norm);
        spec.drift_mean_sq.push_back(inc.mean_sq_norm);
    }
    spec.increments = std::move(increments);
    spec.drift_declared_min = spec.drift_declared;
    spec.drift_mean_min = spec.drift_mean;
    spec.drift_mean_sq_min = spec.drift_mean_sq;
    // A translated box that always overlaps its predecessor has minimal set
    // displacement zero: bounded increments smaller than every box side
    // guarantee that.
    if (spec.base.kind == OperatorKind::km_averaged_projection &&
        spec.base.target.has_value() && !spec.base.target->is_singleton()) {
        const Box& tgt = *spec.base.target;
        for (int i = 0; i < spec.base.partition.num_blocks(); ++i) {
            const auto bi = static_cast<std::size_t>(i);
            const NoiseSpec& inc = spec.increments[bi];
            if (inc.family != NoiseFamily::bounded_uniform) continue;
            const int off = spec.base.partition.offsets[bi];
            const int dim = spec.base.partition.dims[bi];
            double min_side = std::numeric_limits<double>::infinity();
            for (int j = off; j < off + dim; ++j)
                min_side = std::min(min_side, tgt.hi[j] - tgt.lo[j]);
            if (inc.uniform_halfwidth <= min_side) {
                spec.drift_declared_min[bi] = SubWeibullParams::zero();
                spec.drift_mean_min[bi] = 0.0;
                spec.drift_mean_sq_min[bi] = 0.0;
            }
        }
    }
    return spec;
}

OnlineOperatorSpec make_path_online(OperatorSpec base, Eigen::VectorXd velocity) {
    check_drift_supported(base);
    if (velocity.size() != base.partition.total_dim())
        throw std::invalid_argument("online drift: velocity dimension mismatch");
    OnlineOperatorSpec spec;
    spec.base = std::move(base);
    spec.drift = DriftKind::deterministic_path;
    for (int i = 0; i < spec.base.partition.num_blocks(); ++i) {
        const double v = spec.base.partition.block(velocity, i).norm();
        // A deterministic displacement of size v is exactly sub-Weibull(0, v).
        spec.drift_declared.push_back(v == 0.0 ? SubWeibullParams::zero()
                                               : SubWeibullParams{0.0, v});
        spec.drift_mean.push_back(v);
        spec.drift_mean_sq.push_back(v * v);
    }
    spec.drift_declared_min = spec.drift_declared;
    spec.drift_mean_min = spec.drift_mean;
    spec.drift_mean_sq_min = spec.drift_mean_sq;
    spec.path_velocity = std::move(velocity);
    return spec;
}

AdvanceResult OnlineOperatorSpec::advance(long ell, Rng& rng) {
    const int n = base.partition.num_blocks();
    AdvanceResult result;
    result.sigma.assign(static_cast<std::size_t>(n), 0.0);
    result.sigma_min.assign(static_cast<std::size_t>(n), 0.0);
    if (drift == DriftKind::none) return result;

    for (int i = 0; i < n; ++i) {
        const int d = base.partition.dims[static_cast<std::size_t>(i)];
        const int off = base.partition.offsets[static_cast<std::size_t>(i)];
        Eigen::VectorXd w;
        if (drift == DriftKind::random_walk) {
            w = sample_noise(increments[static_cast<std::size_t>(i)], d, ell, rng);
        } else {
            w = path_velocity.segment(off, d);
        }
        if (base.kind == OperatorKind::km_averaged_projection) {
            // Rigid translation of the target box, clipped so it stays inside
            // the domain; per axis |t| <= |w|, so declared params stay valid.
            Eigen::VectorXd t(d);
            for (int j = 0; j < d; ++j) {
                const double lo_slack = base.domain->lo[off + j] - base.target->lo[off + j];
                const double hi_slack = base.domain->hi[off + j] - base.target->hi[off + j];
                t[j] = std::min(std::max(w[j], lo_slack), hi_slack);
            }
            Box old_block{base.target->lo.segment(off, d), base.target->hi.segment(off, d)};
            base.target->lo.segment(off, d) += t;
            base.target->hi.segment(off, d) += t;
            base.fixed_point.segment(off, d) += t;
            Box new_block{base.target->lo.segment(off, d), base.target->hi.segment(off, d)};
            result.sigma[static_cast<std::size_t>(i)] =
                set_distance(old_block, new_block, SetDistanceMode::hausdorff);
            result.sigma_min[static_cast<std::size_t>(i)] =
                set_distance(old_block, new_block, SetDistanceMode::minimal);
        } else {
            // Affine kinds: shifting the fixed point by w means adding
            // (I - M) w to the offset; the class constants are untouched.
            base.block_offset[static_cast<std::size_t>(i)] +=
                w - base.block_matrix[static_cast<std::size_t>(i)] * w;
            base.fixed_point.segment(off, d) += w;
            result.sigma[static_cast<std::size_t>(i)] = w.norm();
            result.sigma_min[static_cast<std::size_t>(i)] = w.norm();
        }
    }
    return result;
}

}  // namespace opfix
