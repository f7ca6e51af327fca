#pragma once

// Block-separable operators with certified contraction/averagedness class.
//
// Every library operator is block-diagonal: block i of the output depends
// only on block i of the input. That makes the blockwise class inequality
// hold with the same constant that certifies the whole map, and it keeps
// fixed points analytically trackable, which the bound evaluators and the
// Monte Carlo harness both rely on.
//
// Kinds:
//   affine-contraction       x_i -> A_i x_i + b_i,      ||A_i|| < 1
//   gradient-step            x_i -> x_i - g (Q_i x_i - c_i), Q_i SPD
//   projected-gradient-step  gradient step followed by a box projection
//                            (diagonal Q_i so the fixed point stays exact)
//   km-averaged-projection   x_i -> (1-w) x_i + w proj_B(x_i), Fix = box B
//
// The first two are contractive with zeta computed at construction; the last
// two are averaged with alpha derived from the step/weight. Online variants
// translate the fixed point (or fixed-set box) each iteration and report the
// realized displacement exactly.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opfix/noise.hpp"
#include "opfix/rng.hpp"

namespace opfix {

struct BlockPartition {
    std::vector<int> dims;
    std::vector<int> offsets;  // prefix sums; offsets[num_blocks()] == total_dim()

    static BlockPartition from_dims(std::vector<int> dims);
    static BlockPartition uniform(int num_blocks, int block_dim);

    int num_blocks() const { return static_cast<int>(dims.size()); }
    int total_dim() const { return offsets.back(); }

    Eigen::VectorBlock<const Eigen::VectorXd> block(const Eigen::VectorXd& x, int i) const {
        return x.segment(offsets[static_cast<std::size_t>(i)],
                         dims[static_cast<std::size_t>(i)]);
    }
    Eigen::VectorBlock<Eigen::VectorXd> block(Eigen::VectorXd& x, int i) const {
        return x.segment(offsets[static_cast<std::size_t>(i)],
                         dims[static_cast<std::size_t>(i)]);
    }
};

struct Box {
    Eigen::VectorXd lo, hi;  // lo <= hi componentwise, same length

    int dim() const { return static_cast<int>(lo.size()); }
    double diameter() const { return (hi - lo).norm(); }
    bool is_singleton() const { return lo == hi; }
    bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
    Eigen::VectorXd clamp(const Eigen::VectorXd& x) const;
};

/// Throws std::invalid_argument on malformed boxes (empty or lo > hi).
void validate(const Box& box);

enum class SetDistanceMode { minimal, hausdorff };

/// Exact distance between axis-aligned boxes. minimal is the closest-pair
/// distance (zero when the boxes intersect); hausdorff the larger of the two
/// directed sup-inf distances. Both compose per-axis values in the Euclidean
/// norm, which is exact for boxes.
double set_distance(const Box& a, const Box& b, SetDistanceMode mode);

enum class OperatorKind {
    affine_contraction,
    gradient_step,
    projected_gradient_step,
    km_averaged_projection,
};
enum class OperatorClass { contractive, averaged };

std::string to_string(OperatorKind k);
std::string to_string(OperatorClass c);

struct OperatorSpec {
    OperatorKind kind = OperatorKind::affine_contraction;
    OperatorClass op_class = OperatorClass::contractive;
    BlockPartition partition;

    double zeta = 0.0;   // contractive class: max over blocks of the certified rate
    double alpha = 0.0;  // averaged class constant

    // Per-block affine data: the linear part M_i and offset v_i of the update
    // before any projection (identity/empty for km-averaged-projection).
    std::vector<Eigen::MatrixXd> block_matrix;
    std::vector<Eigen::VectorXd> block_offset;

    double step_size = 0.0;  // gradient kinds
    double km_weight = 0.0;  // km kind

    std::optional<Box> domain;  // averaged kinds: iterates are kept inside
    std::optional<Box> target;  // km kind: the fixed-point set

    Eigen::VectorXd fixed_point;          // tracked reference fixed point
    std::vector<double> domain_diameter;  // per-block box diagonal (averaged kinds)

    bool is_averaged() const { return op_class == OperatorClass::averaged; }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    void apply_into(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;

    /// ||x_i - T_i x|| per block.
    std::vector<double> fixed_point_residual(const Eigen::VectorXd& x) const;

    /// Anchor for distance metrics: the nearest fixed point to `from` for
    /// box fixed sets, the tracked fixed point otherwise.
    Eigen::VectorXd reference_fixed_point(const Eigen::VectorXd& from) const;

    /// Distance from block i of x to the block's fixed point (set).
    double block_distance(const Eigen::VectorXd& x, int i) const;
};

/// Spectral norm by power iteration on A^T A, relative tolerance 1e-12.
double spectral_norm(const Eigen::MatrixXd& a);

// --- constructors (validate class constants, compute fixed points) ---

OperatorSpec make_scalar_affine(double a, double b);
OperatorSpec make_affine_contraction(BlockPartition partition,
                                     std::vector<Eigen::MatrixXd> a,
                                     std::vector<Eigen::VectorXd> b);
OperatorSpec make_gradient_step(BlockPartition partition,
                                std::vector<Eigen::MatrixXd> q,
                                std::vector<Eigen::VectorXd> c, double step);
/// Diagonal quadratics only, so the constrained fixed point is exact.
OperatorSpec make_projected_gradient_step(BlockPartition partition,
                                          std::vector<Eigen::VectorXd> q_diag,
                                          std::vector<Eigen::VectorXd> c, double step,
                                          Box domain);
OperatorSpec make_km_projection(BlockPartition partition, Box domain, Box target,
                                double weight);

// --- seeded recipes ---

/// Haar-ish random orthogonal matrix (QR of a Gaussian matrix, signs fixed).
Eigen::MatrixXd random_orthogonal(int d, Rng& rng);

/// Per-block random A_i with top singular value exactly `zeta`; fixed point
/// drawn uniformly from [-1, 1]^d.
OperatorSpec make_random_affine_contraction(BlockPartition partition, double zeta,
                                            Rng& rng);

/// Per-block random SPD Q_i with spectrum exactly [lambda_max/condition,
/// lambda_max]; fixed point drawn uniformly from [-1, 1]^d.
OperatorSpec make_random_spd_gradient_step(BlockPartition partition, double lambda_max,
                                           double condition, double step, Rng& rng);

struct ClassReport {
    double max_violation = 0.0;
};

/// Samples points (a ball of radius `sample_radius` around the fixed point
/// for contractive specs, the domain box for averaged ones) and reports the
/// worst violation of the declared class inequality. Conforming specs stay
/// at numerical zero.
ClassReport verify_class(const OperatorSpec& spec, long num_samples, Rng& rng,
                         double sample_radius = 10.0);

// --- online (time-varying) operators ---

enum class DriftKind { none, random_walk, deterministic_path };

std::string to_string(DriftKind k);

struct AdvanceResult {
    std::vector<double> sigma;      // realized fixed-point displacement per block
    std::vector<double> sigma_min;  // minimal set displacement (== sigma off-box)
};

struct OnlineOperatorSpec {
    OperatorSpec base;  // current instantiation; advance() mutates it in place
    DriftKind drift = DriftKind::none;

    // random-walk drift: per-block increment samplers; their certified
    // constants double as the declared drift parameters (phi, gamma_i).
    std::vector<NoiseSpec> increments;

    Eigen::VectorXd path_velocity;  // deterministic-path drift, full dimension

    std::vector<SubWeibullParams> drift_declared;  // (phi, gamma_i) per block
    std::vector<double> drift_mean;                // >= E sigma_i per block
    std::vector<double> drift_mean_sq;             // >= E sigma_i^2 per block

    // Constants for the minimal set displacement sigma_min. They default to
    // the maximal ones; box fixed sets with increments small enough that
    // consecutive boxes always overlap get exact zeros.
    std::vector<SubWeibullParams> drift_declared_min;
    std::vector<double> drift_mean_min;
    std::vector<double> drift_mean_sq_min;

    bool is_static() const { return drift == DriftKind::none; }

    /// Moves the fixed point (or fixed-set box) for step ell and returns the
    /// realized displacement per block. Box targets translate rigidly and are
    /// held inside the domain, so realized displacement never exceeds the raw
    /// increment and the declared drift parameters stay valid.
    AdvanceResult advance(long ell, Rng& rng);
};

OnlineOperatorSpec make_static_online(OperatorSpec base);
OnlineOperatorSpec make_random_walk_online(OperatorSpec base,
                                           std::vector<NoiseSpec> increments);
OnlineOperatorSpec make_path_online(OperatorSpec base, Eigen::VectorXd velocity);

}  // namespace opfix
