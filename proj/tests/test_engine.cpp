#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "opfix/engine.hpp"

using namespace opfix;

namespace {

IterationConfig scalar_config(double p, long horizon, std::uint64_t seed) {
    IterationConfig config;
    config.op = make_static_online(make_scalar_affine(0.5, 1.0));
    config.update.probabilities = {p};
    config.noise = {make_zero_noise(1)};
    config.horizon = horizon;
    config.initial_point = Eigen::VectorXd::Zero(1);
    config.seed = seed;
    return config;
}

}  // namespace

TEST_CASE("full-update zero-noise run is the exact deterministic iteration") {
    const Trajectory traj = run(scalar_config(1.0, 50, 1));
    for (long ell = 0; ell <= 50; ++ell) {
        CHECK(traj.dist_at(ell, 0) ==
              doctest::Approx(2.0 * std::pow(0.5, static_cast<double>(ell)))
                  .epsilon(1e-12));
    }
    CHECK(traj.clamp_events == 0);
}

TEST_CASE("zero-noise distance depends only on the update count") {
    const Trajectory traj = run(scalar_config(0.4, 200, 99));
    for (long ell = 0; ell <= 200; ++ell) {
        const double expected = 2.0 * std::pow(0.5, static_cast<double>(traj.beta(ell, 0)));
        CHECK(traj.dist_at(ell, 0) == doctest::Approx(expected).epsilon(1e-12));
    }
    // beta counts exactly the set mask bits.
    long count = 0;
    for (long ell = 0; ell < 200; ++ell) {
        CHECK(traj.beta(ell, 0) == count);
        count += traj.mask[traj.step_index(ell, 0)];
    }
    CHECK(traj.beta(200, 0) == count);
}

TEST_CASE("residual summands are masked squared residuals") {
    const Trajectory traj = run(scalar_config(0.6, 100, 5));
    for (long ell = 0; ell < 100; ++ell) {
        const std::size_t s = traj.step_index(ell, 0);
        // For T x = x/2 + 1: ||x - Tx||^2 = (dist/2)^2.
        const double half_dist = 0.5 * traj.dist_at(ell, 0);
        CHECK(traj.raw_residual_sq[s] ==
              doctest::Approx(half_dist * half_dist).epsilon(1e-12));
        CHECK(traj.fpr_summand[s] ==
              (traj.mask[s] ? traj.raw_residual_sq[s] : 0.0));
    }
    // Cumulative average matches a direct sum.
    double acc = 0.0;
    for (long ell = 0; ell < 100; ++ell) {
        acc += traj.fpr_summand[traj.step_index(ell, 0)];
        CHECK(traj.cumulative_fpr(ell, 0) ==
              doctest::Approx(acc / static_cast<double>(ell + 1)).epsilon(1e-14));
    }
}

TEST_CASE("update counts stay inside a 4-sigma band") {
    const long horizon = 2000;
    const double p = 0.3;
    const Trajectory traj = run(scalar_config(p, horizon, 1234));
    const double mean = horizon * p;
    const double sd = std::sqrt(horizon * p * (1.0 - p));
    const double count = static_cast<double>(traj.beta(horizon, 0));
    CHECK(count > mean - 4.0 * sd);
    CHECK(count < mean + 4.0 * sd);
}

TEST_CASE("identical seeds reproduce the trajectory bit for bit") {
    IterationConfig config = scalar_config(0.5, 300, 31);
    config.noise = {make_gaussian_noise(0.1, 1)};
    const Trajectory a = run(config);
    const Trajectory b = run(config);
    CHECK(a.dist == b.dist);
    CHECK(a.mask == b.mask);
    CHECK(a.fpr_summand == b.fpr_summand);
    CHECK(a.sigma == b.sigma);
    REQUIRE(a.iterates.size() == b.iterates.size());
    for (std::size_t j = 0; j < a.iterates.size(); ++j)
        CHECK((a.iterates[j] - b.iterates[j]).norm() == 0.0);

    config.seed = 32;
    const Trajectory c = run(config);
    CHECK(a.dist != c.dist);
}

TEST_CASE("fully coupled masks agree across blocks") {
    IterationConfig config;
    Rng op_rng(900);
    config.op = make_static_online(
        make_random_affine_contraction(BlockPartition::uniform(3, 2), 0.8, op_rng));
    config.update.probabilities = {0.5, 0.5, 0.5};
    config.update.correlation = MaskCorrelation::fully_coupled;
    config.noise = std::vector<NoiseSpec>(3, make_zero_noise(2));
    config.horizon = 100;
    config.initial_point = Eigen::VectorXd::Zero(6);
    config.seed = 77;
    const Trajectory traj = run(config);
    for (long ell = 0; ell < 100; ++ell) {
        const auto first = traj.mask[traj.step_index(ell, 0)];
        CHECK(traj.mask[traj.step_index(ell, 1)] == first);
        CHECK(traj.mask[traj.step_index(ell, 2)] == first);
    }
}

TEST_CASE("unmasked blocks keep their value bit for bit") {
    IterationConfig config;
    Rng op_rng(901);
    config.op = make_static_online(
        make_random_affine_contraction(BlockPartition::uniform(2, 2), 0.7, op_rng));
    config.update.probabilities = {0.5, 0.5};
    config.noise = std::vector<NoiseSpec>(2, make_gaussian_noise(0.05, 2));
    config.horizon = 60;
    config.initial_point = Eigen::VectorXd::Zero(4);
    config.seed = 3;
    config.stride = 1;  // keep every iterate
    const Trajectory traj = run(config);
    REQUIRE(traj.iterates.size() == 61);
    for (long ell = 0; ell < 60; ++ell) {
        for (int i = 0; i < 2; ++i) {
            if (!traj.mask[traj.step_index(ell, i)]) {
                const auto& part = config.op.base.partition;
                CHECK((part.block(traj.iterates[ell + 1], i) -
                       part.block(traj.iterates[ell], i))
                          .norm() == 0.0);
            }
        }
    }
}

TEST_CASE("stride controls which iterates are stored") {
    IterationConfig config = scalar_config(1.0, 17, 2);
    config.stride = 5;
    const Trajectory traj = run(config);
    REQUIRE(traj.iterate_steps.size() == 5);
    CHECK(traj.iterate_steps[0] == 0);
    CHECK(traj.iterate_steps[1] == 5);
    CHECK(traj.iterate_steps[2] == 10);
    CHECK(traj.iterate_steps[3] == 15);
    CHECK(traj.iterate_steps[4] == 17);  // final iterate always kept
}

TEST_CASE("averaged runs clamp noisy iterates back into the domain") {
    IterationConfig config;
    BlockPartition part = BlockPartition::uniform(1, 2);
    Box domain, target;
    domain.lo = Eigen::VectorXd::Zero(2);
    domain.hi = Eigen::VectorXd::Ones(2);
    target.lo = Eigen::VectorXd::Constant(2, 0.2);
    target.hi = Eigen::VectorXd::Constant(2, 0.4);
    config.op = make_static_online(make_km_projection(part, domain, target, 0.5));
    config.update.probabilities = {1.0};
    config.noise = {make_bounded_uniform_noise(0.5, 2)};
    config.horizon = 200;
    config.initial_point = Eigen::VectorXd::Constant(2, 0.9);
    config.seed = 8;
    config.stride = 1;
    const Trajectory traj = run(config);
    CHECK(traj.clamp_events > 0);
    for (const auto& x : traj.iterates) CHECK(domain.contains(x, 1e-12));
}

TEST_CASE("path drift records constant displacements and path lengths") {
    IterationConfig config;
    BlockPartition part = BlockPartition::from_dims({1, 1});
    std::vector<Eigen::MatrixXd> a(2, Eigen::MatrixXd::Constant(1, 1, 0.5));
    std::vector<Eigen::VectorXd> b(2, Eigen::VectorXd::Constant(1, 1.0));
    Eigen::VectorXd velocity(2);
    velocity << 0.01, 0.03;
    config.op = make_path_online(make_affine_contraction(part, a, b), velocity);
    config.update.probabilities = {0.5, 0.5};
    config.noise = std::vector<NoiseSpec>(2, make_zero_noise(1));
    config.horizon = 50;
    config.initial_point = Eigen::VectorXd::Zero(2);
    config.seed = 21;
    const Trajectory traj = run(config);
    for (long ell = 0; ell < 50; ++ell) {
        CHECK(traj.sigma[traj.step_index(ell, 0)] == doctest::Approx(0.01).epsilon(1e-13));
        CHECK(traj.sigma[traj.step_index(ell, 1)] == doctest::Approx(0.03).epsilon(1e-13));
    }

    const double chi = 0.9;
    const PathLength lengths = weighted_path_length(traj, chi);
    const double factor = (1.0 - std::pow(chi, 50.0)) / (1.0 - chi);
    CHECK(lengths.weighted[0] == doctest::Approx(0.01 * factor).epsilon(1e-11));
    CHECK(lengths.weighted[1] == doctest::Approx(0.03 * factor).epsilon(1e-11));
    CHECK(lengths.plain[0] == doctest::Approx(0.01 * 50).epsilon(1e-12));

    // Static runs have identically zero drift.
    const Trajectory stat = run(scalar_config(0.5, 50, 4));
    const PathLength zero = weighted_path_length(stat, chi);
    CHECK(zero.weighted[0] == 0.0);
    CHECK(zero.plain[0] == 0.0);
}

TEST_CASE("config validation rejects malformed setups") {
    IterationConfig config = scalar_config(1.0, 10, 1);
    CHECK_NOTHROW(config.validate());

    IterationConfig bad = config;
    bad.update.probabilities = {0.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = config;
    bad.update.probabilities = {1.5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = config;
    bad.horizon = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = config;
    bad.noise.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = config;
    bad.noise = {make_gaussian_noise(0.1, 2)};  // block is 1-dimensional
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = config;
    bad.initial_point = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = config;
    bad.stride = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
