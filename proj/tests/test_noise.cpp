#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "opfix/noise.hpp"
#include "opfix/rng.hpp"

using namespace opfix;

TEST_CASE("gaussian certified constants") {
    const NoiseSpec g1 = make_gaussian_noise(0.5, 1);
    CHECK(g1.declared.theta == 0.5);
    CHECK(g1.declared.nu == 0.5);
    CHECK(g1.mean_norm == doctest::Approx(0.5 * std::sqrt(2.0 / M_PI)).epsilon(1e-14));
    CHECK(g1.mean_sq_norm == doctest::Approx(0.25).epsilon(1e-15));

    const NoiseSpec g3 = make_gaussian_noise(0.7, 3);
    CHECK(g3.declared.theta == 0.5);
    // Vector-norm rule: 2^{1/2} sqrt(3) * 0.7.
    CHECK(g3.declared.nu ==
          doctest::Approx(std::sqrt(2.0) * std::sqrt(3.0) * 0.7).epsilon(1e-14));
    // E chi_3 = 2 sqrt(2/pi).
    CHECK(g3.mean_norm ==
          doctest::Approx(0.7 * 2.0 * std::sqrt(2.0 / M_PI)).epsilon(1e-13));
    CHECK(g3.mean_sq_norm == doctest::Approx(3.0 * 0.49).epsilon(1e-14));
}

TEST_CASE("weibull certified constants") {
    const NoiseSpec w = make_weibull_noise(0.8, 1.0, 1);
    CHECK(w.declared.theta == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(w.mean_norm == doctest::Approx(std::tgamma(2.25)).epsilon(1e-13));
    CHECK(w.mean_sq_norm == doctest::Approx(std::tgamma(3.5)).epsilon(1e-13));
    // The envelope is attained at k = 1 for these shapes, so nu = E W.
    CHECK(w.declared.nu == doctest::Approx(std::tgamma(2.25)).epsilon(1e-6));

    const NoiseSpec w2 = make_weibull_noise(2.0, 0.5, 2);
    CHECK(w2.declared.theta == 0.5);
    CHECK(w2.mean_sq_norm == doctest::Approx(2.0 * 0.25 * std::tgamma(2.0)).epsilon(1e-13));
    // d > 1 mean is the Jensen upper bound sqrt(E||e||^2).
    CHECK(w2.mean_norm == doctest::Approx(std::sqrt(w2.mean_sq_norm)).epsilon(1e-15));
}

TEST_CASE("bounded uniform certified constants") {
    const NoiseSpec u = make_bounded_uniform_noise(0.3, 2);
    CHECK(u.declared.theta == 0.0);
    CHECK(u.declared.nu == doctest::Approx(0.3 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(u.mean_sq_norm == doctest::Approx(2.0 * 0.09 / 3.0).epsilon(1e-15));
}

TEST_CASE("factory validation") {
    CHECK_THROWS_AS(make_gaussian_noise(0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_gaussian_noise(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_weibull_noise(0.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_bounded_uniform_noise(-1.0, 1), std::invalid_argument);
    NoiseSchedule bad{ScheduleKind::geometric_decay, 1.0};
    CHECK_THROWS_AS(make_gaussian_noise(1.0, 1, bad), std::invalid_argument);
}

TEST_CASE("sampled moments match certified constants") {
    Rng rng(2024, Rng::kNoiseStream);
    const NoiseSpec g = make_gaussian_noise(0.5, 1);
    const long n = 400000;
    double sum = 0.0, sum_sq = 0.0;
    for (long t = 0; t < n; ++t) {
        const double mag = sample_noise(g, 1, 0, rng).norm();
        sum += mag;
        sum_sq += mag * mag;
    }
    CHECK(sum / n == doctest::Approx(g.mean_norm).epsilon(0.01));
    CHECK(sum_sq / n == doctest::Approx(g.mean_sq_norm).epsilon(0.02));
}

TEST_CASE("weibull sampling is sign-symmetric with the declared magnitude") {
    Rng rng(99, Rng::kNoiseStream);
    const NoiseSpec w = make_weibull_noise(0.8, 1.0, 1);
    const long n = 200000;
    double sum_signed = 0.0, sum_abs = 0.0;
    for (long t = 0; t < n; ++t) {
        const double e = sample_noise(w, 1, 0, rng)[0];
        sum_signed += e;
        sum_abs += std::abs(e);
    }
    CHECK(std::abs(sum_signed / n) < 0.02);
    CHECK(sum_abs / n == doctest::Approx(w.mean_norm).epsilon(0.02));
}

TEST_CASE("bounded uniform stays inside the box") {
    Rng rng(5, Rng::kNoiseStream);
    const NoiseSpec u = make_bounded_uniform_noise(0.3, 2);
    for (long t = 0; t < 20000; ++t) {
        const Eigen::VectorXd e = sample_noise(u, 2, 0, rng);
        CHECK(e.lpNorm<Eigen::Infinity>() <= 0.3);
        CHECK(e.norm() <= u.declared.nu);
    }
}

TEST_CASE("zero noise consumes no randomness") {
    Rng a(7, Rng::kNoiseStream), b(7, Rng::kNoiseStream);
    const NoiseSpec z = make_zero_noise(3);
    for (int t = 0; t < 5; ++t) {
        const Eigen::VectorXd e = sample_noise(z, 3, t, a);
        CHECK(e.norm() == 0.0);
    }
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("geometric decay scales draws and constants together") {
    NoiseSchedule sched{ScheduleKind::geometric_decay, 0.9};
    const NoiseSpec gd = make_gaussian_noise(0.5, 2, sched);
    const NoiseSpec gc = make_gaussian_noise(0.5, 2);
    const double m3 = std::pow(0.9, 3.0);

    CHECK(gd.declared_at(3).nu == doctest::Approx(gc.declared.nu * m3).epsilon(1e-14));
    CHECK(gd.declared_at(3).theta == 0.5);
    CHECK(gd.mean_norm_at(3) == doctest::Approx(gc.mean_norm * m3).epsilon(1e-14));
    CHECK(gd.mean_sq_norm_at(3) ==
          doctest::Approx(gc.mean_sq_norm * m3 * m3).epsilon(1e-14));

    Rng r1(11, Rng::kNoiseStream), r2(11, Rng::kNoiseStream);
    const Eigen::VectorXd scaled = sample_noise(gd, 2, 3, r1);
    const Eigen::VectorXd base = sample_noise(gc, 2, 3, r2);
    CHECK((scaled - m3 * base).norm() < 1e-12);
}

TEST_CASE("sample_noise rejects a dimension mismatch") {
    Rng rng(1, Rng::kNoiseStream);
    const NoiseSpec g = make_gaussian_noise(1.0, 2);
    CHECK_THROWS_AS(sample_noise(g, 3, 0, rng), std::invalid_argument);
}

TEST_CASE("moment audit accepts conforming samplers") {
    Rng rng(31, Rng::kNoiseStream);
    const MomentReport g = verify_moment_bound(make_gaussian_noise(1.0, 1), 1, 100000, 8.0, rng);
    CHECK(g.max_ratio <= 1.02);

    Rng rng2(32, Rng::kNoiseStream);
    const MomentReport u =
        verify_moment_bound(make_bounded_uniform_noise(0.5, 2), 2, 50000, 8.0, rng2);
    CHECK(u.max_ratio <= 1.0 + 1e-12);
}

TEST_CASE("moment audit flags an undersized declaration") {
    NoiseSpec bad = make_gaussian_noise(1.0, 1);
    bad.declared.nu *= 0.5;
    Rng rng(33, Rng::kNoiseStream);
    const MomentReport r = verify_moment_bound(bad, 1, 100000, 8.0, rng);
    CHECK(r.max_ratio > 1.4);  // the k = 1 ratio alone is ~1.6
}
