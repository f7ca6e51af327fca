// End-to-end acceptance harness. Each criterion prints exactly one
// [PASS]/[FAIL] line; the process exits nonzero if any criterion fails.
//
// argv[1] (optional, supplied by ctest) is the path to the opfix binary,
// used by the command-level reproducibility criterion.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "opfix/bounds.hpp"
#include "opfix/engine.hpp"
#include "opfix/montecarlo.hpp"
#include "opfix/report_io.hpp"

using namespace opfix;

namespace {

int failures = 0;

void report(int n, const std::string& what, bool ok, const std::string& detail = "") {
    std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", n, what.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

IterationConfig scalar_config(double a, double b, double p, NoiseSpec noise,
                              long horizon, std::uint64_t seed = 1) {
    IterationConfig config;
    config.op = make_static_online(make_scalar_affine(a, b));
    config.update.probabilities = {p};
    config.noise = {std::move(noise)};
    config.horizon = horizon;
    config.initial_point = Eigen::VectorXd::Zero(1);
    config.seed = seed;
    return config;
}

BoundCurve curve_for(const IterationConfig& config, Proposition prop,
                     std::optional<double> delta = {}, std::optional<double> eps = {},
                     SigmaVariant sigma = SigmaVariant::maximal) {
    CurveRequest request;
    request.proposition = prop;
    request.delta = delta;
    request.eps = eps;
    request.sigma = sigma;
    return build_curve(config, request, 0);
}

double knorm_oracle(double zeta, double p, long ell, double k) {
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> log_terms(static_cast<std::size_t>(ell) + 1);
    for (long j = 0; j <= ell; ++j) {
        double lt = std::lgamma(ell + 1.0) - std::lgamma(j + 1.0) -
                    std::lgamma(ell - j + 1.0) + j * std::log(p) +
                    (ell - j) * std::log1p(-p) + j * k * std::log(zeta);
        log_terms[static_cast<std::size_t>(j)] = lt;
        peak = std::max(peak, lt);
    }
    double sum = 0.0;
    for (double lt : log_terms) sum += std::exp(lt - peak);
    return std::exp((peak + std::log(sum)) / k);
}

double binomial_lower_tail(long ell, double p, double threshold) {
    if (p == 1.0) return threshold >= ell ? 1.0 : 0.0;
    double total = 0.0;
    for (long j = 0; j <= ell && j <= threshold; ++j) {
        total += std::exp(std::lgamma(ell + 1.0) - std::lgamma(j + 1.0) -
                          std::lgamma(ell - j + 1.0) + j * std::log(p) +
                          (ell - j) * std::log1p(-p));
    }
    return total;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

int run_command(const std::string& command) {
    const int status = std::system(command.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------- criteria

void criterion_1() {
    const Trajectory traj = run(scalar_config(0.5, 1.0, 1.0, make_zero_noise(1), 50));
    double worst = 0.0;
    for (long ell = 0; ell <= 50; ++ell) {
        const double expected = 2.0 * std::pow(0.5, static_cast<double>(ell));
        worst = std::max(worst, std::abs(traj.dist_at(ell, 0) - expected) / expected);
    }
    report(1, "deterministic full-update run recovers the exact geometric rate",
           worst <= 1e-12, "max rel err " + fmt(worst));
}

void criterion_2() {
    Rng rng(12345);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const double zeta = rng.uniform(0.05, 0.95);
        const double p = rng.uniform(0.05, 1.0);
        const long ell = 1 + static_cast<long>(rng.next_u64() % 60);
        const double k = rng.uniform(1.0, 8.0);
        const double got = knorm_zeta_beta(zeta, p, ell, k);
        const double want = knorm_oracle(zeta, p, ell, k);
        worst = std::max(worst, std::abs(got - want) / want);
    }
    report(2, "binomial k-norm matches a direct mixture-sum oracle on 100 random tuples",
           worst <= 1e-12, "max rel err " + fmt(worst));
}

void criterion_3() {
    bool ok = true;
    std::string detail;
    double worst_gap = 0.0;
    for (double zeta : {0.5, 0.9}) {
        for (double p : {0.25, 0.5, 1.0}) {
            if (eta(zeta, p, 0) != 1.0) ok = false;
            double last = 1.0;
            for (long ell = 1; ell <= 500; ++ell) {
                const double value = eta(zeta, p, ell);
                if (value >= 1.0 || value > last + 1e-12) {
                    ok = false;
                    detail = "monotonicity broke at zeta=" + fmt(zeta) + " p=" + fmt(p) +
                             " ell=" + std::to_string(ell);
                }
                last = value;
            }
            // 1e6-point brute-force grid at a representative iteration.
            const long ell = 100;
            const double k_hi = std::max(1000.0, 10.0 * ell);
            double brute = 0.0;
            const int points = 1000000;
            for (int j = 0; j < points; ++j) {
                const double k = std::exp(std::log(k_hi) * j / (points - 1.0));
                brute = std::max(brute, knorm_zeta_beta(zeta, p, ell, k) / std::sqrt(k));
            }
            const double gap = std::abs(eta(zeta, p, ell) - brute);
            worst_gap = std::max(worst_gap, gap);
            if (gap > 1e-6) {
                ok = false;
                detail = "brute-force gap " + fmt(gap) + " at zeta=" + fmt(zeta) +
                         " p=" + fmt(p);
            }
        }
    }
    report(3, "eta is 1 at 0, below 1 after, nonincreasing, and matches brute force",
           ok, detail.empty() ? "max brute-force gap " + fmt(worst_gap) : detail);
}

// Shared ensemble for criteria 4-7: zeta = 0.8, p = 0.5, gaussian noise
// s = 0.05, d0 = 2, M = 5000, L = 500.
struct ContractiveStudy {
    IterationConfig config;
    EnsembleStats stats;
    BoundCurve mean_curve, hp_10, hp_01, alt_01, markov_01, radius_curve;
    CoverageRecord mean_rec, hp_10_rec, hp_01_rec, alt_rec, markov_rec, radius_rec;
};

ContractiveStudy make_contractive_study() {
    ContractiveStudy s;
    s.config = scalar_config(0.8, 0.4, 0.5, make_gaussian_noise(0.05, 1), 500);
    s.stats = run_ensemble(s.config, 5000, 1);
    s.mean_curve = curve_for(s.config, Proposition::mean_contractive);
    s.hp_10 = curve_for(s.config, Proposition::hp_contractive, 0.1);
    s.hp_01 = curve_for(s.config, Proposition::hp_contractive, 0.01);
    s.alt_01 = curve_for(s.config, Proposition::hp_contractive_alt, 0.01);
    s.markov_01 = curve_for(s.config, Proposition::markov_contractive, 0.01);
    s.radius_curve = curve_for(s.config, Proposition::neighborhood_limsup);
    s.mean_rec = check_coverage(s.stats, s.mean_curve);
    s.hp_10_rec = check_coverage(s.stats, s.hp_10);
    s.hp_01_rec = check_coverage(s.stats, s.hp_01);
    s.alt_rec = check_coverage(s.stats, s.alt_01);
    s.markov_rec = check_coverage(s.stats, s.markov_01);
    s.radius_rec = check_coverage(s.stats, s.radius_curve);
    return s;
}

void criterion_4(const ContractiveStudy& s) {
    const bool ok = s.mean_rec.passed && s.radius_rec.passed;
    report(4, "mean distance bound and asymptotic radius cover a 5000-trial ensemble", ok,
           "mean margin " + fmt(s.mean_rec.worst_margin) + ", tail margin " +
               fmt(s.radius_rec.worst_margin));
}

void criterion_5(const ContractiveStudy& s) {
    BoundCurve broken = s.hp_10;
    for (double& v : broken.values) v *= 0.1;
    const CoverageRecord broken_rec = check_coverage(s.stats, broken);
    const bool ok = s.hp_10_rec.passed && s.hp_01_rec.passed && !broken_rec.passed;
    report(5,
           "high-probability curves cover at delta 0.1 and 0.01; a 10x-shrunk curve fails",
           ok,
           "coverage margins " + fmt(s.hp_10_rec.worst_margin) + " / " +
               fmt(s.hp_01_rec.worst_margin) + ", control margin " +
               fmt(broken_rec.worst_margin));
}

void criterion_6(const ContractiveStudy& s) {
    bool below = true;
    long first_bad = -1;
    for (long ell = 200; ell <= 500; ++ell) {
        if (!(s.hp_01.values[static_cast<std::size_t>(ell)] <
              s.alt_01.values[static_cast<std::size_t>(ell)])) {
            below = false;
            first_bad = ell;
            break;
        }
    }
    const bool ok = s.alt_rec.passed && s.hp_01_rec.passed && below;
    report(6, "both high-probability forms cover; the k-norm form is tighter from ell=200",
           ok,
           below ? "gap at ell=500: " + fmt(s.alt_01.values[500] - s.hp_01.values[500])
                 : "not below at ell=" + std::to_string(first_bad));
}

void criterion_7(const ContractiveStudy& s) {
    bool below = true;
    long first_bad = -1;
    for (long ell = 10; ell <= 500; ++ell) {
        if (!(s.hp_01.values[static_cast<std::size_t>(ell)] <
              s.markov_01.values[static_cast<std::size_t>(ell)])) {
            below = false;
            first_bad = ell;
            break;
        }
    }
    const bool ok = below && s.markov_rec.passed && s.hp_01_rec.passed;
    report(7, "log(1/delta) beats 1/delta: the tail curve undercuts Markov from ell=10",
           ok,
           below ? "ratio at ell=500: " + fmt(s.hp_01.values[500] / s.markov_01.values[500])
                 : "not below at ell=" + std::to_string(first_bad));
}

IterationConfig km_config(NoiseSpec noise, long horizon) {
    IterationConfig config;
    BlockPartition part = BlockPartition::uniform(1, 2);
    Box domain, target;
    domain.lo = Eigen::VectorXd::Zero(2);
    domain.hi = Eigen::VectorXd::Ones(2);
    target.lo = Eigen::VectorXd::Constant(2, 0.2);
    target.hi = Eigen::VectorXd::Constant(2, 0.4);
    config.op = make_static_online(make_km_projection(part, domain, target, 0.5));
    config.update.probabilities = {0.5};
    config.noise = {std::move(noise)};
    config.horizon = horizon;
    config.initial_point = Eigen::VectorXd::Constant(2, 0.9);
    config.seed = 1;
    return config;
}

void criterion_8() {
    // Part 1: mean cumulative residual bound covers under bounded noise.
    IterationConfig noisy = km_config(make_bounded_uniform_noise(0.02, 2), 500);
    const EnsembleStats stats = run_ensemble(noisy, 5000, 1);
    const CoverageRecord rec =
        check_coverage(stats, curve_for(noisy, Proposition::mean_averaged_fpr));

    // Part 2: with no noise the cumulative residual decays like 1/(ell+1).
    IterationConfig clean = km_config(make_zero_noise(2), 500);
    const EnsembleStats clean_stats = run_ensemble(clean, 1000, 2);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    long count = 0;
    for (long ell = 50; ell <= 499; ++ell) {
        const double x = std::log(static_cast<double>(ell + 1));
        const double y = std::log(clean_stats.mean_fpr_at(ell, 0));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    const bool fit_ok = slope >= -1.1 && slope <= -0.9;
    report(8, "averaged residual bound covers; noiseless decay exponent is -1",
           rec.passed && fit_ok,
           "mean margin " + fmt(rec.worst_margin) + ", fitted exponent " + fmt(slope));
}

void criterion_9() {
    // Part 1: the large-deviation delta dominates the exact binomial tail.
    bool dominates = true;
    std::string where;
    for (double p : {0.3, 0.5, 0.9}) {
        for (double frac : {0.25, 0.5, 0.75, 1.0}) {
            const double eps = frac * p;
            for (long ell = 1; ell <= 1000; ell += 27) {
                const double exact = binomial_lower_tail(ell, p, ell * (p - eps));
                if (sanov_delta(p, eps, ell) < exact * (1.0 - 1e-9)) {
                    dominates = false;
                    where = "p=" + fmt(p) + " eps=" + fmt(eps) + " ell=" + std::to_string(ell);
                }
            }
        }
    }
    if (sanov_delta(1.0, 1.0, 10) != 0.0) dominates = false;

    // Part 2: p = 1/2, eps = 1/2 collapses to 2^{-ell} exactly.
    double worst = 0.0;
    for (long ell = 1; ell <= 1000; ell += 53) {
        const double exact = std::exp2(-static_cast<double>(ell));
        worst = std::max(worst,
                         std::abs(sanov_delta(0.5, 0.5, ell) - exact) / exact);
    }

    // Part 3: trajectory coverage of the starvation rate at ell in {50, 200}.
    IterationConfig config = scalar_config(0.9, 0.2, 0.5, make_zero_noise(1), 200);
    const EnsembleStats stats = run_ensemble(config, 10000, 3);
    const CoverageRecord rec = check_coverage(
        stats, curve_for(config, Proposition::sanov_no_noise, {}, 0.2));
    const auto& grid = rec.grid;
    const bool has_points =
        std::find(grid.begin(), grid.end(), 50L) != grid.end() &&
        std::find(grid.begin(), grid.end(), 200L) != grid.end();

    const bool ok = dominates && worst <= 1e-11 && rec.passed && has_points;
    report(9, "starvation bounds dominate exact binomial tails and cover trajectories",
           ok,
           !dominates ? "tail domination failed at " + where
                      : "2^-ell rel err " + fmt(worst) + ", coverage margin " +
                            fmt(rec.worst_margin));
}

void criterion_10() {
    NoiseSchedule decay{ScheduleKind::geometric_decay, 0.95};
    IterationConfig config =
        scalar_config(0.9, 0.2, 1.0, make_gaussian_noise(0.1, 1, decay), 500);
    const EnsembleStats stats = run_ensemble(config, 1000, 4);
    const std::size_t last = stats.dist_grid.size() - 1;
    double worst_final = 0.0;
    for (long t = 0; t < stats.trials; ++t)
        worst_final = std::max(worst_final, stats.dist_sample(last, 0, t));
    const CoverageRecord rec =
        check_coverage(stats, curve_for(config, Proposition::hp_contractive, 0.05));
    const bool ok = stats.dist_grid[last] == 500 && worst_final < 1e-3 && rec.passed;
    report(10, "geometrically vanishing noise drives every trial below 1e-3",
           ok, "worst final distance " + fmt(worst_final) + ", hp margin " +
                   fmt(rec.worst_margin));
}

void criterion_11() {
    IterationConfig config = scalar_config(0.8, 0.4, 0.5, make_gaussian_noise(0.05, 1), 500);
    config.op = make_random_walk_online(config.op.base,
                                        {make_gaussian_noise(0.01, 1)});
    const EnsembleStats stats = run_ensemble(config, 5000, 5);
    const CoverageRecord mean_rec =
        check_coverage(stats, curve_for(config, Proposition::mean_online_contractive));
    const CoverageRecord hp_rec = check_coverage(
        stats, curve_for(config, Proposition::hp_online_contractive, 0.05));

    // Zero-drift config: online curves equal the static ones bit for bit.
    IterationConfig static_config =
        scalar_config(0.8, 0.4, 0.5, make_gaussian_noise(0.05, 1), 500);
    const bool mean_match =
        curve_for(static_config, Proposition::mean_online_contractive).values ==
        curve_for(static_config, Proposition::mean_contractive).values;
    const bool hp_match =
        curve_for(static_config, Proposition::hp_online_contractive, 0.05).values ==
        curve_for(static_config, Proposition::hp_contractive, 0.05).values;

    const bool ok = mean_rec.passed && hp_rec.passed && mean_match && hp_match;
    report(11, "drifting-target tracking bounds cover; zero drift reproduces static curves",
           ok, "mean margin " + fmt(mean_rec.worst_margin) + ", hp margin " +
                   fmt(hp_rec.worst_margin) + (mean_match && hp_match
                                                   ? ", static curves identical"
                                                   : ", static curves DIFFER"));
}

void criterion_12() {
    // Singleton fixed set drifting by a bounded random walk.
    IterationConfig config;
    BlockPartition part = BlockPartition::uniform(1, 2);
    Box domain, target;
    domain.lo = Eigen::VectorXd::Zero(2);
    domain.hi = Eigen::VectorXd::Ones(2);
    target.lo = Eigen::VectorXd::Constant(2, 0.3);
    target.hi = target.lo;
    config.op = make_random_walk_online(make_km_projection(part, domain, target, 0.5),
                                        {make_bounded_uniform_noise(0.005, 2)});
    config.update.probabilities = {0.5};
    config.noise = {make_bounded_uniform_noise(0.02, 2)};
    config.horizon = 500;
    config.initial_point = Eigen::VectorXd::Constant(2, 0.9);
    config.seed = 1;

    const EnsembleStats stats = run_ensemble(config, 5000, 6);
    const CoverageRecord mean_rec =
        check_coverage(stats, curve_for(config, Proposition::mean_online_fpr));
    const CoverageRecord hp_rec =
        check_coverage(stats, curve_for(config, Proposition::hp_online_fpr, 0.05));

    // Point fixed sets admit only one displacement notion: the variants agree.
    const bool singleton_equal =
        curve_for(config, Proposition::mean_online_fpr, {}, {}, SigmaVariant::minimal)
            .values ==
        curve_for(config, Proposition::mean_online_fpr, {}, {}, SigmaVariant::maximal)
            .values;

    // A box target with small bounded increments separates the variants.
    IterationConfig boxed = config;
    Box wide_target;
    wide_target.lo = Eigen::VectorXd::Constant(2, 0.25);
    wide_target.hi = Eigen::VectorXd::Constant(2, 0.35);
    boxed.op = make_random_walk_online(
        make_km_projection(part, domain, wide_target, 0.5),
        {make_bounded_uniform_noise(0.005, 2)});
    const BoundCurve minimal =
        curve_for(boxed, Proposition::mean_online_fpr, {}, {}, SigmaVariant::minimal);
    const BoundCurve maximal =
        curve_for(boxed, Proposition::mean_online_fpr, {}, {}, SigmaVariant::maximal);
    bool ordered = true;
    for (std::size_t j = 0; j < minimal.values.size(); ++j)
        if (!(minimal.values[j] < maximal.values[j])) ordered = false;

    const bool ok = mean_rec.passed && hp_rec.passed && singleton_equal && ordered;
    report(12, "drifting-set residual bounds cover; sigma variants are ordered", ok,
           "mean margin " + fmt(mean_rec.worst_margin) + ", hp margin " +
               fmt(hp_rec.worst_margin) +
               (ordered ? ", minimal < maximal on a box target" : ", ORDERING FAILED"));
}

void criterion_13() {
    const std::vector<ClosureRule> rules = closure_audit(1000000, 1);
    bool ok = rules.size() == 9;
    int controls = 0;
    double worst_ratio = 0.0;
    std::string detail;
    for (const ClosureRule& rule : rules) {
        if (!rule.passed) {
            ok = false;
            detail = "rule '" + rule.name + "' misbehaved (max_ratio " +
                     fmt(rule.max_ratio) + ")";
        }
        if (rule.expect_violation) {
            ++controls;
            if (rule.max_ratio <= rule.limit) ok = false;
        } else {
            worst_ratio = std::max(worst_ratio, rule.max_ratio);
            if (rule.max_ratio > rule.limit) ok = false;
        }
    }
    if (controls != 1) {
        ok = false;
        detail = "expected exactly one negative control";
    }
    report(13, "closure rules certified at 1e6 samples; halved envelope flagged", ok,
           detail.empty() ? "worst conforming ratio " + fmt(worst_ratio) : detail);
}

void criterion_14(const char* binary) {
    if (binary == nullptr || !std::filesystem::exists(binary)) {
        report(14, "command-level reproducibility", false,
               "opfix binary path not supplied as argv[1]");
        return;
    }
    namespace fs = std::filesystem;
    const fs::path tmp = fs::temp_directory_path() / "opfix-acceptance";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const fs::path out = tmp / "out";

    nlohmann::json doc;
    doc["operator"] = {{"kind", "affine-contraction"}, {"recipe", "scalar"},
                       {"a", 0.8},                     {"b", 0.4}};
    doc["update"] = {{"probabilities", {0.5}}};
    doc["noise"] = nlohmann::json::array({{{"family", "gaussian"}, {"std", 0.05}}});
    doc["run"] = {{"horizon", 120}, {"trials", 300}, {"base-seed", 5},
                  {"initial-point", {0.0}}};
    doc["bounds"] = nlohmann::json::array(
        {{{"proposition", "mean-contractive"}},
         {{"proposition", "hp-contractive"}, {"delta", 0.1}}});
    doc["output"] = {{"directory", out.string()}, {"stride", 10}, {"csv-trials", 2}};
    const fs::path cfg = tmp / "config.json";
    std::ofstream(cfg) << doc.dump(2) << "\n";

    const std::string base_cmd =
        std::string(binary) + " simulate " + cfg.string() + " > /dev/null 2>&1";
    bool ok = run_command(base_cmd) == 0;
    const std::string traj1 = read_file(out / "trajectories.csv");
    const std::string bounds1 = read_file(out / "bounds.csv");
    const std::string report1 = read_file(out / "report.json");
    ok = ok && !traj1.empty() && !bounds1.empty() && !report1.empty();

    ok = ok && run_command(base_cmd) == 0;
    ok = ok && read_file(out / "trajectories.csv") == traj1;
    ok = ok && read_file(out / "bounds.csv") == bounds1;
    ok = ok && read_file(out / "report.json") == report1;

    // A different base seed changes the data but keeps every check passing.
    const fs::path out2 = tmp / "out-seeded";
    const std::string seeded_cmd = std::string(binary) + " simulate " + cfg.string() +
                                   " --seed 999 --out " + out2.string() +
                                   " > /dev/null 2>&1";
    const bool seeded_ok = run_command(seeded_cmd) == 0;
    const std::string traj2 = read_file(out2 / "trajectories.csv");
    ok = ok && seeded_ok && !traj2.empty() && traj2 != traj1;

    report(14, "simulate is byte-reproducible; reseeding changes data, not verdicts", ok);
    fs::remove_all(tmp);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        const ContractiveStudy study = make_contractive_study();
        criterion_4(study);
        criterion_5(study);
        criterion_6(study);
        criterion_7(study);
        criterion_8();
        criterion_9();
        criterion_10();
        criterion_11();
        criterion_12();
        criterion_13();
        criterion_14(argc > 1 ? argv[1] : nullptr);
    } catch (const std::exception& e) {
        std::printf("[FAIL] acceptance harness aborted: %s\n", e.what());
        return 1;
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all 14 criteria passed\n");
    return 0;
}
