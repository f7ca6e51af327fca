#include "opfix/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "opfix/digest.hpp"

namespace opfix {

namespace {

constexpr double kHarnessAlpha = 0.01;  // the harness's own statistical error
constexpr double kMeanSlackZ = 4.0;     // z-score for mean-type checks

double coverage_slack(std::size_t grid_size, long trials) {
    return std::sqrt(std::log(2.0 * static_cast<double>(grid_size) / kHarnessAlpha) /
                     (2.0 * static_cast<double>(trials)));
}

}  // namespace

std::vector<long> checked_grid(long horizon, CurveMetric metric) {
    const long last = metric == CurveMetric::distance ? horizon : horizon - 1;
    std::vector<long> grid;
    for (long ell = 0; ell <= last; ell += 10) grid.push_back(ell);
    grid.push_back(1);
    grid.push_back(last);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

EnsembleStats run_ensemble(const IterationConfig& config, long num_trials,
                           std::uint64_t base_seed) {
    config.validate();
    if (num_trials < 100)
        throw std::invalid_argument("ensembles need at least 100 trials");

    EnsembleStats stats;
    stats.trials = num_trials;
    stats.horizon = config.horizon;
    stats.num_blocks = config.op.base.partition.num_blocks();
    stats.dist_grid = checked_grid(config.horizon, CurveMetric::distance);
    stats.fpr_grid = checked_grid(config.horizon, CurveMetric::cumulative_fpr);

    const auto n = static_cast<std::size_t>(stats.num_blocks);
    const auto m = static_cast<std::size_t>(num_trials);
    stats.dist_samples.assign(stats.dist_grid.size() * n * m, 0.0);
    stats.fpr_samples.assign(stats.fpr_grid.size() * n * m, 0.0);
    stats.residual_samples.assign(stats.fpr_grid.size() * n * m, 0.0);
    stats.mean_dist.assign((static_cast<std::size_t>(config.horizon) + 1) * n, 0.0);
    stats.mean_fpr.assign(static_cast<std::size_t>(config.horizon) * n, 0.0);

    IterationConfig trial_config = config;
    for (long t = 0; t < num_trials; ++t) {
        trial_config.seed = base_seed + static_cast<std::uint64_t>(t);
        const Trajectory traj = run(trial_config);

        for (long ell = 0; ell <= config.horizon; ++ell)
            for (int i = 0; i < stats.num_blocks; ++i)
                stats.mean_dist[static_cast<std::size_t>(ell) * n +
                                static_cast<std::size_t>(i)] += traj.dist_at(ell, i);
        for (long ell = 0; ell < config.horizon; ++ell)
            for (int i = 0; i < stats.num_blocks; ++i)
                stats.mean_fpr[static_cast<std::size_t>(ell) * n +
                               static_cast<std::size_t>(i)] += traj.cumulative_fpr(ell, i);

        for (std::size_t g = 0; g < stats.dist_grid.size(); ++g)
            for (int i = 0; i < stats.num_blocks; ++i)
                stats.dist_samples[stats.sample_index(g, i, t)] =
                    traj.dist_at(stats.dist_grid[g], i);
        for (std::size_t g = 0; g < stats.fpr_grid.size(); ++g)
            for (int i = 0; i < stats.num_blocks; ++i) {
                const long ell = stats.fpr_grid[g];
                stats.fpr_samples[stats.sample_index(g, i, t)] =
                    traj.cumulative_fpr(ell, i);
                stats.residual_samples[stats.sample_index(g, i, t)] =
                    traj.raw_residual_sq[traj.step_index(ell, i)];
            }
        stats.clamp_events += traj.clamp_events;
    }

    const double inv_m = 1.0 / static_cast<double>(num_trials);
    for (double& v : stats.mean_dist) v *= inv_m;
    for (double& v : stats.mean_fpr) v *= inv_m;

    Fnv1a64 h;
    h.update(stats.dist_samples);
    h.update(stats.fpr_samples);
    h.update(stats.residual_samples);
    h.update(stats.mean_dist);
    h.update(stats.mean_fpr);
    stats.digest = h.value();
    return stats;
}

namespace {

struct GridSamples {
    const std::vector<long>* grid;
    const std::vector<double>* samples;
};

GridSamples select_metric(const EnsembleStats& stats, CurveMetric metric) {
    switch (metric) {
        case CurveMetric::distance: return {&stats.dist_grid, &stats.dist_samples};
        case CurveMetric::cumulative_fpr: return {&stats.fpr_grid, &stats.fpr_samples};
        case CurveMetric::residual_sq: return {&stats.fpr_grid, &stats.residual_samples};
    }
    return {&stats.dist_grid, &stats.dist_samples};
}

double mean_of(const double* begin, long count) {
    double sum = 0.0;
    for (long t = 0; t < count; ++t) sum += begin[t];
    return sum / static_cast<double>(count);
}

double stddev_of(const double* begin, long count, double mean) {
    double sum = 0.0;
    for (long t = 0; t < count; ++t) {
        const double d = begin[t] - mean;
        sum += d * d;
    }
    return count > 1 ? std::sqrt(sum / static_cast<double>(count - 1)) : 0.0;
}

// Forward rounding error of a naive count-term sum is below count * eps * sum|x|,
// so a sample mean is only trustworthy to count * eps * scale. Mean-type checks
// need this allowance because their statistical slack vanishes when every sample
// is identical (always the case at ell = 0).
double summation_tolerance(long count, double scale) {
    return static_cast<double>(count) * std::numeric_limits<double>::epsilon() *
           std::abs(scale);
}

}  // namespace

CoverageRecord check_coverage(const EnsembleStats& stats, const BoundCurve& curve) {
    if (curve.block < 0 || curve.block >= stats.num_blocks)
        throw std::invalid_argument("coverage check: curve block outside ensemble");
    if (curve.values.size() != static_cast<std::size_t>(stats.horizon) + 1)
        throw std::invalid_argument("coverage check: curve horizon != ensemble horizon");

    const CurveMetric metric = metric_kind(curve.proposition);
    const CurveCheck kind = check_kind(curve.proposition);
    const GridSamples gs = select_metric(stats, metric);
    const long m = stats.trials;

    CoverageRecord rec;
    rec.proposition = curve.proposition;
    rec.block = curve.block;
    rec.delta = curve.delta;
    rec.kind = kind;

    double worst = std::numeric_limits<double>::infinity();
    long worst_ell = 0;

    auto note = [&](long ell, double observed, double required, double margin) {
        rec.grid.push_back(ell);
        rec.observed.push_back(observed);
        rec.required.push_back(required);
        if (margin < worst) {
            worst = margin;
            worst_ell = ell;
        }
    };

    switch (kind) {
        case CurveCheck::coverage: {
            if (!curve.delta.has_value())
                throw std::invalid_argument("coverage check: hp curve without delta");
            rec.slack = coverage_slack(gs.grid->size(), m);
            const double needed = 1.0 - *curve.delta - rec.slack;
            for (std::size_t g = 0; g < gs.grid->size(); ++g) {
                const long ell = (*gs.grid)[g];
                const double bound = curve.values[static_cast<std::size_t>(ell)];
                const double* row = gs.samples->data() + stats.sample_index(g, curve.block, 0);
                long covered = 0;
                for (long t = 0; t < m; ++t) covered += row[t] <= bound;
                const double frac = static_cast<double>(covered) / static_cast<double>(m);
                note(ell, frac, needed, frac - needed);
            }
            break;
        }
        case CurveCheck::sanov: {
            if (curve.confidence.size() != curve.values.size())
                throw std::invalid_argument("coverage check: sanov curve without confidence");
            rec.slack = coverage_slack(gs.grid->size(), m);
            for (std::size_t g = 0; g < gs.grid->size(); ++g) {
                const long ell = (*gs.grid)[g];
                const double bound = curve.values[static_cast<std::size_t>(ell)];
                const double needed = std::max(
                    0.0, curve.confidence[static_cast<std::size_t>(ell)] - rec.slack);
                const double* row = gs.samples->data() + stats.sample_index(g, curve.block, 0);
                long covered = 0;
                for (long t = 0; t < m; ++t) covered += row[t] <= bound;
                const double frac = static_cast<double>(covered) / static_cast<double>(m);
                note(ell, frac, needed, frac - needed);
            }
            break;
        }
        case CurveCheck::mean: {
            for (std::size_t g = 0; g < gs.grid->size(); ++g) {
                const long ell = (*gs.grid)[g];
                const double bound = curve.values[static_cast<std::size_t>(ell)];
                const double* row = gs.samples->data() + stats.sample_index(g, curve.block, 0);
                const double mean = mean_of(row, m);
                const double sd = stddev_of(row, m, mean);
                const double slack = kMeanSlackZ * sd / std::sqrt(static_cast<double>(m));
                const double fp_tol =
                    summation_tolerance(m, std::max(std::abs(bound), std::abs(mean)));
                rec.slack = std::max(rec.slack, slack);
                note(ell, mean, bound + slack + fp_tol, bound + slack + fp_tol - mean);
            }
            break;
        }
        case CurveCheck::tail_mean: {
            // Asymptotic check: the mean distance averaged over the trailing
            // window must sit inside the constant radius.
            const long window = std::min<long>(100, stats.horizon + 1);
            double tail = 0.0;
            for (long ell = stats.horizon - window + 1; ell <= stats.horizon; ++ell)
                tail += stats.mean_dist_at(ell, curve.block);
            tail /= static_cast<double>(window);
            const std::size_t g_last = stats.dist_grid.size() - 1;
            const double* row =
                stats.dist_samples.data() + stats.sample_index(g_last, curve.block, 0);
            const double mean_last = mean_of(row, m);
            const double sd = stddev_of(row, m, mean_last);
            rec.slack = kMeanSlackZ * sd / std::sqrt(static_cast<double>(m));
            const double radius = curve.values.back();
            const double fp_tol = summation_tolerance(
                m + window, std::max(std::abs(radius), std::abs(tail)));
            note(stats.horizon, tail, radius + rec.slack + fp_tol,
                 radius + rec.slack + fp_tol - tail);
            break;
        }
    }

    rec.worst_margin = worst;
    rec.worst_ell = worst_ell;
    rec.passed = worst >= 0.0;
    return rec;
}

double sample_quantile(std::vector<double> values, double level) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    if (!(level > 0.0) || !(level > 0.0 && level <= 1.0))
        throw std::invalid_argument("quantile level must lie in (0, 1]");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(level * n));
    rank = std::min(std::max<std::size_t>(rank, 1), values.size());
    return values[rank - 1];
}

namespace {

constexpr double kAuditKMax = 8.0;
constexpr double kAuditSlack = 0.05;

ClosureRule audit_rule(const std::string& name, const std::vector<double>& magnitudes,
                       const SubWeibullParams& declared, bool expect_violation) {
    const MomentReport rep = verify_moment_bound_samples(magnitudes, declared, kAuditKMax);
    ClosureRule rule;
    rule.name = name;
    rule.theta = declared.theta;
    rule.nu = declared.nu;
    rule.max_ratio = rep.max_ratio;
    rule.worst_k = rep.worst_k;
    rule.limit = 1.0 + kAuditSlack;
    rule.expect_violation = expect_violation;
    rule.passed = expect_violation ? rep.max_ratio > rule.limit
                                   : rep.max_ratio <= rule.limit;
    return rule;
}

}  // namespace

std::vector<ClosureRule> closure_audit(long num_samples, std::uint64_t seed) {
    if (num_samples < 10000)
        throw std::invalid_argument("closure audit needs at least 10^4 samples");
    const auto n = static_cast<std::size_t>(num_samples);

    // Base variables with certified envelopes: half-normal (theta = 1/2),
    // heavy-tailed Weibull shape 0.8 (theta = 1.25), and uniform on [-1, 1].
    const SubWeibullParams g_params = make_gaussian_noise(1.0, 1).declared;
    const NoiseSpec w_spec = make_weibull_noise(0.8, 1.0, 1);
    const SubWeibullParams w_params = w_spec.declared;
    const double w_mean = std::tgamma(1.0 + 1.0 / 0.8);

    Rng rng(seed, 3);
    std::vector<double> g(n), w(n), u(n);
    std::vector<std::array<double, 4>> vec(n);
    for (std::size_t t = 0; t < n; ++t) {
        g[t] = std::abs(rng.normal());
        w[t] = rng.weibull(0.8, 1.0);
        u[t] = rng.uniform(-1.0, 1.0);
        for (double& c : vec[t]) c = rng.normal();
    }

    std::vector<ClosureRule> rules;
    std::vector<double> mags(n);

    for (std::size_t t = 0; t < n; ++t) mags[t] = 3.5 * g[t];
    rules.push_back(audit_rule("scale", mags, sw_scale(g_params, 3.5), false));

    for (std::size_t t = 0; t < n; ++t) mags[t] = g[t] + w[t];
    rules.push_back(audit_rule("sum", mags, sw_sum(g_params, w_params), false));

    for (std::size_t t = 0; t < n; ++t) mags[t] = g[t] * w[t];
    rules.push_back(
        audit_rule("product-independent", mags, sw_product(g_params, w_params, true), false));

    // Maximal dependence: the product of a variable with itself.
    for (std::size_t t = 0; t < n; ++t) mags[t] = g[t] * g[t];
    rules.push_back(
        audit_rule("product-dependent", mags, sw_product(g_params, g_params, false), false));

    for (std::size_t t = 0; t < n; ++t) mags[t] = std::pow(g[t], 1.5);
    rules.push_back(audit_rule("power", mags, sw_power(g_params, 1.5), false));

    for (std::size_t t = 0; t < n; ++t) mags[t] = std::abs(w[t] - w_mean);
    rules.push_back(audit_rule("center", mags, sw_center(w_params), false));

    for (std::size_t t = 0; t < n; ++t) mags[t] = std::abs(u[t]);
    rules.push_back(audit_rule("bounded", mags, sw_bounded(-1.0, 1.0), false));

    for (std::size_t t = 0; t < n; ++t) {
        double sq = 0.0;
        for (double c : vec[t]) sq += c * c;
        mags[t] = std::sqrt(sq);
    }
    rules.push_back(audit_rule("vector-norm", mags, sw_vector_norm(g_params, 4), false));

    // Falsifiability control: half the valid envelope must be rejected.
    rules.push_back(audit_rule("negative-control-halved-nu", g,
                               SubWeibullParams{g_params.theta, 0.5 * g_params.nu}, true));
    return rules;
}

std::vector<ClosureRule> sampler_audit(long num_samples, std::uint64_t seed) {
    if (num_samples < 10000)
        throw std::invalid_argument("sampler audit needs at least 10^4 samples");

    struct Family {
        std::string name;
        NoiseSpec spec;
        int dim;
    };
    const std::vector<Family> families = {
        {"gaussian-d1", make_gaussian_noise(1.0, 1), 1},
        {"gaussian-d3", make_gaussian_noise(0.7, 3), 3},
        {"weibull-shape0.8-d1", make_weibull_noise(0.8, 1.0, 1), 1},
        {"weibull-shape2-d2", make_weibull_noise(2.0, 0.5, 2), 2},
        {"bounded-uniform-d2", make_bounded_uniform_noise(0.3, 2), 2},
    };

    std::vector<ClosureRule> rules;
    for (std::size_t f = 0; f < families.size(); ++f) {
        Rng rng(seed, 4 + f);
        const MomentReport rep = verify_moment_bound(families[f].spec, families[f].dim,
                                                     num_samples, kAuditKMax, rng);
        ClosureRule rule;
        rule.name = families[f].name;
        rule.theta = families[f].spec.declared.theta;
        rule.nu = families[f].spec.declared.nu;
        rule.max_ratio = rep.max_ratio;
        rule.worst_k = rep.worst_k;
        rule.limit = 1.0 + kAuditSlack;
        rule.expect_violation = false;
        rule.passed = rep.max_ratio <= rule.limit;
        rules.push_back(rule);
    }
    return rules;
}

}  // namespace opfix
