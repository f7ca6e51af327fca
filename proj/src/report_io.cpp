#include "opfix/report_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <stdexcept>

namespace opfix {

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), result.ptr);
}

std::string format_hex64(std::uint64_t v) {
    std::array<char, 17> buf{};
    for (int j = 15; j >= 0; --j) {
        buf[static_cast<std::size_t>(j)] = "0123456789abcdef"[v & 0xF];
        v >>= 4;
    }
    return std::string(buf.data(), 16);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string trajectories_csv(const Experiment& exp) {
    std::string csv = "trial,ell,block,dist,fpr_summand,cum_fpr,beta,mask,sigma\n";
    IterationConfig config = exp.iteration;
    const long trials = std::min<long>(exp.output.csv_trials, exp.trials);
    const long stride = exp.output.stride;
    std::vector<long> rows;
    for (long ell = 0; ell <= exp.iteration.horizon; ell += stride) rows.push_back(ell);
    if (rows.back() != exp.iteration.horizon) rows.push_back(exp.iteration.horizon);
    for (long t = 0; t < trials; ++t) {
        config.seed = exp.base_seed + static_cast<std::uint64_t>(t);
        const Trajectory traj = run(config);
        for (const long ell : rows) {
            const bool has_step = ell < traj.horizon;
            for (int i = 0; i < traj.num_blocks; ++i) {
                const std::size_t s = traj.step_index(has_step ? ell : 0, i);
                csv += std::to_string(t);
                csv += ',';
                csv += std::to_string(ell);
                csv += ',';
                csv += std::to_string(i);
                csv += ',';
                csv += format_double(traj.dist_at(ell, i));
                csv += ',';
                csv += format_double(has_step ? traj.fpr_summand[s] : 0.0);
                csv += ',';
                csv += format_double(traj.cumulative_fpr(ell, i));
                csv += ',';
                csv += std::to_string(traj.beta(ell, i));
                csv += ',';
                csv += has_step && traj.mask[s] ? '1' : '0';
                csv += ',';
                csv += format_double(has_step ? traj.sigma[s] : 0.0);
                csv += '\n';
            }
        }
    }
    return csv;
}

std::string bounds_csv(const std::vector<BoundCurve>& curves) {
    std::string csv = "ell,bound,proposition,block,delta,theta_prime\n";
    for (const BoundCurve& curve : curves) {
        const std::string name = to_string(curve.proposition);
        const std::string delta = curve.delta ? format_double(*curve.delta) : "";
        const std::string tp =
            curve.theta_prime ? format_double(*curve.theta_prime) : "";
        for (std::size_t ell = 0; ell < curve.values.size(); ++ell) {
            csv += std::to_string(ell);
            csv += ',';
            csv += format_double(curve.values[ell]);
            csv += ',';
            csv += name;
            csv += ',';
            csv += std::to_string(curve.block);
            csv += ',';
            csv += delta;
            csv += ',';
            csv += tp;
            csv += '\n';
        }
    }
    return csv;
}

std::string eta_csv(const Experiment& exp) {
    if (exp.iteration.op.base.op_class != OperatorClass::contractive)
        throw ConfigError("eta table: the configured operator is not contractive");
    const double zeta = exp.iteration.op.base.zeta;
    std::string csv = "ell,block,eta\n";
    for (long ell = 0; ell <= exp.iteration.horizon; ++ell)
        for (int i = 0; i < exp.iteration.op.base.partition.num_blocks(); ++i) {
            csv += std::to_string(ell);
            csv += ',';
            csv += std::to_string(i);
            csv += ',';
            csv += format_double(
                eta(zeta, exp.iteration.update.probabilities[static_cast<std::size_t>(i)],
                    ell));
            csv += '\n';
        }
    return csv;
}

namespace {

using nlohmann::json;

json metric_summary(const EnsembleStats& stats, const std::vector<long>& grid,
                    const std::vector<double>& samples, int block) {
    json out;
    out["block"] = block;
    out["grid"] = grid;
    json mean = json::array(), q50 = json::array(), q90 = json::array(),
         q99 = json::array();
    std::vector<double> row(static_cast<std::size_t>(stats.trials));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double* begin = samples.data() + stats.sample_index(g, block, 0);
        double sum = 0.0;
        for (long t = 0; t < stats.trials; ++t) {
            row[static_cast<std::size_t>(t)] = begin[t];
            sum += begin[t];
        }
        mean.push_back(sum / static_cast<double>(stats.trials));
        q50.push_back(sample_quantile(row, 0.5));
        q90.push_back(sample_quantile(row, 0.9));
        q99.push_back(sample_quantile(row, 0.99));
    }
    out["mean"] = std::move(mean);
    out["q50"] = std::move(q50);
    out["q90"] = std::move(q90);
    out["q99"] = std::move(q99);
    return out;
}

std::string check_kind_name(CurveCheck kind) {
    switch (kind) {
        case CurveCheck::mean: return "mean";
        case CurveCheck::coverage: return "coverage";
        case CurveCheck::sanov: return "sanov";
        case CurveCheck::tail_mean: return "tail-mean";
    }
    return "unknown";
}

json rule_json(const ClosureRule& rule) {
    json r;
    r["name"] = rule.name;
    r["theta"] = rule.theta;
    r["nu"] = rule.nu;
    r["max-ratio"] = rule.max_ratio;
    r["worst-k"] = rule.worst_k;
    r["limit"] = rule.limit;
    r["expect-violation"] = rule.expect_violation;
    r["passed"] = rule.passed;
    return r;
}

}  // namespace

json report_json(const Experiment& exp, const EnsembleStats& stats,
                 const std::vector<BoundCurve>& curves,
                 const std::vector<CoverageRecord>& records) {
    json report;
    report["schema"] = "opfix-report-v1";
    report["config-digest"] = format_hex64(exp.config_digest);
    report["config"] = json::parse(exp.canonical_json);

    json run;
    run["trials"] = stats.trials;
    run["horizon"] = stats.horizon;
    run["blocks"] = stats.num_blocks;
    run["base-seed"] = exp.base_seed;
    run["clamp-events"] = stats.clamp_events;
    run["ensemble-digest"] = format_hex64(stats.digest);
    report["run"] = std::move(run);

    json distance = json::array(), fpr = json::array();
    json mean_dist_all = json::array(), mean_fpr_all = json::array();
    for (int i = 0; i < stats.num_blocks; ++i) {
        distance.push_back(metric_summary(stats, stats.dist_grid, stats.dist_samples, i));
        fpr.push_back(metric_summary(stats, stats.fpr_grid, stats.fpr_samples, i));
        json md = json::array(), mf = json::array();
        for (long ell = 0; ell <= stats.horizon; ++ell)
            md.push_back(stats.mean_dist_at(ell, i));
        for (long ell = 0; ell < stats.horizon; ++ell)
            mf.push_back(stats.mean_fpr_at(ell, i));
        mean_dist_all.push_back(std::move(md));
        mean_fpr_all.push_back(std::move(mf));
    }
    report["metrics"]["distance"] = std::move(distance);
    report["metrics"]["cumulative-fpr"] = std::move(fpr);
    report["mean-by-ell"]["distance"] = std::move(mean_dist_all);
    report["mean-by-ell"]["cumulative-fpr"] = std::move(mean_fpr_all);

    json curve_rows = json::array();
    for (const BoundCurve& curve : curves) {
        json c;
        c["proposition"] = to_string(curve.proposition);
        c["block"] = curve.block;
        if (curve.delta) c["delta"] = *curve.delta;
        if (curve.theta_prime) c["theta-prime"] = *curve.theta_prime;
        c["params"] = curve.params;
        curve_rows.push_back(std::move(c));
    }
    report["curves"] = std::move(curve_rows);

    bool all_passed = true;
    json coverage = json::array();
    for (const CoverageRecord& rec : records) {
        json r;
        r["proposition"] = to_string(rec.proposition);
        r["block"] = rec.block;
        if (rec.delta) r["delta"] = *rec.delta;
        r["kind"] = check_kind_name(rec.kind);
        r["grid"] = rec.grid;
        r["observed"] = rec.observed;
        r["required"] = rec.required;
        r["slack"] = rec.slack;
        r["worst-margin"] = rec.worst_margin;
        r["worst-ell"] = rec.worst_ell;
        r["passed"] = rec.passed;
        all_passed = all_passed && rec.passed;
        coverage.push_back(std::move(r));
    }
    report["coverage"] = std::move(coverage);
    report["passed"] = all_passed;
    return report;
}

json audit_json(long num_samples, std::uint64_t seed,
                const std::vector<ClosureRule>& closure,
                const std::vector<ClosureRule>& samplers) {
    json report;
    report["schema"] = "opfix-audit-v1";
    report["samples"] = num_samples;
    report["seed"] = seed;
    json c = json::array(), s = json::array();
    bool all_passed = true;
    for (const ClosureRule& rule : closure) {
        c.push_back(rule_json(rule));
        all_passed = all_passed && rule.passed;
    }
    for (const ClosureRule& rule : samplers) {
        s.push_back(rule_json(rule));
        all_passed = all_passed && rule.passed;
    }
    report["closure"] = std::move(c);
    report["samplers"] = std::move(s);
    report["passed"] = all_passed;
    return report;
}

}  // namespace opfix
