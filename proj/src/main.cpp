// opfix: stochastic fixed-point iteration experiments with certified
// convergence bounds.
//
//   opfix simulate CONFIG   run a trial ensemble, certify every requested
//                           bound curve, write trajectories/bounds/report
//   opfix bounds CONFIG     evaluate the requested curves without simulating
//   opfix audit             empirical audit of the tail-parameter algebra
//                           and every built-in noise sampler
//
// Exit codes: 0 success, 1 configuration error, 2 scientific check failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opfix/config.hpp"
#include "opfix/report_io.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitScience = 2;

struct Overrides {
    std::optional<long> trials;
    std::optional<long> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> only;
};

opfix::Experiment load_with_overrides(const std::string& path, const Overrides& ov) {
    std::ifstream in(path);
    if (!in) throw opfix::ConfigError(path + ": cannot open config file");
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw opfix::ConfigError(path + ": " + e.what());
    }
    if (ov.trials) root["run"]["trials"] = *ov.trials;
    if (ov.horizon) root["run"]["horizon"] = *ov.horizon;
    if (ov.seed) root["run"]["base-seed"] = *ov.seed;
    if (ov.out) root["output"]["directory"] = *ov.out;

    opfix::Experiment exp = opfix::parse_experiment(root);
    if (ov.only && *ov.only != "eta") {
        const auto prop = opfix::proposition_from_string(*ov.only);
        if (!prop)
            throw opfix::ConfigError("--only: unknown curve '" + *ov.only + "'");
        std::vector<opfix::CurveRequest> kept;
        for (const auto& request : exp.requests)
            if (request.proposition == *prop) kept.push_back(request);
        if (kept.empty())
            throw opfix::ConfigError("--only: the config requests no '" + *ov.only +
                                     "' curve");
        exp.requests = std::move(kept);
    }
    return exp;
}

std::vector<opfix::BoundCurve> build_all_curves(const opfix::Experiment& exp) {
    std::vector<opfix::BoundCurve> curves;
    const int blocks = exp.iteration.op.base.partition.num_blocks();
    for (const auto& request : exp.requests)
        for (int i = 0; i < blocks; ++i)
            curves.push_back(opfix::build_curve(exp.iteration, request, i));
    return curves;
}

void print_coverage_line(const opfix::CoverageRecord& rec) {
    std::cout << (rec.passed ? "[PASS] " : "[FAIL] ") << to_string(rec.proposition)
              << " block=" << rec.block;
    if (rec.delta) std::cout << " delta=" << *rec.delta;
    std::cout << " worst-margin=" << opfix::format_double(rec.worst_margin)
              << " at ell=" << rec.worst_ell << "\n";
}

void print_rule_line(const opfix::ClosureRule& rule) {
    std::cout << (rule.passed ? "[PASS] " : "[FAIL] ") << rule.name
              << " max-ratio=" << opfix::format_double(rule.max_ratio)
              << " at k=" << opfix::format_double(rule.worst_k)
              << " limit=" << opfix::format_double(rule.limit)
              << (rule.expect_violation ? " (negative control)" : "") << "\n";
}

int cmd_simulate(const std::string& config_path, const Overrides& ov) {
    const opfix::Experiment exp = load_with_overrides(config_path, ov);
    const std::vector<opfix::BoundCurve> curves = build_all_curves(exp);

    const opfix::EnsembleStats stats =
        opfix::run_ensemble(exp.iteration, exp.trials, exp.base_seed);

    std::vector<opfix::CoverageRecord> records;
    records.reserve(curves.size());
    for (const auto& curve : curves) records.push_back(check_coverage(stats, curve));

    const std::filesystem::path dir(exp.output.directory);
    opfix::write_text(dir / "trajectories.csv", opfix::trajectories_csv(exp));
    opfix::write_text(dir / "bounds.csv", opfix::bounds_csv(curves));
    opfix::write_text(dir / "report.json",
                      opfix::report_json(exp, stats, curves, records).dump(2) + "\n");

    bool all_passed = true;
    for (const auto& rec : records) {
        print_coverage_line(rec);
        all_passed = all_passed && rec.passed;
    }
    std::cout << "wrote " << (dir / "trajectories.csv").string() << ", "
              << (dir / "bounds.csv").string() << ", " << (dir / "report.json").string()
              << "\n";
    return all_passed ? 0 : kExitScience;
}

int cmd_bounds(const std::string& config_path, const Overrides& ov) {
    const opfix::Experiment exp = load_with_overrides(config_path, ov);
    const std::filesystem::path dir(exp.output.directory);
    if (ov.only && *ov.only == "eta") {
        opfix::write_text(dir / "eta.csv", opfix::eta_csv(exp));
        std::cout << "wrote " << (dir / "eta.csv").string() << "\n";
        return 0;
    }
    const std::vector<opfix::BoundCurve> curves = build_all_curves(exp);
    opfix::write_text(dir / "bounds.csv", opfix::bounds_csv(curves));
    std::cout << "wrote " << (dir / "bounds.csv").string() << " (" << curves.size()
              << " curves)\n";
    return 0;
}

int cmd_audit(long samples, std::uint64_t seed, const std::string& out_dir) {
    const std::vector<opfix::ClosureRule> closure = opfix::closure_audit(samples, seed);
    const std::vector<opfix::ClosureRule> samplers = opfix::sampler_audit(samples, seed);

    bool all_passed = true;
    for (const auto& rule : closure) {
        print_rule_line(rule);
        all_passed = all_passed && rule.passed;
    }
    for (const auto& rule : samplers) {
        print_rule_line(rule);
        all_passed = all_passed && rule.passed;
    }
    const std::filesystem::path path = std::filesystem::path(out_dir) / "audit.json";
    opfix::write_text(path,
                      opfix::audit_json(samples, seed, closure, samplers).dump(2) + "\n");
    std::cout << "wrote " << path.string() << "\n";
    return all_passed ? 0 : kExitScience;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic fixed-point iterations with certified convergence bounds"};
    app.require_subcommand(1);

    Overrides ov;
    std::string config_path;

    auto add_common = [&](CLI::App* cmd, bool with_trials) {
        cmd->add_option("config", config_path, "experiment config (JSON)")->required();
        if (with_trials) cmd->add_option("--trials", ov.trials, "override run.trials");
        cmd->add_option("--horizon", ov.horizon, "override run.horizon");
        cmd->add_option("--seed", ov.seed, "override run.base-seed");
        cmd->add_option("--out", ov.out, "override output.directory");
        cmd->add_option("--only", ov.only, "keep only this curve (or 'eta')");
    };

    CLI::App* simulate =
        app.add_subcommand("simulate", "run an ensemble and certify the bound curves");
    add_common(simulate, true);

    CLI::App* bounds =
        app.add_subcommand("bounds", "evaluate bound curves without simulating");
    add_common(bounds, false);

    long audit_samples = 1000000;
    std::uint64_t audit_seed = 1;
    std::string audit_out = "out";
    CLI::App* audit =
        app.add_subcommand("audit", "audit the tail algebra and noise samplers");
    audit->add_option("--samples", audit_samples, "samples per audited rule");
    audit->add_option("--seed", audit_seed, "audit seed");
    audit->add_option("--out", audit_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, ov);
        if (bounds->parsed()) return cmd_bounds(config_path, ov);
        if (audit->parsed()) return cmd_audit(audit_samples, audit_seed, audit_out);
    } catch (const opfix::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
