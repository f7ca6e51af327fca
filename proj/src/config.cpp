#include "opfix/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "opfix/digest.hpp"

namespace opfix {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ConfigError(path + ": " + message);
}

void check_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

void check_known(const json& j, const std::string& path,
                 std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known) fail(path + "." + item.key(), "unknown key");
    }
}

const json& member(const json& j, const std::string& path, const char* key) {
    check_object(j, path);
    if (!j.contains(key)) fail(path + "." + key, "missing required key");
    return j.at(key);
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

long as_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long>();
}

std::uint64_t as_seed(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        fail(path, "expected a nonnegative integer seed");
    return j.get<std::uint64_t>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

Eigen::VectorXd as_vector(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t idx = 0; idx < j.size(); ++idx)
        v[static_cast<Eigen::Index>(idx)] =
            as_number(j[idx], path + "[" + std::to_string(idx) + "]");
    return v;
}

std::vector<int> as_dims(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of block sizes");
    std::vector<int> dims;
    for (std::size_t idx = 0; idx < j.size(); ++idx) {
        const long d = as_integer(j[idx], path + "[" + std::to_string(idx) + "]");
        if (d < 1) fail(path + "[" + std::to_string(idx) + "]", "block size must be >= 1");
        dims.push_back(static_cast<int>(d));
    }
    return dims;
}

Box parse_box(const json& j, const std::string& path) {
    check_object(j, path);
    check_known(j, path, {"lo", "hi"});
    Box box;
    box.lo = as_vector(member(j, path, "lo"), path + ".lo");
    box.hi = as_vector(member(j, path, "hi"), path + ".hi");
    try {
        validate(box);
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    return box;
}

NoiseSchedule parse_schedule(const json& j, const std::string& path) {
    check_object(j, path);
    check_known(j, path, {"kind", "ratio"});
    NoiseSchedule schedule;
    const std::string kind = as_string(member(j, path, "kind"), path + ".kind");
    if (kind == "constant") {
        if (j.contains("ratio")) fail(path + ".ratio", "constant schedules take no ratio");
        schedule.kind = ScheduleKind::constant;
    } else if (kind == "geometric-decay") {
        schedule.kind = ScheduleKind::geometric_decay;
        schedule.ratio = as_number(member(j, path, "ratio"), path + ".ratio");
        if (!(schedule.ratio > 0.0) || !(schedule.ratio < 1.0))
            fail(path + ".ratio", "decay ratio must lie in (0, 1)");
    } else {
        fail(path + ".kind", "unknown schedule kind '" + kind +
                                 "' (constant | geometric-decay)");
    }
    return schedule;
}

NoiseSpec parse_noise(const json& j, const std::string& path, int dim) {
    check_object(j, path);
    check_known(j, path, {"family", "std", "shape", "scale", "halfwidth", "schedule",
                          "declared"});
    const std::string family = as_string(member(j, path, "family"), path + ".family");
    NoiseSchedule schedule;
    if (j.contains("schedule")) schedule = parse_schedule(j.at("schedule"), path + ".schedule");

    auto forbid = [&](std::initializer_list<const char*> keys) {
        for (const char* key : keys)
            if (j.contains(key))
                fail(path + "." + key, "not a parameter of the '" + family + "' family");
    };

    NoiseSpec spec;
    try {
        if (family == "zero") {
            forbid({"std", "shape", "scale", "halfwidth", "schedule"});
            spec = make_zero_noise(dim);
        } else if (family == "gaussian") {
            forbid({"shape", "scale", "halfwidth"});
            spec = make_gaussian_noise(as_number(member(j, path, "std"), path + ".std"),
                                       dim, schedule);
        } else if (family == "weibull") {
            forbid({"std", "halfwidth"});
            spec = make_weibull_noise(as_number(member(j, path, "shape"), path + ".shape"),
                                      as_number(member(j, path, "scale"), path + ".scale"),
                                      dim, schedule);
        } else if (family == "bounded-uniform") {
            forbid({"std", "shape", "scale"});
            spec = make_bounded_uniform_noise(
                as_number(member(j, path, "halfwidth"), path + ".halfwidth"), dim, schedule);
        } else {
            fail(path + ".family", "unknown noise family '" + family +
                                       "' (zero | gaussian | weibull | bounded-uniform)");
        }
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }

    if (j.contains("declared")) {
        // Manual envelope override, e.g. for falsifiability experiments.
        const json& d = j.at("declared");
        const std::string dpath = path + ".declared";
        check_object(d, dpath);
        check_known(d, dpath, {"theta", "nu"});
        spec.declared.theta = as_number(member(d, dpath, "theta"), dpath + ".theta");
        spec.declared.nu = as_number(member(d, dpath, "nu"), dpath + ".nu");
        try {
            validate(spec.declared);
        } catch (const std::invalid_argument& e) {
            fail(dpath, e.what());
        }
    }
    return spec;
}

OperatorSpec parse_operator(const json& j, const std::string& path) {
    check_object(j, path);
    const std::string kind = as_string(member(j, path, "kind"), path + ".kind");
    try {
        if (kind == "affine-contraction") {
            const std::string recipe =
                as_string(member(j, path, "recipe"), path + ".recipe");
            if (recipe == "scalar") {
                check_known(j, path, {"kind", "recipe", "a", "b"});
                return make_scalar_affine(as_number(member(j, path, "a"), path + ".a"),
                                          as_number(member(j, path, "b"), path + ".b"));
            }
            if (recipe == "random") {
                check_known(j, path, {"kind", "recipe", "blocks", "zeta", "seed"});
                Rng rng(as_seed(member(j, path, "seed"), path + ".seed"), 7);
                return make_random_affine_contraction(
                    BlockPartition::from_dims(
                        as_dims(member(j, path, "blocks"), path + ".blocks")),
                    as_number(member(j, path, "zeta"), path + ".zeta"), rng);
            }
            fail(path + ".recipe",
                 "unknown affine-contraction recipe '" + recipe + "' (scalar | random)");
        }
        if (kind == "gradient-step") {
            const std::string recipe =
                as_string(member(j, path, "recipe"), path + ".recipe");
            if (recipe != "random")
                fail(path + ".recipe",
                     "unknown gradient-step recipe '" + recipe + "' (random)");
            check_known(j, path,
                        {"kind", "recipe", "blocks", "lambda-max", "condition", "step",
                         "seed"});
            Rng rng(as_seed(member(j, path, "seed"), path + ".seed"), 7);
            return make_random_spd_gradient_step(
                BlockPartition::from_dims(as_dims(member(j, path, "blocks"), path + ".blocks")),
                as_number(member(j, path, "lambda-max"), path + ".lambda-max"),
                as_number(member(j, path, "condition"), path + ".condition"),
                as_number(member(j, path, "step"), path + ".step"), rng);
        }
        if (kind == "km-averaged-projection") {
            check_known(j, path, {"kind", "blocks", "weight", "domain", "target"});
            const Box domain = parse_box(member(j, path, "domain"), path + ".domain");
            const Box target = parse_box(member(j, path, "target"), path + ".target");
            std::vector<int> dims;
            if (j.contains("blocks"))
                dims = as_dims(j.at("blocks"), path + ".blocks");
            else
                dims = {domain.dim()};
            return make_km_projection(BlockPartition::from_dims(std::move(dims)), domain,
                                      target,
                                      as_number(member(j, path, "weight"), path + ".weight"));
        }
        if (kind == "projected-gradient-step") {
            check_known(j, path, {"kind", "blocks", "q-diag", "c", "step", "domain"});
            const BlockPartition partition = BlockPartition::from_dims(
                as_dims(member(j, path, "blocks"), path + ".blocks"));
            const Eigen::VectorXd q = as_vector(member(j, path, "q-diag"), path + ".q-diag");
            const Eigen::VectorXd c = as_vector(member(j, path, "c"), path + ".c");
            if (q.size() != partition.total_dim() || c.size() != partition.total_dim())
                fail(path, "q-diag and c must have the total dimension of the blocks");
            std::vector<Eigen::VectorXd> q_blocks, c_blocks;
            for (int i = 0; i < partition.num_blocks(); ++i) {
                q_blocks.emplace_back(partition.block(q, i));
                c_blocks.emplace_back(partition.block(c, i));
            }
            return make_projected_gradient_step(
                partition, std::move(q_blocks), std::move(c_blocks),
                as_number(member(j, path, "step"), path + ".step"),
                parse_box(member(j, path, "domain"), path + ".domain"));
        }
        fail(path + ".kind",
             "unknown operator kind '" + kind +
                 "' (affine-contraction | gradient-step | projected-gradient-step | "
                 "km-averaged-projection)");
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
}

OnlineOperatorSpec parse_drift(const json* j, const std::string& path, OperatorSpec base) {
    if (j == nullptr) return make_static_online(std::move(base));
    check_object(*j, path);
    const std::string kind = as_string(member(*j, path, "kind"), path + ".kind");
    try {
        if (kind == "random-walk") {
            check_known(*j, path, {"kind", "increments"});
            const json& inc = member(*j, path, "increments");
            if (!inc.is_array() ||
                inc.size() != static_cast<std::size_t>(base.partition.num_blocks()))
                fail(path + ".increments", "expected one increment spec per block");
            std::vector<NoiseSpec> increments;
            for (std::size_t i = 0; i < inc.size(); ++i)
                increments.push_back(
                    parse_noise(inc[i], path + ".increments[" + std::to_string(i) + "]",
                                base.partition.dims[i]));
            return make_random_walk_online(std::move(base), std::move(increments));
        }
        if (kind == "deterministic-path") {
            check_known(*j, path, {"kind", "velocity"});
            Eigen::VectorXd velocity =
                as_vector(member(*j, path, "velocity"), path + ".velocity");
            return make_path_online(std::move(base), std::move(velocity));
        }
        fail(path + ".kind", "unknown drift kind '" + kind +
                                 "' (random-walk | deterministic-path)");
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
}

UpdateModel parse_update(const json& j, const std::string& path, int num_blocks) {
    check_object(j, path);
    check_known(j, path, {"probabilities", "correlation"});
    UpdateModel update;
    const json& probs = member(j, path, "probabilities");
    if (!probs.is_array() || probs.size() != static_cast<std::size_t>(num_blocks))
        fail(path + ".probabilities", "expected one probability per block (" +
                                          std::to_string(num_blocks) + ")");
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const std::string ppath = path + ".probabilities[" + std::to_string(i) + "]";
        const double p = as_number(probs[i], ppath);
        if (!(p > 0.0) || p > 1.0)
            fail(ppath,
                 "update probabilities must lie in (0, 1]; every block needs a strictly "
                 "positive chance of being updated");
        update.probabilities.push_back(p);
    }
    if (j.contains("correlation")) {
        const std::string c = as_string(j.at("correlation"), path + ".correlation");
        if (c == "independent")
            update.correlation = MaskCorrelation::independent;
        else if (c == "fully-coupled")
            update.correlation = MaskCorrelation::fully_coupled;
        else
            fail(path + ".correlation",
                 "unknown correlation '" + c + "' (independent | fully-coupled)");
    }
    return update;
}

CurveRequest parse_request(const json& j, const std::string& path) {
    check_object(j, path);
    check_known(j, path, {"proposition", "delta", "eps", "sigma"});
    CurveRequest request;
    const std::string name =
        as_string(member(j, path, "proposition"), path + ".proposition");
    const auto prop = proposition_from_string(name);
    if (!prop.has_value()) fail(path + ".proposition", "unknown proposition '" + name + "'");
    request.proposition = *prop;
    if (j.contains("delta")) request.delta = as_number(j.at("delta"), path + ".delta");
    if (j.contains("eps")) request.eps = as_number(j.at("eps"), path + ".eps");
    if (j.contains("sigma")) {
        const std::string s = as_string(j.at("sigma"), path + ".sigma");
        if (s == "minimal")
            request.sigma = SigmaVariant::minimal;
        else if (s == "maximal")
            request.sigma = SigmaVariant::maximal;
        else
            fail(path + ".sigma", "unknown sigma variant '" + s + "' (minimal | maximal)");
    }
    return request;
}

}  // namespace

Experiment parse_experiment(const json& root) {
    check_object(root, "config");
    check_known(root, "config",
                {"operator", "update", "noise", "drift", "run", "bounds", "output"});

    Experiment exp;
    OperatorSpec base = parse_operator(member(root, "config", "operator"), "operator");
    const int num_blocks = base.partition.num_blocks();
    const std::vector<int> dims = base.partition.dims;

    exp.iteration.op = parse_drift(root.contains("drift") ? &root.at("drift") : nullptr,
                                   "drift", std::move(base));
    exp.iteration.update =
        parse_update(member(root, "config", "update"), "update", num_blocks);

    const json& noise = member(root, "config", "noise");
    if (!noise.is_array() || noise.size() != static_cast<std::size_t>(num_blocks))
        fail("noise", "expected one noise spec per block (" + std::to_string(num_blocks) +
                          ")");
    for (std::size_t i = 0; i < noise.size(); ++i)
        exp.iteration.noise.push_back(
            parse_noise(noise[i], "noise[" + std::to_string(i) + "]", dims[i]));

    const json& run = member(root, "config", "run");
    check_object(run, "run");
    check_known(run, "run", {"horizon", "trials", "base-seed", "initial-point"});
    exp.iteration.horizon = as_integer(member(run, "run", "horizon"), "run.horizon");
    if (exp.iteration.horizon < 1) fail("run.horizon", "horizon must be >= 1");
    exp.trials = as_integer(member(run, "run", "trials"), "run.trials");
    if (exp.trials < 1) fail("run.trials", "trials must be >= 1");
    exp.base_seed = as_seed(member(run, "run", "base-seed"), "run.base-seed");
    exp.iteration.initial_point =
        as_vector(member(run, "run", "initial-point"), "run.initial-point");
    exp.iteration.seed = exp.base_seed;

    if (root.contains("bounds")) {
        const json& bounds = root.at("bounds");
        if (!bounds.is_array()) fail("bounds", "expected an array of curve requests");
        for (std::size_t i = 0; i < bounds.size(); ++i)
            exp.requests.push_back(
                parse_request(bounds[i], "bounds[" + std::to_string(i) + "]"));
    }

    if (root.contains("output")) {
        const json& output = root.at("output");
        check_object(output, "output");
        check_known(output, "output", {"directory", "stride", "csv-trials"});
        if (output.contains("directory"))
            exp.output.directory = as_string(output.at("directory"), "output.directory");
        if (output.contains("stride")) {
            exp.output.stride = as_integer(output.at("stride"), "output.stride");
            if (exp.output.stride < 1) fail("output.stride", "stride must be >= 1");
        }
        if (output.contains("csv-trials")) {
            exp.output.csv_trials = as_integer(output.at("csv-trials"), "output.csv-trials");
            if (exp.output.csv_trials < 0)
                fail("output.csv-trials", "csv-trials must be >= 0");
        }
    }
    exp.iteration.stride = exp.output.stride;

    try {
        exp.iteration.validate();
    } catch (const std::invalid_argument& e) {
        fail("config", e.what());
    }

    exp.canonical_json = root.dump();
    exp.config_digest = fnv1a64(exp.canonical_json);
    return exp;
}

Experiment load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_experiment(root);
}

}  // namespace opfix
