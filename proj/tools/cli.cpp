#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fsreach/error.hpp"
#include "fsreach/fsr.hpp"
#include "fsreach/occupancy.hpp"
#include "fsreach/predictor.hpp"
#include "fsreach/scenario.hpp"
#include "fsreach/serialize.hpp"
#include "fsreach/simulation.hpp"

namespace fsreach::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
    std::string command;
    std::string input;
    std::string out = "out";
    std::optional<double> alpha;
    std::optional<int> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<double> resolution;
    std::optional<int> tau;
    std::size_t samples = 100000;
    int repeats = 3;
    bool verbose = false;
};

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OutputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Writes artifacts and records them for the manifest. Timing files are listed
// without a digest since their contents vary run to run.
class ArtifactWriter {
public:
    explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw OutputError("cannot create output directory " + dir_.string());
    }

    void write(const std::string& name, const std::string& content, bool timing = false) {
        const fs::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw OutputError("cannot write " + path.string());
        out << content;
        out.close();
        if (!out) throw OutputError("failed writing " + path.string());
        artifacts_.push_back({{"path", name}, {"sha256", timing ? json(nullptr) : json(sha256_hex(content))}, {"timing", timing}});
    }

    void write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }

    void manifest(const Options& o, const json& config, std::optional<std::uint64_t> seed) {
        const json m = {{"tool", "fsreach"},
                        {"version", kVersion},
                        {"command", o.command},
                        {"input", fs::path(o.input).filename().string()},
                        {"config_hash", sha256_hex(config.dump())},
                        {"seed", seed ? json(*seed) : json(nullptr)},
                        {"artifacts", artifacts_}};
        const fs::path path = dir_ / "manifest.json";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw OutputError("cannot write " + path.string());
        out << m.dump(2) << '\n';
    }

private:
    fs::path dir_;
    json artifacts_ = json::array();
};

json read_input(const std::string& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw InputError("input file not found: " + path);
    std::ifstream probe(path);
    if (!probe) throw InputError("cannot read input file: " + path);
    return read_json(path);
}

Scenario scenario_with_overrides(const Options& o) {
    Scenario s = scenario_from_json(read_input(o.input));
    if (o.alpha) {
        if (*o.alpha < 0.0 || *o.alpha > 1.0) throw Error(ErrorCode::InvalidInput, "--alpha must lie in [0, 1]");
        s.alpha = *o.alpha;
    }
    if (o.horizon) {
        if (*o.horizon < 1) throw Error(ErrorCode::InvalidInput, "--horizon must be at least 1");
        s.horizon = *o.horizon;
    }
    if (o.seed) s.seed = *o.seed;
    if (o.resolution) {
        if (!(*o.resolution > 0.0)) throw Error(ErrorCode::InvalidInput, "--resolution must be positive");
        s.resolution = *o.resolution;
    }
    return s;
}

FsrProblem fsr_with_overrides(const Options& o) {
    FsrProblem p = fsr_problem_from_json(read_input(o.input));
    if (o.tau) {
        if (*o.tau < 0) throw Error(ErrorCode::InvalidInput, "--tau must be nonnegative");
        p.tau = *o.tau;
    }
    if (o.resolution) {
        if (!(*o.resolution > 0.0)) throw Error(ErrorCode::InvalidInput, "--resolution must be positive");
        p.resolution = *o.resolution;
    }
    return p;
}

json config_of(const Options& o, json document) {
    return {{"command", o.command}, {"document", std::move(document)}, {"tau", o.tau ? json(*o.tau) : json(nullptr)},
            {"samples", o.samples}};
}

int run_fsr(const Options& o) {
    const FsrProblem p = fsr_with_overrides(o);
    const SparsePMF initial = p.initial_pmf();
    const SparsePMF v = discretize(p.disturbance, p.lattice());
    const FsrResult r = fsr_compute(initial, DynamicsMap::linear(p.dynamics), v, p.tau, {p.prune_threshold});
    ArtifactWriter w(o.out);
    w.write_json("fsr.json", to_json(r));
    w.write("fsr.csv", fsr_csv(r));
    w.write("support_bounds.csv", support_bounds_csv(r));
    w.write("fsr_timing.csv", fsr_timing_csv(r, "fsr"), true);
    w.manifest(o, config_of(o, to_json(p)), std::nullopt);
    spdlog::info("fsr: tau={} final support {}", p.tau, r.pmf(p.tau).size());
    return kExitOk;
}

double max_abs_difference(const SparsePMF& a, const SparsePMF& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.mass(i) - b.mass_at(a.point(i))));
    for (std::size_t i = 0; i < b.size(); ++i) d = std::max(d, std::abs(b.mass(i) - a.mass_at(b.point(i))));
    return d;
}

int run_bench_dp(const Options& o) {
    const FsrProblem p = fsr_with_overrides(o);
    if (!p.dp_domain) throw Error(ErrorCode::InvalidInput, "bench-dp needs a dp_domain in the input");
    const SparsePMF initial = p.initial_pmf();
    const SparsePMF v = discretize(p.disturbance, p.lattice());
    const DynamicsMap f = DynamicsMap::linear(p.dynamics);
    const auto T = static_cast<std::size_t>(p.tau) + 1;
    std::vector<double> fsr_best(T, std::numeric_limits<double>::infinity());
    std::vector<double> dp_best(T, std::numeric_limits<double>::infinity());
    FsrResult sparse;
    FsrResult dense;
    for (int rep = 0; rep < std::max(1, o.repeats); ++rep) {
        sparse = fsr_compute(initial, f, v, p.tau);
        dense = dp_baseline(initial, f, v, *p.dp_domain, p.tau);
        for (std::size_t t = 0; t < T; ++t) {
            fsr_best[t] = std::min(fsr_best[t], sparse.steps[t].runtime.count());
            dp_best[t] = std::min(dp_best[t], dense.steps[t].runtime.count());
        }
    }
    std::string runtime = "t,fsr_s,dp_s\n";
    std::string agreement = "t,max_abs_diff,fsr_mass,dp_mass,fsr_support,dp_support\n";
    for (std::size_t t = 0; t < T; ++t) {
        runtime += fmt::format("{},{},{}\n", t, format_number(fsr_best[t]), format_number(dp_best[t]));
        const int ti = static_cast<int>(t);
        agreement += fmt::format("{},{},{},{},{},{}\n", t, format_number(max_abs_difference(sparse.pmf(ti), dense.pmf(ti))),
                                 format_number(total_mass(sparse.pmf(ti))), format_number(total_mass(dense.pmf(ti))),
                                 sparse.pmf(ti).size(), dense.pmf(ti).size());
    }
    ArtifactWriter w(o.out);
    w.write("runtime.csv", runtime, true);
    w.write("agreement.csv", agreement);
    w.manifest(o, config_of(o, to_json(p)), std::nullopt);
    return kExitOk;
}

std::vector<Eigen::VectorXd> initial_positions(const Scenario& s) {
    std::vector<Eigen::VectorXd> out;
    for (const ObstacleSpec& ob : s.obstacles) out.push_back(ob.initial_position);
    return out;
}

int run_occupancy(const Options& o) {
    const Scenario s = scenario_with_overrides(o);
    const int tau = o.tau.value_or(s.horizon);
    if (tau < 0) throw Error(ErrorCode::InvalidInput, "--tau must be nonnegative");
    const auto predictors = make_predictors(s, tau);
    const auto positions = initial_positions(s);
    ArtifactWriter w(o.out);
    for (int k = 0; k <= tau; ++k) {
        json fields = json::array();
        for (std::size_t i = 0; i < predictors.size(); ++i) {
            fields.push_back(to_json(occupancy(predictors[i]->pmf(k, positions[i]), predictors[i]->geometry(), k)));
        }
        w.write_json(fmt::format("occupancy_t{:02}.json", k), {{"t", k}, {"obstacles", fields}});
    }
    w.manifest(o, config_of(o, to_json(s)), s.seed);
    return kExitOk;
}

int run_avoid(const Options& o) {
    const Scenario s = scenario_with_overrides(o);
    const int tau = o.tau.value_or(s.horizon);
    if (tau < 1) throw Error(ErrorCode::InvalidInput, "--tau must be at least 1 for avoid sets");
    const auto predictors = make_predictors(s, tau);
    const std::vector<AvoidBoxSet> sets = predict_avoid_sets(predictors, initial_positions(s), s.alpha, tau);
    ArtifactWriter w(o.out);
    for (const AvoidBoxSet& a : sets) w.write_json(fmt::format("avoid_t{:02}.json", a.time_index), to_json(a));
    w.manifest(o, config_of(o, to_json(s)), s.seed);
    return kExitOk;
}

int run_plan(const Options& o) {
    const Scenario s = scenario_with_overrides(o);
    const auto predictors = make_predictors(s, s.horizon);
    const RecedingHorizonResult r =
        receding_horizon_step(s.robot_initial, initial_positions(s), predictors, s.alpha, s.planner_config(), s.goal);
    ArtifactWriter w(o.out);
    w.write_json("plan_problem.json", to_json(r.problem));
    w.write_json("plan.json", to_json(r.plan));
    w.write("plan_timing.csv", fmt::format("solve_time_s,nodes\n{},{}\n", format_number(r.plan.solve_time.count()), r.plan.nodes), true);
    w.manifest(o, config_of(o, to_json(s)), s.seed);
    std::cout << fmt::format("plan: {} objective {} nodes {}\n", to_string(r.plan.status), format_number(r.plan.objective), r.plan.nodes);
    return r.plan.has_plan() ? kExitOk : kExitInfeasible;
}

int outcome_code(const SimTrace& t) {
    if (t.collision_occurred) return kExitCollision;
    if (t.infeasible_at_step) return kExitInfeasible;
    return t.goal_reached ? kExitOk : kExitMissionIncomplete;
}

json summary(const SimTrace& t) {
    return {{"goal_reached", t.goal_reached},
            {"collision_occurred", t.collision_occurred},
            {"infeasible_at_step", t.infeasible_at_step ? json(*t.infeasible_at_step) : json(nullptr)},
            {"collision_at_step", t.collision_at_step ? json(*t.collision_at_step) : json(nullptr)},
            {"records", t.steps.size()},
            {"final_t", t.steps.empty() ? 0 : t.steps.back().t}};
}

int run_simulate(const Options& o) {
    const Scenario s = scenario_with_overrides(o);
    const SimTrace t = run(s);
    ArtifactWriter w(o.out);
    w.write_json("trace.json", to_json(t));
    w.write("trace.csv", trace_csv(t));
    w.write("obstacles.csv", obstacles_csv(t));
    w.write("trace_timing.csv", trace_timing_csv(t), true);
    w.write_json("summary.json", summary(t));
    w.manifest(o, config_of(o, to_json(s)), s.seed);
    std::cout << fmt::format("simulate: alpha {} seed {}: {}\n", format_number(s.alpha), s.seed, summary(t).dump());
    return outcome_code(t);
}

int run_validate(const Options& o) {
    const Scenario s = scenario_with_overrides(o);
    const SimTrace t = run(s);
    const std::vector<CollisionEstimate> est = validate_trace(s, t, o.samples, s.seed + 1'000'003);
    const double sigma = std::sqrt(s.alpha * (1.0 - s.alpha) / static_cast<double>(o.samples));
    const double bound = s.alpha + 3.0 * sigma;
    json violations = json::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        worst = std::max(worst, est[i].probability);
        if (est[i].probability > bound) violations.push_back(static_cast<int>(i) + 1);
    }
    ArtifactWriter w(o.out);
    w.write("collision.csv", collision_csv(est));
    w.write_json("validate.json", {{"alpha", s.alpha},
                                   {"samples", o.samples},
                                   {"bound", bound},
                                   {"steps_checked", est.size()},
                                   {"max_probability", worst},
                                   {"violations", violations},
                                   {"trace", summary(t)}});
    w.manifest(o, config_of(o, to_json(s)), s.seed);
    std::cout << fmt::format("validate: {} steps, max estimate {}, bound {}, violations {}\n", est.size(),
                             format_number(worst), format_number(bound), violations.size());
    return violations.empty() ? kExitOk : kExitMissionIncomplete;
}

void setup_logging(bool verbose) {
    auto logger = spdlog::get("fsreach");
    if (!logger) logger = spdlog::stderr_color_mt("fsreach");
    logger->set_pattern("%l: %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);
}

}  // namespace

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

int dispatch(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    return dispatch(static_cast<int>(argv.size()), argv.data());
}

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Forward stochastic reachability, occupancy avoid sets and receding-horizon planning"};
    app.require_subcommand(1);
    Options o;
    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const Options&);
    };
    const Sub subs[] = {
        {"fsr", "propagate an FSR problem; writes per-step PMFs and support bounds", run_fsr},
        {"bench-dp", "time the sparse recursion against the dense baseline", run_bench_dp},
        {"occupancy", "occupancy fields of each obstacle from its initial position", run_occupancy},
        {"avoid", "multi-obstacle avoid sets from the initial positions", run_avoid},
        {"plan", "solve one receding-horizon problem from the initial configuration", run_plan},
        {"simulate", "closed-loop run; exit 0 goal, 1 mission end, 2 infeasible, 3 collision", run_simulate},
        {"validate", "closed-loop run followed by Monte-Carlo collision estimates", run_validate},
    };
    std::vector<std::pair<CLI::App*, const Sub*>> registered;
    for (const Sub& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("input", o.input, "scenario or FSR problem JSON")->required();
        sub->add_option("--out,-o", o.out, "output directory")->capture_default_str();
        sub->add_option("--alpha", o.alpha, "collision probability threshold");
        sub->add_option("--horizon", o.horizon, "planning horizon");
        sub->add_option("--seed", o.seed, "obstacle RNG seed");
        sub->add_option("--resolution", o.resolution, "lattice resolution");
        sub->add_option("--tau", o.tau, "propagation steps");
        sub->add_option("--samples", o.samples, "Monte-Carlo samples per step")->capture_default_str();
        sub->add_option("--repeats", o.repeats, "timing repetitions (best is kept)")->capture_default_str();
        sub->add_flag("--verbose,-v", o.verbose, "log progress to stderr");
        registered.emplace_back(sub, &s);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitUsage;
    }
    setup_logging(o.verbose);
    for (const auto& [sub, s] : registered) {
        if (!sub->parsed()) continue;
        o.command = s->name;
        try {
            return s->run(o);
        } catch (const InputError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitNoInput;
        } catch (const ParseError& e) {
            std::cerr << "error: " << o.input << ": " << e.what() << '\n';
            return kExitDataError;
        } catch (const OutputError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitCantCreate;
        } catch (const Error& e) {
            std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
            return kExitDataError;
        } catch (const std::exception& e) {
            std::cerr << "internal error: " << e.what() << '\n';
            return kExitSoftware;
        }
    }
    return kExitUsage;
}

}  // namespace fsreach::cli
