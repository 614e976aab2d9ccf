#include "fsreach/scenario.hpp"

#include <fstream>
#include <sstream>

#include "fsreach/error.hpp"

namespace fsreach {

using nlohmann::json;

namespace {

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

const json& require(const json& obj, const std::string& ptr, const std::string& key) {
    if (!obj.is_object()) throw ParseError(ptr.empty() ? "/" : ptr, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(child(ptr, key), "missing required field '" + key + "'");
    return *it;
}

const json* optional_field(const json& obj, const std::string& key) {
    const auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& j, const std::string& ptr) {
    if (!j.is_number()) throw ParseError(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(ptr, "expected a finite number");
    return v;
}

double positive(const json& j, const std::string& ptr) {
    const double v = number(j, ptr);
    if (!(v > 0.0)) throw ParseError(ptr, "expected a positive number");
    return v;
}

std::int64_t integer(const json& j, const std::string& ptr) {
    if (!j.is_number_integer()) throw ParseError(ptr, "expected an integer");
    return j.get<std::int64_t>();
}

std::string string(const json& j, const std::string& ptr) {
    if (!j.is_string()) throw ParseError(ptr, "expected a string");
    return j.get<std::string>();
}

Eigen::VectorXd vector(const json& j, const std::string& ptr, std::optional<std::size_t> size = std::nullopt) {
    if (!j.is_array()) throw ParseError(ptr, "expected an array of numbers");
    if (size && j.size() != *size) throw ParseError(ptr, "expected " + std::to_string(*size) + " entries, got " + std::to_string(j.size()));
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], child(ptr, i));
    return v;
}

std::vector<double> list(const json& j, const std::string& ptr) {
    const Eigen::VectorXd v = vector(j, ptr);
    return {v.data(), v.data() + v.size()};
}

Eigen::MatrixXd matrix(const json& j, const std::string& ptr, std::size_t rows, std::size_t cols) {
    if (!j.is_array() || j.size() != rows) throw ParseError(ptr, "expected " + std::to_string(rows) + " rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) m.row(static_cast<Eigen::Index>(r)) = vector(j[r], child(ptr, r), cols).transpose();
    return m;
}

BoxRegion box(const json& j, const std::string& ptr, std::optional<std::size_t> dim = std::nullopt) {
    const Eigen::VectorXd lo = vector(require(j, ptr, "lo"), child(ptr, "lo"), dim);
    const Eigen::VectorXd hi = vector(require(j, ptr, "hi"), child(ptr, "hi"), static_cast<std::size_t>(lo.size()));
    if ((lo.array() > hi.array()).any()) throw ParseError(ptr, "lo must not exceed hi");
    return {lo, hi};
}

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
    return rows;
}

json to_json(const BoxRegion& b) { return {{"lo", to_json(b.lower())}, {"hi", to_json(b.upper())}}; }

ObstacleGeometry geometry_from_json(const json& j, const std::string& ptr, std::size_t dim) {
    const std::string type = string(require(j, ptr, "type"), child(ptr, "type"));
    if (type == "box") {
        const Eigen::VectorXd hw = vector(require(j, ptr, "half_widths"), child(ptr, "half_widths"), dim);
        if ((hw.array() <= 0.0).any()) throw ParseError(child(ptr, "half_widths"), "half widths must be positive");
        return CenteredBox{hw};
    }
    if (type == "kernel") {
        const json& cells = require(j, ptr, "cells");
        if (!cells.is_array() || cells.empty()) throw ParseError(child(ptr, "cells"), "expected a nonempty array of index vectors");
        IndicatorKernel k;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const std::string cp = child(child(ptr, "cells"), i);
            if (!cells[i].is_array() || cells[i].size() != dim) throw ParseError(cp, "expected " + std::to_string(dim) + " integers");
            LatticePoint p(dim);
            for (std::size_t a = 0; a < dim; ++a) p[a] = integer(cells[i][a], child(cp, a));
            k.cells.push_back(p);
        }
        return k;
    }
    throw ParseError(child(ptr, "type"), "unknown geometry type '" + type + "'");
}

json to_json(const ObstacleGeometry& g) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CenteredBox>) {
                return {{"type", "box"}, {"half_widths", to_json(s.half_widths)}};
            } else {
                json cells = json::array();
                for (const LatticePoint& p : s.cells) cells.push_back(std::vector<Index>(p.begin(), p.end()));
                return {{"type", "kernel"}, {"cells", cells}};
            }
        },
        g.variant());
}

DisturbanceSpec disturbance_from_json(const json& j, const std::string& ptr, std::size_t dim, double default_sample_time,
                                      double resolution) {
    const std::string type = string(require(j, ptr, "type"), child(ptr, "type"));
    DisturbanceSpec spec;
    if (type == "truncated_gaussian") {
        TruncatedGaussian tg;
        tg.support_box = box(require(j, ptr, "support"), child(ptr, "support"), dim);
        tg.mean = vector(require(j, ptr, "mean"), child(ptr, "mean"), dim);
        tg.covariance = matrix(require(j, ptr, "covariance"), child(ptr, "covariance"), dim, dim);
        spec = tg;
    } else if (type == "finite_speed_set") {
        FiniteSpeedSet fs;
        fs.speeds = list(require(j, ptr, "speeds"), child(ptr, "speeds"));
        fs.probs = list(require(j, ptr, "probs"), child(ptr, "probs"));
        if (fs.speeds.size() != fs.probs.size()) throw ParseError(child(ptr, "probs"), "speeds and probs must have equal length");
        const json* gain = optional_field(j, "gain");
        fs.gain_matrix = gain ? matrix(*gain, child(ptr, "gain"), dim, (*gain)[0].size()) : Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        fs.per_axis_sign = vector(require(j, ptr, "sign"), child(ptr, "sign"), static_cast<std::size_t>(fs.gain_matrix.cols()));
        const json* ts = optional_field(j, "sample_time");
        fs.sample_time = ts ? positive(*ts, child(ptr, "sample_time")) : default_sample_time;
        spec = fs;
    } else if (type == "explicit") {
        const json& entries = require(j, ptr, "entries");
        if (!entries.is_array()) throw ParseError(child(ptr, "entries"), "expected an array");
        std::vector<std::pair<LatticePoint, double>> e;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const std::string ep = child(child(ptr, "entries"), i);
            const json& idx = require(entries[i], ep, "idx");
            if (!idx.is_array() || idx.size() != dim) throw ParseError(child(ep, "idx"), "expected " + std::to_string(dim) + " integers");
            LatticePoint p(dim);
            for (std::size_t a = 0; a < dim; ++a) p[a] = integer(idx[a], child(child(ep, "idx"), a));
            e.emplace_back(p, number(require(entries[i], ep, "p"), child(ep, "p")));
        }
        try {
            spec = ExplicitPmf{SparsePMF(Lattice::uniform(dim, resolution), e)};
        } catch (const Error& err) {
            throw ParseError(child(ptr, "entries"), err.what());
        }
    } else {
        throw ParseError(child(ptr, "type"), "unknown disturbance type '" + type + "'");
    }
    try {
        validate(spec);
        if (image_dimension(spec) != dim) throw Error(ErrorCode::InvalidInput, "disturbance dimension differs from the state dimension");
    } catch (const ParseError&) {
        throw;
    } catch (const Error& err) {
        throw ParseError(ptr, err.what());
    }
    return spec;
}

json to_json(const DisturbanceSpec& spec) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, TruncatedGaussian>) {
                return {{"type", "truncated_gaussian"},
                        {"support", to_json(s.support_box)},
                        {"mean", to_json(s.mean)},
                        {"covariance", to_json(s.covariance)}};
            } else if constexpr (std::is_same_v<T, FiniteSpeedSet>) {
                return {{"type", "finite_speed_set"}, {"speeds", s.speeds},           {"probs", s.probs},
                        {"sign", to_json(s.per_axis_sign)}, {"gain", to_json(s.gain_matrix)}, {"sample_time", s.sample_time}};
            } else {
                json entries = json::array();
                for (std::size_t i = 0; i < s.pmf.size(); ++i) {
                    const LatticePoint& p = s.pmf.point(i);
                    entries.push_back({{"idx", std::vector<Index>(p.begin(), p.end())}, {"p", s.pmf.mass(i)}});
                }
                return {{"type", "explicit"}, {"entries", entries}};
            }
        },
        spec);
}

void check_schema(const json& doc, const std::string& kind) {
    if (!doc.is_object()) throw ParseError("/", "expected a JSON object");
    const std::int64_t schema = integer(require(doc, "", "schema"), "/schema");
    if (schema != kSchemaVersion) throw ParseError("/schema", "unsupported schema version " + std::to_string(schema));
    if (document_kind(doc) != kind) throw ParseError("/kind", "expected kind '" + kind + "'");
}

}  // namespace

PlannerConfig Scenario::planner_config() const {
    PlannerConfig c;
    c.robot = robot();
    c.cost_state = cost_state;
    c.cost_input = cost_input;
    c.horizon = horizon;
    c.margin = margin;
    c.big_m = big_m;
    c.workspace = workspace;
    c.objective = objective;
    c.solve.time_budget = std::chrono::duration<double>(time_budget);
    return c;
}

SparsePMF FsrProblem::initial_pmf() const {
    const Lattice l = lattice();
    if (const auto* u = std::get_if<UniformInitial>(&initial)) return SparsePMF::uniform(l, u->box);
    return SparsePMF::delta(l, l.snap(std::get<DeltaInitial>(initial).point));
}

std::string document_kind(const json& doc) {
    const json* kind = doc.is_object() ? optional_field(doc, "kind") : nullptr;
    return kind ? string(*kind, "/kind") : "scenario";
}

Scenario scenario_from_json(const json& doc) {
    check_schema(doc, "scenario");
    Scenario s;
    if (const json* name = optional_field(doc, "name")) s.name = string(*name, "/name");
    s.resolution = positive(require(require(doc, "", "lattice"), "/lattice", "resolution"), "/lattice/resolution");

    const json& robot = require(doc, "", "robot");
    s.sample_time = positive(require(robot, "/robot", "sample_time"), "/robot/sample_time");
    s.robot_initial = vector(require(robot, "/robot", "initial"), "/robot/initial");
    const std::size_t n = static_cast<std::size_t>(s.robot_initial.size());
    if (n == 0 || n > kMaxDimension) throw ParseError("/robot/initial", "state dimension must be between 1 and 8");
    s.goal = vector(require(robot, "/robot", "goal"), "/robot/goal", n);
    s.input_box = box(require(robot, "/robot", "input_box"), "/robot/input_box");
    const std::size_t m = s.input_box.dimension();
    if (const json* gain = optional_field(robot, "input_gain")) {
        s.input_gain = matrix(*gain, "/robot/input_gain", n, m);
    } else {
        if (m != n) throw ParseError("/robot/input_gain", "required when input and state dimensions differ");
        s.input_gain = s.sample_time * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    }
    s.workspace = box(require(doc, "", "workspace"), "/workspace", n);

    const json& obstacles = require(doc, "", "obstacles");
    if (!obstacles.is_array()) throw ParseError("/obstacles", "expected an array");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const std::string p = child("/obstacles", i);
        ObstacleSpec o;
        o.initial_position = vector(require(obstacles[i], p, "initial"), child(p, "initial"), n);
        try {
            o.geometry = geometry_from_json(require(obstacles[i], p, "geometry"), child(p, "geometry"), n);
        } catch (const ParseError&) {
            throw;
        } catch (const Error& err) {
            throw ParseError(child(p, "geometry"), err.what());
        }
        o.disturbance = disturbance_from_json(require(obstacles[i], p, "disturbance"), child(p, "disturbance"), n, s.sample_time, s.resolution);
        s.obstacles.push_back(std::move(o));
    }

    s.alpha = number(require(doc, "", "alpha"), "/alpha");
    if (s.alpha < 0.0 || s.alpha > 1.0) throw ParseError("/alpha", "alpha must lie in [0, 1]");
    s.horizon = static_cast<int>(integer(require(doc, "", "horizon"), "/horizon"));
    if (s.horizon < 1) throw ParseError("/horizon", "horizon must be at least 1");
    s.mission_length = static_cast<int>(integer(require(doc, "", "mission_length"), "/mission_length"));
    if (s.mission_length < 1) throw ParseError("/mission_length", "mission_length must be at least 1");
    const std::int64_t seed = integer(require(doc, "", "seed"), "/seed");
    if (seed < 0) throw ParseError("/seed", "seed must be nonnegative");
    s.seed = static_cast<std::uint64_t>(seed);

    const auto ni = static_cast<Eigen::Index>(n);
    const auto mi = static_cast<Eigen::Index>(m);
    s.cost_state = Eigen::MatrixXd::Identity(ni, ni);
    s.cost_input = 0.01 * Eigen::MatrixXd::Identity(mi, mi);
    s.goal_tolerance = s.resolution;
    if (const json* planner = optional_field(doc, "planner")) {
        if (const json* q = optional_field(*planner, "Q")) s.cost_state = matrix(*q, "/planner/Q", n, n);
        if (const json* r = optional_field(*planner, "R")) s.cost_input = matrix(*r, "/planner/R", m, m);
        if (const json* e = optional_field(*planner, "margin")) s.margin = positive(*e, "/planner/margin");
        if (const json* bm = optional_field(*planner, "big_m")) s.big_m = positive(*bm, "/planner/big_m");
        if (const json* tb = optional_field(*planner, "time_budget")) s.time_budget = positive(*tb, "/planner/time_budget");
        if (const json* obj = optional_field(*planner, "objective")) {
            const std::string o = string(*obj, "/planner/objective");
            if (o == "quadratic") {
                s.objective = ObjectiveMode::Quadratic;
            } else if (o == "linear") {
                s.objective = ObjectiveMode::Linear;
            } else {
                throw ParseError("/planner/objective", "expected 'quadratic' or 'linear'");
            }
        }
    }
    if (const json* tol = optional_field(doc, "goal_tolerance")) s.goal_tolerance = positive(*tol, "/goal_tolerance");
    return s;
}

json to_json(const Scenario& s) {
    json obstacles = json::array();
    for (const ObstacleSpec& o : s.obstacles) {
        obstacles.push_back({{"initial", to_json(o.initial_position)},
                             {"geometry", to_json(o.geometry)},
                             {"disturbance", to_json(o.disturbance)}});
    }
    json planner = {{"Q", to_json(s.cost_state)},
                    {"R", to_json(s.cost_input)},
                    {"margin", s.margin},
                    {"time_budget", s.time_budget},
                    {"objective", s.objective == ObjectiveMode::Linear ? "linear" : "quadratic"}};
    if (s.big_m) planner["big_m"] = *s.big_m;
    return {{"schema", kSchemaVersion},
            {"kind", "scenario"},
            {"name", s.name},
            {"lattice", {{"resolution", s.resolution}}},
            {"robot",
             {{"sample_time", s.sample_time},
              {"initial", to_json(s.robot_initial)},
              {"goal", to_json(s.goal)},
              {"input_box", to_json(s.input_box)},
              {"input_gain", to_json(s.input_gain)}}},
            {"workspace", to_json(s.workspace)},
            {"obstacles", obstacles},
            {"alpha", s.alpha},
            {"horizon", s.horizon},
            {"mission_length", s.mission_length},
            {"seed", s.seed},
            {"goal_tolerance", s.goal_tolerance},
            {"planner", planner}};
}

FsrProblem fsr_problem_from_json(const json& doc) {
    check_schema(doc, "fsr");
    FsrProblem p;
    if (const json* name = optional_field(doc, "name")) p.name = string(*name, "/name");
    p.resolution = positive(require(require(doc, "", "lattice"), "/lattice", "resolution"), "/lattice/resolution");
    const json& dyn = require(doc, "", "dynamics");
    const json& a = require(dyn, "/dynamics", "A");
    if (!a.is_array() || a.empty() || a.size() > kMaxDimension) throw ParseError("/dynamics/A", "expected a square matrix of dimension 1 to 8");
    const std::size_t n = a.size();
    p.dynamics = matrix(a, "/dynamics/A", n, n);
    const json& init = require(doc, "", "initial");
    const std::string type = string(require(init, "/initial", "type"), "/initial/type");
    if (type == "uniform") {
        p.initial = UniformInitial{box(require(init, "/initial", "box"), "/initial/box", n)};
    } else if (type == "delta") {
        p.initial = DeltaInitial{vector(require(init, "/initial", "point"), "/initial/point", n)};
    } else {
        throw ParseError("/initial/type", "expected 'uniform' or 'delta'");
    }
    p.disturbance = disturbance_from_json(require(doc, "", "disturbance"), "/disturbance", n, 1.0, p.resolution);
    p.tau = static_cast<int>(integer(require(doc, "", "tau"), "/tau"));
    if (p.tau < 0) throw ParseError("/tau", "tau must be nonnegative");
    if (const json* d = optional_field(doc, "dp_domain")) p.dp_domain = box(*d, "/dp_domain", n);
    if (const json* pr = optional_field(doc, "prune_threshold")) {
        p.prune_threshold = number(*pr, "/prune_threshold");
        if (p.prune_threshold < 0.0) throw ParseError("/prune_threshold", "must be nonnegative");
    }
    return p;
}

json to_json(const FsrProblem& p) {
    json init = std::holds_alternative<UniformInitial>(p.initial)
                    ? json{{"type", "uniform"}, {"box", to_json(std::get<UniformInitial>(p.initial).box)}}
                    : json{{"type", "delta"}, {"point", to_json(std::get<DeltaInitial>(p.initial).point)}};
    json doc = {{"schema", kSchemaVersion},
                {"kind", "fsr"},
                {"name", p.name},
                {"lattice", {{"resolution", p.resolution}}},
                {"dynamics", {{"A", to_json(p.dynamics)}}},
                {"initial", init},
                {"disturbance", to_json(p.disturbance)},
                {"tau", p.tau},
                {"prune_threshold", p.prune_threshold}};
    if (p.dp_domain) doc["dp_domain"] = to_json(*p.dp_domain);
    return doc;
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("/", std::string("malformed JSON: ") + e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& path) { return scenario_from_json(read_json(path)); }

FsrProblem load_fsr_problem(const std::filesystem::path& path) { return fsr_problem_from_json(read_json(path)); }

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path.string());
    out << to_json(scenario).dump(2) << '\n';
}

}  // namespace fsreach
