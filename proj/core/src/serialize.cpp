#include "fsreach/serialize.hpp"

#include <fmt/format.h>

#include "fsreach/error.hpp"

namespace fsreach {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json idx(const LatticePoint& p) { return std::vector<Index>(p.begin(), p.end()); }

std::string csv_vector(const Eigen::VectorXd& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += "," + format_number(v[i]);
    return s;
}

std::string header_columns(const std::string& prefix, std::size_t n) {
    std::string s;
    for (std::size_t i = 1; i <= n; ++i) s += fmt::format(",{}{}", prefix, i);
    return s;
}

}  // namespace

std::string format_number(double value) { return fmt::format("{}", value); }

json to_json(const SparsePMF& pmf) {
    json entries = json::array();
    for (std::size_t i = 0; i < pmf.size(); ++i) entries.push_back({{"idx", idx(pmf.point(i))}, {"p", pmf.mass(i)}});
    return {{"resolution", vec(pmf.lattice().resolution())}, {"origin", vec(pmf.lattice().origin())}, {"entries", entries}};
}

SparsePMF pmf_from_json(const json& doc) {
    try {
        const auto res = doc.at("resolution").get<std::vector<double>>();
        const auto origin = doc.at("origin").get<std::vector<double>>();
        if (res.size() != origin.size()) throw ParseError("/origin", "origin and resolution lengths differ");
        const Lattice lattice(Eigen::Map<const Eigen::VectorXd>(origin.data(), static_cast<Eigen::Index>(origin.size())),
                              Eigen::Map<const Eigen::VectorXd>(res.data(), static_cast<Eigen::Index>(res.size())));
        std::vector<std::pair<LatticePoint, double>> entries;
        for (const json& e : doc.at("entries")) {
            const auto i = e.at("idx").get<std::vector<Index>>();
            entries.emplace_back(LatticePoint(std::span<const Index>(i)), e.at("p").get<double>());
        }
        return SparsePMF(lattice, entries);
    } catch (const json::exception& e) {
        throw ParseError("/", e.what());
    }
}

json to_json(const OccupancyField& field) {
    json entries = json::array();
    for (std::size_t i = 0; i < field.size(); ++i) entries.push_back({{"idx", idx(field.point(i))}, {"phi", field.value(i)}});
    return {{"t", field.time_index()},
            {"resolution", vec(field.lattice().resolution())},
            {"origin", vec(field.lattice().origin())},
            {"entries", entries}};
}

json to_json(const AvoidBoxSet& set) {
    json boxes = json::array();
    for (const AvoidBox& b : set.boxes) {
        boxes.push_back({{"lo", vec(b.region.lower())},
                         {"hi", vec(b.region.upper())},
                         {"obstacle", b.obstacle},
                         {"cells_lo", idx(b.cells.lower)},
                         {"cells_hi", idx(b.cells.upper)}});
    }
    return {{"t", set.time_index}, {"alpha", set.alpha}, {"boxes", boxes}};
}

json to_json(const FsrResult& result) {
    json steps = json::array();
    for (int t = 0; t <= result.tau(); ++t) {
        const FsrStep& s = result.steps[static_cast<std::size_t>(t)];
        steps.push_back({{"t", t},
                         {"support_size", s.pmf.size()},
                         {"max_snap_error", s.max_snap_error},
                         {"retained_mass", s.retained_mass},
                         {"pmf", to_json(s.pmf)}});
    }
    return {{"tau", result.tau()}, {"steps", steps}};
}

std::string fsr_csv(const FsrResult& result) {
    if (result.steps.empty()) return {};
    const std::size_t n = result.pmf(0).dimension();
    std::string out = header_columns("idx_", n).substr(1) + ",mass,t\n";
    for (int t = 0; t <= result.tau(); ++t) {
        const SparsePMF& pmf = result.pmf(t);
        for (std::size_t i = 0; i < pmf.size(); ++i) {
            for (Index v : pmf.point(i)) out += fmt::format("{},", v);
            out += fmt::format("{},{}\n", format_number(pmf.mass(i)), t);
        }
    }
    return out;
}

std::string support_bounds_csv(const FsrResult& result) {
    if (result.steps.empty()) return {};
    const std::size_t n = result.pmf(0).dimension();
    std::string out = "t,cells";
    for (std::size_t i = 1; i <= n; ++i) out += fmt::format(",lo_{0},hi_{0}", i);
    out += '\n';
    for (int t = 0; t <= result.tau(); ++t) {
        const SparsePMF& pmf = result.pmf(t);
        const IndexBox b = pmf.bounding_box();
        const Eigen::VectorXd lo = pmf.lattice().coord(b.lower);
        const Eigen::VectorXd hi = pmf.lattice().coord(b.upper);
        out += fmt::format("{},{}", t, pmf.size());
        for (std::size_t i = 0; i < n; ++i) {
            const auto a = static_cast<Eigen::Index>(i);
            out += fmt::format(",{},{}", format_number(lo[a]), format_number(hi[a]));
        }
        out += '\n';
    }
    return out;
}

std::string fsr_timing_csv(const FsrResult& result, const std::string& label) {
    std::string out = fmt::format("t,{}_s\n", label);
    for (int t = 0; t <= result.tau(); ++t) {
        out += fmt::format("{},{}\n", t, format_number(result.steps[static_cast<std::size_t>(t)].runtime.count()));
    }
    return out;
}

std::string to_string(PlanStatus status) {
    switch (status) {
        case PlanStatus::Feasible: return "feasible";
        case PlanStatus::Infeasible: return "infeasible";
        case PlanStatus::Timeout: return "timeout";
    }
    return "unknown";
}

std::string to_string(StepStatus status) {
    switch (status) {
        case StepStatus::Planned: return "planned";
        case StepStatus::Timeout: return "timeout";
        case StepStatus::Infeasible: return "infeasible";
        case StepStatus::Goal: return "goal";
        case StepStatus::Collision: return "collision";
        case StepStatus::Final: return "final";
    }
    return "unknown";
}

json to_json(const PlanProblem& p) {
    json constraints = json::array();
    for (const AvoidConstraint& c : p.constraints) {
        json P = json::array();
        for (Eigen::Index r = 0; r < c.P.rows(); ++r) P.push_back(vec(c.P.row(r).transpose()));
        constraints.push_back({{"step", c.step}, {"obstacle", c.obstacle}, {"P", P}, {"q", vec(c.q)}});
    }
    json B = json::array();
    for (Eigen::Index r = 0; r < p.robot.input_gain.rows(); ++r) B.push_back(vec(p.robot.input_gain.row(r).transpose()));
    return {{"initial_state", vec(p.initial_state)},
            {"goal", vec(p.goal)},
            {"horizon", p.horizon},
            {"input_gain", B},
            {"input_box", {{"lo", vec(p.robot.input_box.lower())}, {"hi", vec(p.robot.input_box.upper())}}},
            {"workspace", {{"lo", vec(p.workspace.lower())}, {"hi", vec(p.workspace.upper())}}},
            {"big_m", p.big_m},
            {"margin", p.margin},
            {"objective", p.objective == ObjectiveMode::Linear ? "linear" : "quadratic"},
            {"binaries", p.binary_count()},
            {"dropped_boxes", p.dropped_boxes},
            {"constraints", constraints}};
}

json to_json(const PlanSolution& s, bool include_timing) {
    json controls = json::array();
    for (const Eigen::VectorXd& u : s.controls) controls.push_back(vec(u));
    json states = json::array();
    for (const Eigen::VectorXd& x : s.states) states.push_back(vec(x));
    json doc = {{"status", to_string(s.status)},
                {"objective", s.objective},
                {"nodes", s.nodes},
                {"controls", controls},
                {"states", states},
                {"binaries", s.binaries}};
    if (include_timing) doc["solve_time_s"] = s.solve_time.count();
    return doc;
}

json to_json(const SimTrace& trace) {
    json steps = json::array();
    for (const SimStep& s : trace.steps) {
        json obstacles = json::array();
        for (const Eigen::VectorXd& y : s.obstacles) obstacles.push_back(vec(y));
        steps.push_back({{"t", s.t},
                         {"robot", vec(s.robot)},
                         {"control", s.control ? vec(*s.control) : json(nullptr)},
                         {"obstacles", obstacles},
                         {"status", to_string(s.status)},
                         {"active_boxes", s.active_boxes},
                         {"nodes", s.nodes},
                         {"objective", s.objective},
                         {"avoid_next", to_json(s.avoid_next)}});
    }
    return {{"goal_reached", trace.goal_reached},
            {"collision_occurred", trace.collision_occurred},
            {"infeasible_at_step", trace.infeasible_at_step ? json(*trace.infeasible_at_step) : json(nullptr)},
            {"collision_at_step", trace.collision_at_step ? json(*trace.collision_at_step) : json(nullptr)},
            {"steps", steps}};
}

std::string trace_csv(const SimTrace& trace) {
    if (trace.steps.empty()) return {};
    const auto n = static_cast<std::size_t>(trace.steps.front().robot.size());
    std::size_t m = 0;
    for (const SimStep& s : trace.steps) {
        if (s.control) m = static_cast<std::size_t>(s.control->size());
    }
    std::string out = "t" + header_columns("x_", n) + header_columns("u_", m) + ",status\n";
    for (const SimStep& s : trace.steps) {
        out += fmt::format("{}{}", s.t, csv_vector(s.robot));
        if (s.control) {
            out += csv_vector(*s.control);
        } else {
            for (std::size_t j = 0; j < m; ++j) out += ",";
        }
        out += "," + to_string(s.status) + "\n";
    }
    return out;
}

std::string obstacles_csv(const SimTrace& trace) {
    if (trace.steps.empty()) return {};
    std::size_t n = 0;
    for (const SimStep& s : trace.steps) {
        if (!s.obstacles.empty()) n = static_cast<std::size_t>(s.obstacles.front().size());
    }
    std::string out = "t,obstacle" + header_columns("y_", n) + "\n";
    for (const SimStep& s : trace.steps) {
        for (std::size_t i = 0; i < s.obstacles.size(); ++i) out += fmt::format("{},{}{}\n", s.t, i, csv_vector(s.obstacles[i]));
    }
    return out;
}

std::string trace_timing_csv(const SimTrace& trace) {
    std::string out = "t,solve_time_s,nodes,active_boxes\n";
    for (const SimStep& s : trace.steps) {
        out += fmt::format("{},{},{},{}\n", s.t, format_number(s.solve_time.count()), s.nodes, s.active_boxes);
    }
    return out;
}

std::string collision_csv(const std::vector<CollisionEstimate>& estimates, int first_t) {
    std::string out = "t,samples,hits,probability,sigma,ci_low,ci_high\n";
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const CollisionEstimate& e = estimates[i];
        out += fmt::format("{},{},{},{},{},{},{}\n", first_t + static_cast<int>(i), e.samples, e.hits,
                           format_number(e.probability), format_number(e.sigma), format_number(e.ci_low),
                           format_number(e.ci_high));
    }
    return out;
}

}  // namespace fsreach
