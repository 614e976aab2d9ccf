#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "fsreach/disturbance.hpp"
#include "fsreach/fsr.hpp"
#include "fsreach/occupancy.hpp"
#include "fsreach/planner.hpp"
#include "fsreach/predictor.hpp"

namespace fsreach {

inline constexpr int kSchemaVersion = 1;

struct ObstacleSpec {
    Eigen::VectorXd initial_position;
    ObstacleGeometry geometry = CenteredBox{Eigen::VectorXd::Constant(2, 0.5)};
    DisturbanceSpec disturbance;
};

/// Closed-loop experiment: one point robot, independent random-walk obstacles.
struct Scenario {
    std::string name;
    double resolution = 0.05;
    double sample_time = 0.2;
    /// Defaults to sample_time * I.
    Eigen::MatrixXd input_gain;
    BoxRegion input_box;
    Eigen::VectorXd robot_initial;
    Eigen::VectorXd goal;
    BoxRegion workspace;
    std::vector<ObstacleSpec> obstacles;
    double alpha = 0.045;
    int horizon = 5;
    int mission_length = 50;
    std::uint64_t seed = 0;
    Eigen::MatrixXd cost_state;
    Eigen::MatrixXd cost_input;
    double margin = 1e-6;
    std::optional<double> big_m;
    ObjectiveMode objective = ObjectiveMode::Quadratic;
    double time_budget = 1.0;
    /// Goal reached when |x - goal|_inf <= goal_tolerance; defaults to one cell.
    double goal_tolerance = 0.05;

    [[nodiscard]] std::size_t state_dim() const noexcept { return static_cast<std::size_t>(robot_initial.size()); }
    [[nodiscard]] Lattice lattice() const { return Lattice::uniform(state_dim(), resolution); }
    [[nodiscard]] RobotModel robot() const { return {input_gain, input_box}; }
    [[nodiscard]] PlannerConfig planner_config() const;
};

/// Initial PMF specification for an FSR run.
struct UniformInitial {
    BoxRegion box;
};
struct DeltaInitial {
    Eigen::VectorXd point;
};

/// Open-loop propagation problem (the `fsr` and `bench-dp` commands).
struct FsrProblem {
    std::string name;
    double resolution = 0.1;
    std::variant<UniformInitial, DeltaInitial> initial;
    /// Linear map A of x[t+1] = A x[t] + v[t].
    Eigen::MatrixXd dynamics;
    DisturbanceSpec disturbance;
    int tau = 10;
    /// Gridded domain for the dense baseline.
    std::optional<BoxRegion> dp_domain;
    double prune_threshold = 0.0;

    [[nodiscard]] std::size_t state_dim() const noexcept { return static_cast<std::size_t>(dynamics.rows()); }
    [[nodiscard]] Lattice lattice() const { return Lattice::uniform(state_dim(), resolution); }
    [[nodiscard]] SparsePMF initial_pmf() const;
};

/// Document kind stored under "kind": "scenario" or "fsr".
[[nodiscard]] std::string document_kind(const nlohmann::json& doc);

/// Parse and validate; violations raise ParseError naming the JSON pointer.
[[nodiscard]] Scenario scenario_from_json(const nlohmann::json& doc);
[[nodiscard]] nlohmann::json to_json(const Scenario& scenario);
[[nodiscard]] FsrProblem fsr_problem_from_json(const nlohmann::json& doc);
[[nodiscard]] nlohmann::json to_json(const FsrProblem& problem);

[[nodiscard]] nlohmann::json read_json(const std::filesystem::path& path);
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);
[[nodiscard]] FsrProblem load_fsr_problem(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

}  // namespace fsreach
