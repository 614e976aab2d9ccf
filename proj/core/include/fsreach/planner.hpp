#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "fsreach/lattice.hpp"
#include "fsreach/occupancy.hpp"

namespace fsreach {

/// Point-mass robot x[t+1] = x[t] + input_gain u[t], u in input_box.
struct RobotModel {
    Eigen::MatrixXd input_gain;
    BoxRegion input_box;

    [[nodiscard]] std::size_t state_dim() const noexcept { return static_cast<std::size_t>(input_gain.rows()); }
    [[nodiscard]] std::size_t input_dim() const noexcept { return static_cast<std::size_t>(input_gain.cols()); }
};

enum class ObjectiveMode {
    /// sum_t (x_t - g)'Q(x_t - g) + u_t'R u_t
    Quadratic,
    /// sum_t sum_i Q_ii |x_t - g|_i via epigraph variables, plus u'Ru and a
    /// 1e-6 proximal term on the epigraph variables.
    Linear,
};

/// Everything the caller supplies; `build` turns it into a PlanProblem.
struct PlanInputs {
    RobotModel robot;
    Eigen::VectorXd initial_state;
    Eigen::VectorXd goal;
    int horizon = 5;
    /// avoid[k - 1] holds the boxes to avoid at lookahead step k.
    std::vector<AvoidBoxSet> avoid;
    Eigen::MatrixXd cost_state;
    Eigen::MatrixXd cost_input;
    std::optional<double> big_m;
    double margin = 1e-6;
    /// States are kept inside this box; it also bounds the big-M validation.
    BoxRegion workspace;
    ObjectiveMode objective = ObjectiveMode::Quadratic;
    /// Drop boxes that no input sequence can reach (exact: such boxes never bind).
    bool drop_unreachable = true;
};

/// One avoid box at one step in outward half-space form: the box is
/// {y : P y <= q}; leaving it through face l means p_l'y >= q_l + margin.
struct AvoidConstraint {
    int step = 1;
    int obstacle = 0;
    BoxRegion region;
    Eigen::MatrixXd P;
    Eigen::VectorXd q;

    [[nodiscard]] std::size_t faces() const noexcept { return static_cast<std::size_t>(q.size()); }
};

/// Half-space rows of an axis box: (-e_1, +e_1, -e_2, +e_2, ...).
[[nodiscard]] AvoidConstraint box_faces(const BoxRegion& box, int step, int obstacle = 0);

struct PlanProblem {
    RobotModel robot;
    Eigen::VectorXd initial_state;
    Eigen::VectorXd goal;
    int horizon = 1;
    Eigen::MatrixXd cost_state;
    Eigen::MatrixXd cost_input;
    double big_m = 0.0;
    double margin = 1e-6;
    BoxRegion workspace;
    ObjectiveMode objective = ObjectiveMode::Quadratic;
    std::vector<AvoidConstraint> constraints;
    std::size_t dropped_boxes = 0;

    [[nodiscard]] std::size_t binary_count() const;
};

enum class PlanStatus { Feasible, Infeasible, Timeout };

struct PlanSolution {
    PlanStatus status = PlanStatus::Infeasible;
    /// controls[t] for t = 0..N-1; empty unless a plan exists.
    std::vector<Eigen::VectorXd> controls;
    /// states[t] for t = 0..N (states[0] is the initial state).
    std::vector<Eigen::VectorXd> states;
    /// binaries[c][l] is delta for face l of constraints[c].
    std::vector<std::vector<int>> binaries;
    double objective = 0.0;
    std::chrono::duration<double> solve_time{0};
    std::size_t nodes = 0;

    [[nodiscard]] bool has_plan() const noexcept { return !controls.empty(); }
};

/// Materializes the mixed-integer problem; validates (or computes) M_big.
/// Throws BadBigM when a supplied M_big cannot deactivate some row over the workspace.
[[nodiscard]] PlanProblem build(const PlanInputs& inputs);

enum class BranchRule {
    /// Free binary whose relaxed value is closest to 1/2.
    MostFractional,
    /// Face with the smallest violation (the cheapest way out of the box).
    NearestFace,
};

struct SolveOptions {
    std::chrono::duration<double> time_budget{1.0};
    BranchRule branch_rule = BranchRule::MostFractional;
    /// Relative objective tolerance used for pruning.
    double relative_gap = 1e-7;
};

/// Depth-first branch-and-bound with best-bound pruning. Each node solves the
/// relaxation with the binaries projected out exactly, so relaxations are
/// plain convex QPs in the inputs.
[[nodiscard]] PlanSolution solve(const PlanProblem& problem, const SolveOptions& options = {});

/// Objective of a control sequence under the problem's cost.
[[nodiscard]] double evaluate_objective(const PlanProblem& problem, const std::vector<Eigen::VectorXd>& controls);

/// States from the initial state under `controls`.
[[nodiscard]] std::vector<Eigen::VectorXd> rollout(const PlanProblem& problem,
                                                   const std::vector<Eigen::VectorXd>& controls);

/// Checks a feasible solution against dynamics, input bounds and every big-M
/// row with its binaries substituted. Returns the largest violation (<= 0 is valid).
[[nodiscard]] double certificate_violation(const PlanProblem& problem, const PlanSolution& solution);

}  // namespace fsreach
