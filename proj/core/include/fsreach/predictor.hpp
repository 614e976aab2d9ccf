#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fsreach/fsr.hpp"
#include "fsreach/occupancy.hpp"
#include "fsreach/planner.hpp"

namespace fsreach {

/// Occupancy prediction for one random-walk obstacle x[t+1] = x[t] + v[t].
/// The FSR from a delta at the lattice origin is computed once; predictions
/// from a measured position are lattice translations of it.
class ObstaclePredictor {
public:
    ObstaclePredictor(const Lattice& lattice, const SparsePMF& displacement, ObstacleGeometry geometry, int horizon,
                      const FsrOptions& options = {});

    [[nodiscard]] const Lattice& lattice() const noexcept { return lattice_; }
    [[nodiscard]] const ObstacleGeometry& geometry() const noexcept { return geometry_; }
    [[nodiscard]] int horizon() const noexcept { return offset_fsr_.tau(); }
    [[nodiscard]] const FsrResult& offset_fsr() const noexcept { return offset_fsr_; }
    [[nodiscard]] const OccupancyField& offset_occupancy(int k) const { return offset_occupancy_.at(static_cast<std::size_t>(k)); }

    /// Center PMF k steps after a measurement at `position`.
    [[nodiscard]] SparsePMF pmf(int k, const Eigen::VectorXd& position) const;

    /// superlevel(occupancy(pmf(k, position)), threshold) with boxes tagged by
    /// `obstacle`. Offset sets are cached per (k, threshold).
    [[nodiscard]] AvoidBoxSet avoid_set(int k, const Eigen::VectorXd& position, double threshold, int obstacle) const;

private:
    Lattice lattice_;
    ObstacleGeometry geometry_;
    FsrResult offset_fsr_;
    std::vector<OccupancyField> offset_occupancy_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<int, double>, AvoidBoxSet> cache_;
};

/// Avoid sets for lookahead steps 1..horizon: per obstacle at threshold alpha / N,
/// merged per step. Equals avoid_sets_multi on the translated PMFs.
[[nodiscard]] std::vector<AvoidBoxSet> predict_avoid_sets(const std::vector<std::shared_ptr<const ObstaclePredictor>>& predictors,
                                                          const std::vector<Eigen::VectorXd>& measured_positions,
                                                          double alpha, int horizon);

struct PlannerConfig {
    RobotModel robot;
    Eigen::MatrixXd cost_state;
    Eigen::MatrixXd cost_input;
    int horizon = 5;
    double margin = 1e-6;
    std::optional<double> big_m;
    BoxRegion workspace;
    ObjectiveMode objective = ObjectiveMode::Quadratic;
    SolveOptions solve;
};

struct RecedingHorizonResult {
    /// First control of the plan; empty when no plan was found.
    std::optional<Eigen::VectorXd> control;
    PlanProblem problem;
    PlanSolution plan;
    std::vector<AvoidBoxSet> avoid;
    /// Avoid boxes that entered the mixed-integer problem.
    std::size_t active_boxes = 0;
    std::size_t binaries = 0;
};

[[nodiscard]] RecedingHorizonResult receding_horizon_step(const Eigen::VectorXd& robot_state,
                                                          const std::vector<Eigen::VectorXd>& measured_positions,
                                                          const std::vector<std::shared_ptr<const ObstaclePredictor>>& predictors,
                                                          double alpha, const PlannerConfig& config,
                                                          const Eigen::VectorXd& goal);

}  // namespace fsreach
