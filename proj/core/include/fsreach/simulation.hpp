#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "fsreach/predictor.hpp"
#include "fsreach/scenario.hpp"

namespace fsreach {

enum class StepStatus { Planned, Timeout, Infeasible, Goal, Collision, Final };

struct SimStep {
    int t = 0;
    Eigen::VectorXd robot;
    /// Control applied at t; empty on terminal records.
    std::optional<Eigen::VectorXd> control;
    std::vector<Eigen::VectorXd> obstacles;
    StepStatus status = StepStatus::Planned;
    std::chrono::duration<double> solve_time{0};
    std::size_t active_boxes = 0;
    std::size_t nodes = 0;
    /// Plan objective, when planned.
    double objective = 0.0;
    /// Avoid set the plan used for step t + 1.
    AvoidBoxSet avoid_next;
};

struct SimTrace {
    std::vector<SimStep> steps;
    bool goal_reached = false;
    bool collision_occurred = false;
    std::optional<int> infeasible_at_step;
    std::optional<int> collision_at_step;

    [[nodiscard]] std::chrono::duration<double> max_solve_time() const;
};

/// Seeds are split with a seed_seq so obstacle draws never share a stream
/// with anything else (the robot itself is deterministic).
[[nodiscard]] std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

/// True if any obstacle body, centered at its continuous position, covers `point`.
[[nodiscard]] bool in_collision(const Scenario& scenario, const Eigen::VectorXd& point,
                                const std::vector<Eigen::VectorXd>& obstacle_positions);

/// One predictor per obstacle (disturbance discretized on the scenario lattice).
[[nodiscard]] std::vector<std::shared_ptr<const ObstaclePredictor>> make_predictors(const Scenario& scenario, int horizon);

/// Closed loop: plan, apply the first control, move the obstacles, repeat until
/// goal, collision, infeasibility or the mission length.
[[nodiscard]] SimTrace run(const Scenario& scenario);

struct CollisionEstimate {
    std::size_t samples = 0;
    std::size_t hits = 0;
    double probability = 0.0;
    /// Binomial standard error sqrt(p (1 - p) / n) at the estimate.
    double sigma = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// For k = 1..plan_states.size(): fraction of sampled obstacle futures, started
/// from `start_positions`, in which some body covers plan_states[k - 1] at step k.
/// Samples are split into fixed chunks with their own streams, so results do
/// not depend on the worker count (FSREACH_THREADS caps it).
[[nodiscard]] std::vector<CollisionEstimate> monte_carlo_collision(const Scenario& scenario,
                                                                   const std::vector<Eigen::VectorXd>& start_positions,
                                                                   const std::vector<Eigen::VectorXd>& plan_states,
                                                                   std::size_t n_samples, std::uint64_t seed);

/// One-step estimate at every realized robot state of a trace, from the
/// obstacle positions one step earlier. Entry t refers to trace.steps[t + 1].
[[nodiscard]] std::vector<CollisionEstimate> validate_trace(const Scenario& scenario, const SimTrace& trace,
                                                            std::size_t n_samples, std::uint64_t seed);

/// Worker count: FSREACH_THREADS if set and positive, else hardware concurrency.
[[nodiscard]] unsigned worker_count();

}  // namespace fsreach
