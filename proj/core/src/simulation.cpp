#include "fsreach/simulation.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "fsreach/error.hpp"

namespace fsreach {

std::chrono::duration<double> SimTrace::max_solve_time() const {
    std::chrono::duration<double> m{0};
    for (const SimStep& s : steps) m = std::max(m, s.solve_time);
    return m;
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32U)};
    return std::mt19937_64(seq);
}

bool in_collision(const Scenario& scenario, const Eigen::VectorXd& point,
                  const std::vector<Eigen::VectorXd>& obstacle_positions) {
    const Lattice lattice = scenario.lattice();
    for (std::size_t i = 0; i < obstacle_positions.size(); ++i) {
        if (scenario.obstacles[i].geometry.covers(point - obstacle_positions[i], lattice)) return true;
    }
    return false;
}

std::vector<std::shared_ptr<const ObstaclePredictor>> make_predictors(const Scenario& scenario, int horizon) {
    const Lattice lattice = scenario.lattice();
    std::vector<std::shared_ptr<const ObstaclePredictor>> out;
    for (const ObstacleSpec& o : scenario.obstacles) {
        out.push_back(std::make_shared<const ObstaclePredictor>(lattice, discretize(o.disturbance, lattice), o.geometry, horizon));
    }
    return out;
}

SimTrace run(const Scenario& scenario) {
    const auto predictors = make_predictors(scenario, scenario.horizon);
    const PlannerConfig config = scenario.planner_config();
    std::vector<DisturbanceSampler> samplers;
    for (const ObstacleSpec& o : scenario.obstacles) samplers.emplace_back(o.disturbance);
    std::mt19937_64 rng = make_stream(scenario.seed, 0);

    SimTrace trace;
    Eigen::VectorXd x = scenario.robot_initial;
    std::vector<Eigen::VectorXd> obstacles;
    for (const ObstacleSpec& o : scenario.obstacles) obstacles.push_back(o.initial_position);

    for (int t = 0;; ++t) {
        SimStep step;
        step.t = t;
        step.robot = x;
        step.obstacles = obstacles;
        if (in_collision(scenario, x, obstacles)) {
            step.status = StepStatus::Collision;
            trace.collision_occurred = true;
            trace.collision_at_step = t;
            trace.steps.push_back(std::move(step));
            break;
        }
        if ((x - scenario.goal).cwiseAbs().maxCoeff() <= scenario.goal_tolerance + 1e-12) {
            step.status = StepStatus::Goal;
            trace.goal_reached = true;
            trace.steps.push_back(std::move(step));
            break;
        }
        if (t == scenario.mission_length) {
            step.status = StepStatus::Final;
            trace.steps.push_back(std::move(step));
            break;
        }
        const RecedingHorizonResult r = receding_horizon_step(x, obstacles, predictors, scenario.alpha, config, scenario.goal);
        step.solve_time = r.plan.solve_time;
        step.active_boxes = r.active_boxes;
        step.nodes = r.plan.nodes;
        if (!r.avoid.empty()) step.avoid_next = r.avoid.front();
        if (!r.control) {
            step.status = StepStatus::Infeasible;
            trace.infeasible_at_step = t;
            spdlog::info("simulation: planner infeasible at step {}", t);
            trace.steps.push_back(std::move(step));
            break;
        }
        step.status = r.plan.status == PlanStatus::Timeout ? StepStatus::Timeout : StepStatus::Planned;
        step.control = *r.control;
        step.objective = r.plan.objective;
        x = x + scenario.input_gain * *r.control;
        for (std::size_t i = 0; i < obstacles.size(); ++i) obstacles[i] = obstacles[i] + samplers[i](rng);
        trace.steps.push_back(std::move(step));
    }
    return trace;
}

}  // namespace fsreach
