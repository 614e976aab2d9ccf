#include "fsreach/predictor.hpp"

#include <spdlog/spdlog.h>

#include "fsreach/error.hpp"

namespace fsreach {

ObstaclePredictor::ObstaclePredictor(const Lattice& lattice, const SparsePMF& displacement, ObstacleGeometry geometry,
                                     int horizon, const FsrOptions& options)
    : lattice_(lattice), geometry_(std::move(geometry)) {
    if (!displacement.lattice().compatible(lattice)) throw Error(ErrorCode::LatticeMismatch, "displacement PMF lattice differs from the predictor lattice");
    if (horizon < 0) throw Error(ErrorCode::InvalidInput, "predictor horizon must be nonnegative");
    const SparsePMF start = SparsePMF::delta(lattice_, LatticePoint(lattice_.dimension()));
    offset_fsr_ = fsr_compute(start, DynamicsMap::identity(lattice_.dimension()), displacement, horizon, options);
    for (int k = 0; k <= horizon; ++k) offset_occupancy_.push_back(occupancy(offset_fsr_.pmf(k), geometry_, k));
}

SparsePMF ObstaclePredictor::pmf(int k, const Eigen::VectorXd& position) const {
    return offset_fsr_.pmf(k).translated(lattice_.snap(position));
}

AvoidBoxSet ObstaclePredictor::avoid_set(int k, const Eigen::VectorXd& position, double threshold, int obstacle) const {
    const auto key = std::make_pair(k, threshold);
    AvoidBoxSet offset;
    {
        const std::lock_guard lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, superlevel(offset_occupancy(k), threshold)).first;
        offset = it->second;
    }
    for (AvoidBox& b : offset.boxes) b.obstacle = obstacle;
    return offset.translated(lattice_.snap(position));
}

std::vector<AvoidBoxSet> predict_avoid_sets(const std::vector<std::shared_ptr<const ObstaclePredictor>>& predictors,
                                            const std::vector<Eigen::VectorXd>& measured_positions, double alpha,
                                            int horizon) {
    if (predictors.size() != measured_positions.size()) throw Error(ErrorCode::InvalidInput, "one measured position per predictor is required");
    const double threshold = predictors.empty() ? alpha : alpha / static_cast<double>(predictors.size());
    if (threshold > 1.0) spdlog::warn("per-obstacle threshold {} exceeds 1; avoid sets are empty", threshold);
    std::vector<AvoidBoxSet> out;
    for (int k = 1; k <= horizon; ++k) {
        AvoidBoxSet merged;
        merged.time_index = k;
        merged.alpha = alpha;
        for (std::size_t i = 0; i < predictors.size(); ++i) {
            if (predictors[i]->horizon() < horizon) throw Error(ErrorCode::InvalidInput, "predictor horizon is shorter than the planning horizon");
            const AvoidBoxSet s = predictors[i]->avoid_set(k, measured_positions[i], threshold, static_cast<int>(i));
            if (i == 0) merged.lattice = s.lattice;
            merged.append(s);
        }
        out.push_back(std::move(merged));
    }
    return out;
}

RecedingHorizonResult receding_horizon_step(const Eigen::VectorXd& robot_state,
                                            const std::vector<Eigen::VectorXd>& measured_positions,
                                            const std::vector<std::shared_ptr<const ObstaclePredictor>>& predictors,
                                            double alpha, const PlannerConfig& config, const Eigen::VectorXd& goal) {
    RecedingHorizonResult out;
    out.avoid = predict_avoid_sets(predictors, measured_positions, alpha, config.horizon);
    PlanInputs in;
    in.robot = config.robot;
    in.initial_state = robot_state;
    in.goal = goal;
    in.horizon = config.horizon;
    in.avoid = out.avoid;
    in.cost_state = config.cost_state;
    in.cost_input = config.cost_input;
    in.big_m = config.big_m;
    in.margin = config.margin;
    in.workspace = config.workspace;
    in.objective = config.objective;
    out.problem = build(in);
    out.active_boxes = out.problem.constraints.size();
    out.binaries = out.problem.binary_count();
    out.plan = solve(out.problem, config.solve);
    if (out.plan.has_plan()) out.control = out.plan.controls.front();
    return out;
}

}  // namespace fsreach
