#pragma once

#include <string>

#include "json.hpp"

#include "fsreach/fsr.hpp"
#include "fsreach/occupancy.hpp"
#include "fsreach/planner.hpp"
#include "fsreach/simulation.hpp"

namespace fsreach {

/// Shortest decimal text that round-trips to the same double.
[[nodiscard]] std::string format_number(double value);

/// {"resolution", "origin", "entries": [{"idx", "p"}]}, entries in index order.
[[nodiscard]] nlohmann::json to_json(const SparsePMF& pmf);
[[nodiscard]] SparsePMF pmf_from_json(const nlohmann::json& doc);

[[nodiscard]] nlohmann::json to_json(const OccupancyField& field);
/// {"t", "alpha", "boxes": [{"lo", "hi", "obstacle", "cells_lo", "cells_hi"}]}
[[nodiscard]] nlohmann::json to_json(const AvoidBoxSet& set);

/// Per-step PMFs without timings (timings go through fsr_timing_csv).
[[nodiscard]] nlohmann::json to_json(const FsrResult& result);
/// Columns idx_1..idx_n, mass, t.
[[nodiscard]] std::string fsr_csv(const FsrResult& result);
/// Columns t, cells, then lo_i, hi_i per axis: continuous extent of the support's cell centers.
[[nodiscard]] std::string support_bounds_csv(const FsrResult& result);
/// Columns t, <label>_s.
[[nodiscard]] std::string fsr_timing_csv(const FsrResult& result, const std::string& label);

[[nodiscard]] nlohmann::json to_json(const PlanProblem& problem);
/// Solve time is left out unless `include_timing` is set.
[[nodiscard]] nlohmann::json to_json(const PlanSolution& solution, bool include_timing = false);
[[nodiscard]] std::string to_string(PlanStatus status);
[[nodiscard]] std::string to_string(StepStatus status);

[[nodiscard]] nlohmann::json to_json(const SimTrace& trace);
/// Columns t, x_1..x_n, u_1..u_m, status.
[[nodiscard]] std::string trace_csv(const SimTrace& trace);
/// Columns t, obstacle, y_1..y_n.
[[nodiscard]] std::string obstacles_csv(const SimTrace& trace);
/// Columns t, solve_time_s, nodes, active_boxes.
[[nodiscard]] std::string trace_timing_csv(const SimTrace& trace);
/// Columns t, samples, hits, probability, sigma, ci_low, ci_high.
[[nodiscard]] std::string collision_csv(const std::vector<CollisionEstimate>& estimates, int first_t = 1);

}  // namespace fsreach
