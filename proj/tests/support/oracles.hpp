#pragma once

// Reference implementations used only to check the library. Each one is the
// most direct (and slowest) route to the same quantity.

#include <map>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "fsreach/occupancy.hpp"
#include "fsreach/planner.hpp"
#include "fsreach/qp.hpp"
#include "fsreach/sparse_pmf.hpp"

namespace oracle {

using Cells = std::map<std::vector<std::int64_t>, double>;

std::vector<std::int64_t> key(const fsreach::LatticePoint& p);
Cells cells(const fsreach::SparseGrid& g);

/// Double loop over both supports into an ordered map.
Cells convolve(const fsreach::SparsePMF& a, const fsreach::SparsePMF& b);

/// Largest |a - b| over the union of the keys.
double max_abs_diff(const Cells& a, const Cells& b);

/// Integer cells of the closed interval box [lo, hi] (continuous) on a zero-origin lattice.
std::vector<std::vector<std::int64_t>> interval_cells(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double resolution);

/// phi(y) = sum_z psi(z) 1{|coord(y) - coord(z)|_i <= hw_i} evaluated on every
/// cell of the bounding box, with a 1e-9 tolerance on the continuous test.
Cells occupancy_direct(const fsreach::SparsePMF& pmf, const Eigen::VectorXd& half_widths);

/// Same double sum for a kernel given as offsets.
Cells occupancy_direct(const fsreach::SparsePMF& pmf, const std::vector<fsreach::LatticePoint>& kernel);

/// P(some body covers y) for independent obstacles with a shared box body, by
/// walking every joint configuration of the two centers and marking the union.
Cells joint_occupancy_enumerated(const fsreach::SparsePMF& a, const fsreach::SparsePMF& b, const Eigen::VectorXd& half_widths);

/// min 1/2 z'Hz + c'z s.t. Az <= b by enumerating active sets (m <= 12).
struct KktResult {
    bool feasible = false;
    Eigen::VectorXd z;
    double objective = 0.0;
};
KktResult qp_by_enumeration(const fsreach::QpProblem& p, double tol = 1e-9);

/// Mixed-integer optimum by trying every binary assignment with at least one
/// zero per box; each assignment is a QP assembled here from scratch.
struct EnumerationResult {
    bool feasible = false;
    double objective = 0.0;
    std::vector<Eigen::VectorXd> controls;
    std::size_t assignments = 0;
};
EnumerationResult miqp_by_enumeration(const fsreach::PlanProblem& p);

/// Sample uniformly in [lo, hi].
Eigen::VectorXd uniform_vector(std::mt19937_64& rng, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

}  // namespace oracle
