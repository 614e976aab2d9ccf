#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "fsreach/lattice.hpp"
#include "fsreach/sparse_pmf.hpp"

namespace fsreach {

/// Axis-aligned rigid body: points y with |y - center|_i <= half_widths_i.
struct CenteredBox {
    Eigen::VectorXd half_widths;
};

/// Rigid body given directly as lattice offsets from the center.
struct IndicatorKernel {
    std::vector<LatticePoint> cells;
};

class ObstacleGeometry {
public:
    ObstacleGeometry(CenteredBox box);          // NOLINT(google-explicit-constructor)
    ObstacleGeometry(IndicatorKernel kernel);   // NOLINT(google-explicit-constructor)

    static ObstacleGeometry box(Eigen::VectorXd half_widths) { return CenteredBox{std::move(half_widths)}; }

    /// Sorted lattice offsets k whose cell centers lie inside the body at the origin.
    [[nodiscard]] std::vector<LatticePoint> rasterize(const Lattice& lattice) const;

    /// Continuous membership of `offset` (point minus center). Kernels test the
    /// snapped cell.
    [[nodiscard]] bool covers(const Eigen::VectorXd& offset, const Lattice& lattice) const;

    [[nodiscard]] const std::variant<CenteredBox, IndicatorKernel>& variant() const noexcept { return shape_; }

private:
    std::variant<CenteredBox, IndicatorKernel> shape_;
};

/// phi(y) = sum_z psi(z) 1_{O(z)}(y) on lattice cells. Values in [0, 1].
class OccupancyField : public SparseGrid {
public:
    OccupancyField() = default;
    OccupancyField(Lattice lattice, std::vector<LatticePoint> points, std::vector<double> values, int time_index);

    [[nodiscard]] int time_index() const noexcept { return time_index_; }

private:
    int time_index_ = 0;
};

struct AvoidBox {
    IndexBox cells;
    /// Continuous extent of `cells` inflated by half a cell on every side.
    BoxRegion region;
    int obstacle = 0;
};

/// Union of boxes covering an alpha-superlevel cell set at one time step.
struct AvoidBoxSet {
    int time_index = 0;
    double alpha = 0.0;
    Lattice lattice;
    std::vector<AvoidBox> boxes;

    /// True if some box covers the cell.
    [[nodiscard]] bool covers_cell(const LatticePoint& p) const;
    [[nodiscard]] bool covers_point(const Eigen::VectorXd& y) const;
    /// Shift by a lattice vector. Regions are recomputed from cell indices, so
    /// the result is bit-identical to building the boxes at the shifted place.
    [[nodiscard]] AvoidBoxSet translated(const LatticePoint& offset) const;
    void append(const AvoidBoxSet& other);
};

/// Slack applied to alpha when thresholding: cells with phi >= alpha - kThresholdSlack
/// join the avoid set, so ties are always included.
inline constexpr double kThresholdSlack = 1e-12;

/// Occupancy as a sparse correlation of the center PMF with the body kernel.
[[nodiscard]] OccupancyField occupancy(const SparsePMF& center_pmf, const ObstacleGeometry& geometry,
                                       int time_index = 0);

/// Exact cell set {y : phi(y) >= alpha} (phi > 0 required), greedily merged
/// into maximal axis-aligned boxes.
[[nodiscard]] AvoidBoxSet superlevel(const OccupancyField& field, double alpha);

/// Cells of the superlevel set, sorted. Exposed for verification.
[[nodiscard]] std::vector<LatticePoint> superlevel_cells(const OccupancyField& field, double alpha);

/// Row-sweep decomposition of a sorted cell set into disjoint index boxes.
[[nodiscard]] std::vector<IndexBox> decompose_boxes(const std::vector<LatticePoint>& sorted_cells);

/// Union over obstacles of superlevel(occupancy(pmf_i), alpha / N): the
/// complement of the Boole-inequality safe set. Boxes carry their obstacle index.
[[nodiscard]] AvoidBoxSet avoid_sets_multi(const std::vector<SparsePMF>& per_obstacle_pmfs,
                                           const ObstacleGeometry& geometry, double alpha, int time_index = 0);

/// Largest product of support sizes the joint brute force accepts.
inline constexpr std::size_t kMaxJointConfigurations = 1'000'000;

/// Exact probability that at least one obstacle covers each cell, by
/// enumerating every joint configuration of independent obstacle centers.
[[nodiscard]] OccupancyField joint_occupancy_bruteforce(const std::vector<SparsePMF>& per_obstacle_pmfs,
                                                        const ObstacleGeometry& geometry, int time_index = 0);

}  // namespace fsreach
