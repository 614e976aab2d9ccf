#include "fsreach/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

#include "fsreach/error.hpp"

namespace fsreach {

namespace {

constexpr double kGeometryTolerance = 1e-9;

IndexBox kernel_bounds(const std::vector<LatticePoint>& kernel) {
    IndexBox box{kernel.front(), kernel.front()};
    for (const auto& k : kernel) {
        for (std::size_t i = 0; i < k.size(); ++i) {
            box.lower[i] = std::min(box.lower[i], k[i]);
            box.upper[i] = std::max(box.upper[i], k[i]);
        }
    }
    return box;
}

// Merges boxes that agree on every axis except `axis` and touch along it.
std::vector<IndexBox> merge_along(std::vector<IndexBox> boxes, std::size_t axis) {
    auto key_less = [axis](const IndexBox& a, const IndexBox& b) {
        for (std::size_t i = 0; i < a.lower.size(); ++i) {
            if (i == axis) continue;
            if (a.lower[i] != b.lower[i]) return a.lower[i] < b.lower[i];
            if (a.upper[i] != b.upper[i]) return a.upper[i] < b.upper[i];
        }
        return a.lower[axis] < b.lower[axis];
    };
    auto same_span = [axis](const IndexBox& a, const IndexBox& b) {
        for (std::size_t i = 0; i < a.lower.size(); ++i) {
            if (i == axis) continue;
            if (a.lower[i] != b.lower[i] || a.upper[i] != b.upper[i]) return false;
        }
        return true;
    };
    std::sort(boxes.begin(), boxes.end(), key_less);
    std::vector<IndexBox> out;
    for (const auto& b : boxes) {
        if (!out.empty() && same_span(out.back(), b) && out.back().upper[axis] + 1 == b.lower[axis]) {
            out.back().upper[axis] = b.upper[axis];
        } else {
            out.push_back(b);
        }
    }
    return out;
}

AvoidBox make_box(const Lattice& lattice, const IndexBox& cells, int obstacle) {
    return AvoidBox{cells, lattice.cell_extent(cells), obstacle};
}

}  // namespace

// --- ObstacleGeometry --------------------------------------------------------

ObstacleGeometry::ObstacleGeometry(CenteredBox box) : shape_(std::move(box)) {
    const auto& hw = std::get<CenteredBox>(shape_).half_widths;
    if (hw.size() == 0 || !hw.allFinite() || (hw.array() <= 0.0).any()) {
        throw Error(ErrorCode::InvalidGeometry, "box half widths must be positive");
    }
}

ObstacleGeometry::ObstacleGeometry(IndicatorKernel kernel) : shape_(std::move(kernel)) {
    auto& cells = std::get<IndicatorKernel>(shape_).cells;
    if (cells.empty()) throw Error(ErrorCode::InvalidGeometry, "indicator kernel is empty");
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
}

std::vector<LatticePoint> ObstacleGeometry::rasterize(const Lattice& lattice) const {
    if (const auto* kernel = std::get_if<IndicatorKernel>(&shape_)) {
        if (kernel->cells.front().size() != lattice.dimension()) {
            throw Error(ErrorCode::InvalidGeometry, "kernel dimension does not match the lattice");
        }
        return kernel->cells;
    }
    const auto& hw = std::get<CenteredBox>(shape_).half_widths;
    if (static_cast<std::size_t>(hw.size()) != lattice.dimension()) {
        throw Error(ErrorCode::InvalidGeometry, "box dimension does not match the lattice");
    }
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(hw.size());
    const IndexBox range = Lattice(zero, lattice.resolution()).cells_within(BoxRegion(-hw, hw));
    std::vector<LatticePoint> cells;
    cells.reserve(range.cell_count());
    LatticePoint cursor = range.lower;
    for (std::size_t k = 0; k < range.cell_count(); ++k) {
        cells.push_back(cursor);
        for (std::size_t i = cursor.size(); i-- > 0;) {
            if (++cursor[i] <= range.upper[i]) break;
            cursor[i] = range.lower[i];
        }
    }
    if (cells.empty()) throw Error(ErrorCode::InvalidGeometry, "body covers no lattice cell");
    return cells;
}

bool ObstacleGeometry::covers(const Eigen::VectorXd& offset, const Lattice& lattice) const {
    if (const auto* box = std::get_if<CenteredBox>(&shape_)) {
        return (offset.cwiseAbs().array() <= box->half_widths.array() + kGeometryTolerance).all();
    }
    const auto& cells = std::get<IndicatorKernel>(shape_).cells;
    const Lattice rel(Eigen::VectorXd::Zero(offset.size()), lattice.resolution());
    return std::binary_search(cells.begin(), cells.end(), rel.snap(offset));
}

// --- OccupancyField / AvoidBoxSet --------------------------------------------

OccupancyField::OccupancyField(Lattice lattice, std::vector<LatticePoint> points, std::vector<double> values,
                               int time_index)
    : SparseGrid(std::move(lattice), std::move(points), std::move(values)), time_index_(time_index) {}

bool AvoidBoxSet::covers_cell(const LatticePoint& p) const {
    return std::any_of(boxes.begin(), boxes.end(), [&](const AvoidBox& b) { return b.cells.contains(p); });
}

bool AvoidBoxSet::covers_point(const Eigen::VectorXd& y) const {
    return std::any_of(boxes.begin(), boxes.end(), [&](const AvoidBox& b) { return b.region.contains(y); });
}

AvoidBoxSet AvoidBoxSet::translated(const LatticePoint& offset) const {
    AvoidBoxSet out{time_index, alpha, lattice, {}};
    out.boxes.reserve(boxes.size());
    for (const auto& b : boxes) out.boxes.push_back(make_box(lattice, b.cells.translated(offset), b.obstacle));
    return out;
}

void AvoidBoxSet::append(const AvoidBoxSet& other) {
    boxes.insert(boxes.end(), other.boxes.begin(), other.boxes.end());
}

// --- operations --------------------------------------------------------------

OccupancyField occupancy(const SparsePMF& center_pmf, const ObstacleGeometry& geometry, int time_index) {
    const std::vector<LatticePoint> kernel = geometry.rasterize(center_pmf.lattice());
    const IndexBox pb = center_pmf.bounding_box();
    const IndexBox kb = kernel_bounds(kernel);
    GridAccumulator acc({pb.lower + kb.lower, pb.upper + kb.upper}, center_pmf.size() * kernel.size());
    for (std::size_t i = 0; i < center_pmf.size(); ++i) {
        const double m = center_pmf.mass(i);
        for (const auto& k : kernel) acc.add(center_pmf.point(i) + k, m);
    }
    auto [points, values] = std::move(acc).finish();
    for (double& v : values) v = std::min(v, 1.0);
    return OccupancyField(center_pmf.lattice(), std::move(points), std::move(values), time_index);
}

std::vector<LatticePoint> superlevel_cells(const OccupancyField& field, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidInput, "alpha must lie in [0, 1]");
    std::vector<LatticePoint> cells;
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (field.value(i) > 0.0 && field.value(i) >= alpha - kThresholdSlack) cells.push_back(field.point(i));
    }
    return cells;
}

std::vector<IndexBox> decompose_boxes(const std::vector<LatticePoint>& sorted_cells) {
    std::vector<IndexBox> boxes;
    if (sorted_cells.empty()) return boxes;
    const std::size_t n = sorted_cells.front().size();
    const std::size_t last = n - 1;
    // Maximal runs along the fastest-varying axis.
    for (const auto& c : sorted_cells) {
        if (!boxes.empty()) {
            IndexBox& b = boxes.back();
            bool extends = b.upper[last] + 1 == c[last];
            for (std::size_t i = 0; i < last && extends; ++i) extends = b.lower[i] == c[i];
            if (extends) {
                b.upper[last] = c[last];
                continue;
            }
        }
        boxes.push_back({c, c});
    }
    for (std::size_t axis = last; axis-- > 0;) boxes = merge_along(std::move(boxes), axis);
    std::sort(boxes.begin(), boxes.end(), [](const IndexBox& a, const IndexBox& b) {
        return a.lower != b.lower ? a.lower < b.lower : a.upper < b.upper;
    });
    return boxes;
}

AvoidBoxSet superlevel(const OccupancyField& field, double alpha) {
    AvoidBoxSet out{field.time_index(), alpha, field.lattice(), {}};
    for (const auto& cells : decompose_boxes(superlevel_cells(field, alpha))) {
        out.boxes.push_back(make_box(field.lattice(), cells, 0));
    }
    return out;
}

AvoidBoxSet avoid_sets_multi(const std::vector<SparsePMF>& per_obstacle_pmfs, const ObstacleGeometry& geometry,
                             double alpha, int time_index) {
    if (per_obstacle_pmfs.empty()) throw Error(ErrorCode::InvalidInput, "need at least one obstacle");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidInput, "alpha must lie in [0, 1]");
    const Lattice& lattice = per_obstacle_pmfs.front().lattice();
    for (const auto& pmf : per_obstacle_pmfs) {
        if (!(pmf.lattice() == lattice)) throw Error(ErrorCode::LatticeMismatch, "obstacle PMFs must share a lattice");
    }
    const double threshold = alpha / static_cast<double>(per_obstacle_pmfs.size());
    AvoidBoxSet out{time_index, alpha, lattice, {}};
    if (threshold > 1.0) {
        spdlog::warn("per-obstacle threshold {} exceeds 1; avoid set is empty", threshold);
        return out;
    }
    for (std::size_t i = 0; i < per_obstacle_pmfs.size(); ++i) {
        AvoidBoxSet single = superlevel(occupancy(per_obstacle_pmfs[i], geometry, time_index), threshold);
        for (auto& b : single.boxes) {
            b.obstacle = static_cast<int>(i);
            out.boxes.push_back(std::move(b));
        }
    }
    return out;
}

OccupancyField joint_occupancy_bruteforce(const std::vector<SparsePMF>& per_obstacle_pmfs,
                                          const ObstacleGeometry& geometry, int time_index) {
    if (per_obstacle_pmfs.empty()) throw Error(ErrorCode::InvalidInput, "need at least one obstacle");
    const Lattice& lattice = per_obstacle_pmfs.front().lattice();
    std::size_t configurations = 1;
    for (const auto& pmf : per_obstacle_pmfs) {
        if (!(pmf.lattice() == lattice)) throw Error(ErrorCode::LatticeMismatch, "obstacle PMFs must share a lattice");
        configurations *= pmf.size();
        if (configurations > kMaxJointConfigurations) {
            throw Error(ErrorCode::TooLarge, "joint configuration space exceeds " +
                                                 std::to_string(kMaxJointConfigurations) + " entries");
        }
    }
    const std::vector<LatticePoint> kernel = geometry.rasterize(lattice);
    const IndexBox kb = kernel_bounds(kernel);
    IndexBox bounds = per_obstacle_pmfs.front().bounding_box();
    for (const auto& pmf : per_obstacle_pmfs) {
        const IndexBox b = pmf.bounding_box();
        for (std::size_t i = 0; i < b.lower.size(); ++i) {
            bounds.lower[i] = std::min(bounds.lower[i], b.lower[i]);
            bounds.upper[i] = std::max(bounds.upper[i], b.upper[i]);
        }
    }
    const std::size_t count = per_obstacle_pmfs.size();
    GridAccumulator acc({bounds.lower + kb.lower, bounds.upper + kb.upper},
                        configurations * kernel.size() * count);
    std::vector<std::size_t> choice(count, 0);
    std::vector<LatticePoint> covered;
    while (true) {
        double prob = 1.0;
        covered.clear();
        for (std::size_t o = 0; o < count; ++o) {
            const SparsePMF& pmf = per_obstacle_pmfs[o];
            prob *= pmf.mass(choice[o]);
            for (const auto& k : kernel) covered.push_back(pmf.point(choice[o]) + k);
        }
        std::sort(covered.begin(), covered.end());
        covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
        for (const auto& c : covered) acc.add(c, prob);

        std::size_t o = count;
        while (o-- > 0) {
            if (++choice[o] < per_obstacle_pmfs[o].size()) break;
            choice[o] = 0;
        }
        if (o == static_cast<std::size_t>(-1)) break;
    }
    auto [points, values] = std::move(acc).finish();
    for (double& v : values) v = std::min(v, 1.0);
    return OccupancyField(lattice, std::move(points), std::move(values), time_index);
}

}  // namespace fsreach
