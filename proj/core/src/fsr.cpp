#include "fsreach/fsr.hpp"

#include <algorithm>
#include <cmath>

#include "fsreach/error.hpp"

namespace fsreach {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kIntegralTolerance = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool near_integer(double v) { return std::fabs(v - std::round(v)) <= kIntegralTolerance; }

void require_compatible(const SparsePMF& state, const SparsePMF& disturbance) {
    if (!state.lattice().compatible(disturbance.lattice())) {
        throw Error(ErrorCode::LatticeMismatch, "state and disturbance lattices differ in dimension or resolution");
    }
}

// Union of the bounding box of every image point shifted by the disturbance box.
IndexBox image_bounds(const std::vector<LatticePoint>& images, const IndexBox& disturbance_box) {
    IndexBox box{images.front(), images.front()};
    for (const auto& p : images) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            box.lower[i] = std::min(box.lower[i], p[i]);
            box.upper[i] = std::max(box.upper[i], p[i]);
        }
    }
    return {box.lower + disturbance_box.lower, box.upper + disturbance_box.upper};
}

struct StepOutput {
    SparsePMF pmf;
    double max_snap_error = 0.0;
};

StepOutput step_impl(const SparsePMF& current, const ImageMap& image, const SparsePMF& disturbance,
                     AccumulationMode mode) {
    std::vector<LatticePoint> images;
    images.reserve(current.size());
    double snap_error = 0.0;
    for (const auto& p : current.support()) {
        images.push_back(image(p));
        if (!image.exact()) snap_error = std::max(snap_error, image.snap_error(p));
    }
    GridAccumulator acc(image_bounds(images, disturbance.bounding_box()), current.size() * disturbance.size(), mode);
    for (std::size_t i = 0; i < current.size(); ++i) {
        const double m = current.mass(i);
        for (std::size_t j = 0; j < disturbance.size(); ++j) {
            acc.add(images[i] + disturbance.point(j), m * disturbance.mass(j));
        }
    }
    auto [points, values] = std::move(acc).finish();
    return {SparsePMF::from_sorted(current.lattice(), std::move(points), std::move(values)), snap_error};
}

}  // namespace

// --- DynamicsMap -------------------------------------------------------------

DynamicsMap DynamicsMap::linear(Eigen::MatrixXd A) {
    if (A.rows() != A.cols() || A.size() == 0) throw Error(ErrorCode::InvalidInput, "A must be square");
    if (!A.allFinite()) throw Error(ErrorCode::InvalidInput, "A must be finite");
    return DynamicsMap(LinearDynamics{std::move(A)});
}

DynamicsMap DynamicsMap::nonlinear(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f) {
    if (!f) throw Error(ErrorCode::InvalidInput, "nonlinear dynamics needs a callable");
    return DynamicsMap(NonlinearDynamics{std::move(f)});
}

DynamicsMap DynamicsMap::identity(std::size_t dimension) {
    const auto n = static_cast<Eigen::Index>(dimension);
    return linear(Eigen::MatrixXd::Identity(n, n));
}

Eigen::VectorXd DynamicsMap::operator()(const Eigen::VectorXd& x) const {
    return std::visit(overloaded{
                          [&](const LinearDynamics& l) -> Eigen::VectorXd { return l.A * x; },
                          [&](const NonlinearDynamics& n) -> Eigen::VectorXd { return n.f(x); },
                      },
                      map_);
}

// --- ImageMap ----------------------------------------------------------------

ImageMap::ImageMap(const DynamicsMap& dynamics, const Lattice& state, const Eigen::VectorXd& disturbance_origin)
    : dynamics_(dynamics), lattice_(state), disturbance_origin_(disturbance_origin) {
    const auto* lin = std::get_if<LinearDynamics>(&dynamics_.variant());
    if (lin == nullptr) return;
    const auto n = static_cast<Eigen::Index>(lattice_.dimension());
    if (lin->A.rows() != n) throw Error(ErrorCode::InvalidInput, "dynamics dimension does not match the lattice");
    const Eigen::VectorXd& r = lattice_.resolution();
    const Eigen::VectorXd& o = lattice_.origin();
    // f(o + R p) + o_v = o + R (M p + c) with M = R^-1 A R and c = R^-1 (A o + o_v - o).
    const Eigen::MatrixXd scaled = r.cwiseInverse().asDiagonal() * lin->A * r.asDiagonal();
    const Eigen::VectorXd offset = (lin->A * o + disturbance_origin_ - o).cwiseQuotient(r);
    if (!scaled.unaryExpr([](double v) { return near_integer(v) ? 0.0 : 1.0; }).isZero()) return;
    if (!offset.unaryExpr([](double v) { return near_integer(v) ? 0.0 : 1.0; }).isZero()) return;
    index_matrix_ = scaled.unaryExpr([](double v) { return std::round(v); }).cast<Index>();
    index_offset_ = LatticePoint(lattice_.dimension());
    for (Eigen::Index i = 0; i < n; ++i) index_offset_[static_cast<std::size_t>(i)] = static_cast<Index>(std::round(offset[i]));
    exact_ = true;
}

LatticePoint ImageMap::operator()(const LatticePoint& p) const {
    if (exact_) {
        LatticePoint out = index_offset_;
        const auto n = index_matrix_.rows();
        for (Eigen::Index i = 0; i < n; ++i) {
            Index acc = 0;
            for (Eigen::Index j = 0; j < n; ++j) acc += index_matrix_(i, j) * p[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] += acc;
        }
        return out;
    }
    return lattice_.snap(dynamics_(lattice_.coord(p)) + disturbance_origin_);
}

double ImageMap::snap_error(const LatticePoint& p) const {
    if (exact_) return 0.0;
    const Eigen::VectorXd y = dynamics_(lattice_.coord(p)) + disturbance_origin_;
    return (lattice_.coord(lattice_.snap(y)) - y).cwiseAbs().maxCoeff();
}

// --- FsrResult ---------------------------------------------------------------

double FsrResult::retained_mass() const {
    double m = 1.0;
    for (const auto& s : steps) m *= s.retained_mass;
    return m;
}

std::chrono::duration<double> FsrResult::total_runtime() const {
    std::chrono::duration<double> total{0};
    for (const auto& s : steps) total += s.runtime;
    return total;
}

// --- engine ------------------------------------------------------------------

SparsePMF fsr_step(const SparsePMF& current, const DynamicsMap& dynamics, const SparsePMF& disturbance,
                   const FsrOptions& options) {
    require_compatible(current, disturbance);
    const ImageMap image(dynamics, current.lattice(), disturbance.lattice().origin());
    SparsePMF next = step_impl(current, image, disturbance, options.mode).pmf;
    if (options.prune_threshold > 0.0) return next.pruned(options.prune_threshold).pmf;
    return next;
}

FsrResult fsr_compute(const SparsePMF& initial, const DynamicsMap& dynamics, const SparsePMF& disturbance, int tau,
                      const FsrOptions& options) {
    if (tau < 0) throw Error(ErrorCode::InvalidInput, "tau must be non-negative");
    require_compatible(initial, disturbance);
    const ImageMap image(dynamics, initial.lattice(), disturbance.lattice().origin());
    FsrResult result;
    result.steps.reserve(static_cast<std::size_t>(tau) + 1);
    result.steps.push_back(FsrStep{initial});
    for (int t = 1; t <= tau; ++t) {
        const auto start = Clock::now();
        StepOutput out = step_impl(result.steps.back().pmf, image, disturbance, options.mode);
        FsrStep step{std::move(out.pmf)};
        step.max_snap_error = out.max_snap_error;
        if (options.prune_threshold > 0.0) {
            PruneResult pr = step.pmf.pruned(options.prune_threshold);
            step.pmf = std::move(pr.pmf);
            step.retained_mass = pr.retained_mass;
        }
        step.runtime = Clock::now() - start;
        result.steps.push_back(std::move(step));
    }
    return result;
}

FsrResult dp_baseline(const SparsePMF& initial, const DynamicsMap& dynamics, const SparsePMF& disturbance,
                      const BoxRegion& domain, int tau) {
    if (tau < 0) throw Error(ErrorCode::InvalidInput, "tau must be non-negative");
    require_compatible(initial, disturbance);
    const Lattice& lattice = initial.lattice();
    const IndexBox cells = lattice.cells_within(domain);
    const std::size_t volume = cells.cell_count();
    if (volume == 0) throw Error(ErrorCode::InvalidInput, "DP domain contains no lattice cell");
    const std::size_t n = lattice.dimension();
    std::vector<std::size_t> strides(n, 1);
    for (std::size_t i = n; i-- > 1;) {
        strides[i - 1] = strides[i] * static_cast<std::size_t>(cells.upper[i] - cells.lower[i] + 1);
    }
    auto flat = [&](const LatticePoint& p) {
        std::size_t f = 0;
        for (std::size_t i = 0; i < n; ++i) f += static_cast<std::size_t>(p[i] - cells.lower[i]) * strides[i];
        return f;
    };

    std::vector<double> current(volume, 0.0);
    double outside = 0.0;
    for (std::size_t i = 0; i < initial.size(); ++i) {
        if (cells.contains(initial.point(i))) {
            current[flat(initial.point(i))] += initial.mass(i);
        } else {
            outside += initial.mass(i);
        }
    }
    if (outside > 0.0) throw DomainOverflowError(outside, 0);

    const ImageMap image(dynamics, lattice, disturbance.lattice().origin());
    FsrResult result;
    result.steps.push_back(FsrStep{initial});
    std::vector<double> next(volume, 0.0);
    for (int t = 1; t <= tau; ++t) {
        const auto start = Clock::now();
        std::fill(next.begin(), next.end(), 0.0);
        double escaped = 0.0;
        LatticePoint cursor = cells.lower;
        for (std::size_t f = 0; f < volume; ++f) {
            const double m = current[f];
            const LatticePoint img = image(cursor);
            for (std::size_t j = 0; j < disturbance.size(); ++j) {
                const LatticePoint target = img + disturbance.point(j);
                const double contribution = m * disturbance.mass(j);
                if (cells.contains(target)) {
                    next[flat(target)] += contribution;
                } else {
                    escaped += contribution;
                }
            }
            for (std::size_t i = n; i-- > 0;) {
                if (++cursor[i] <= cells.upper[i]) break;
                cursor[i] = cells.lower[i];
            }
        }
        if (escaped > 0.0) throw DomainOverflowError(escaped, t);
        current.swap(next);

        std::vector<LatticePoint> points;
        std::vector<double> values;
        cursor = cells.lower;
        for (std::size_t f = 0; f < volume; ++f) {
            if (current[f] > 0.0) {
                points.push_back(cursor);
                values.push_back(current[f]);
            }
            for (std::size_t i = n; i-- > 0;) {
                if (++cursor[i] <= cells.upper[i]) break;
                cursor[i] = cells.lower[i];
            }
        }
        FsrStep step{SparsePMF::from_sorted(lattice, std::move(points), std::move(values))};
        step.runtime = Clock::now() - start;
        result.steps.push_back(std::move(step));
    }
    return result;
}

}  // namespace fsreach
