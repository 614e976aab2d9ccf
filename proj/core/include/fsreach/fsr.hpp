#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "fsreach/lattice.hpp"
#include "fsreach/sparse_pmf.hpp"

namespace fsreach {

struct LinearDynamics {
    Eigen::MatrixXd A;
};

/// Deterministic map; the caller vouches for measurability.
struct NonlinearDynamics {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f;
};

/// Uncontrolled (or closed-loop) state map x -> f(x).
class DynamicsMap {
public:
    static DynamicsMap linear(Eigen::MatrixXd A);
    static DynamicsMap nonlinear(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f);
    static DynamicsMap identity(std::size_t dimension);

    [[nodiscard]] Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
    [[nodiscard]] const std::variant<LinearDynamics, NonlinearDynamics>& variant() const noexcept { return map_; }

private:
    explicit DynamicsMap(std::variant<LinearDynamics, NonlinearDynamics> map) : map_(std::move(map)) {}
    std::variant<LinearDynamics, NonlinearDynamics> map_;
};

/// Maps support points of the current PMF to lattice cells: index of
/// snap(f(x) + disturbance_origin). Linear maps whose scaled matrix and offset
/// are integral on the lattice use exact integer arithmetic (zero snap error).
class ImageMap {
public:
    ImageMap(const DynamicsMap& dynamics, const Lattice& state, const Eigen::VectorXd& disturbance_origin);

    [[nodiscard]] LatticePoint operator()(const LatticePoint& p) const;
    /// Distance between f(x) and its snapped cell center, max-norm.
    [[nodiscard]] double snap_error(const LatticePoint& p) const;
    [[nodiscard]] bool exact() const noexcept { return exact_; }

private:
    DynamicsMap dynamics_;
    Lattice lattice_;
    Eigen::VectorXd disturbance_origin_;
    bool exact_ = false;
    Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> index_matrix_;
    LatticePoint index_offset_;
};

struct FsrOptions {
    /// 0 keeps the recursion exact; otherwise entries below the threshold are
    /// dropped after every step and the PMF renormalized.
    double prune_threshold = 0.0;
    AccumulationMode mode = AccumulationMode::Auto;
};

struct FsrStep {
    SparsePMF pmf;
    std::chrono::duration<double> runtime{0};
    double max_snap_error = 0.0;
    /// Mass kept by pruning at this step before renormalization.
    double retained_mass = 1.0;

    /// The forward stochastic reach set: exactly the support of `pmf`.
    [[nodiscard]] const std::vector<LatticePoint>& support() const noexcept { return pmf.support(); }
};

/// Per-step PMFs for t = 0..tau; steps[t] holds time t.
struct FsrResult {
    std::vector<FsrStep> steps;

    [[nodiscard]] int tau() const noexcept { return static_cast<int>(steps.size()) - 1; }
    [[nodiscard]] const SparsePMF& pmf(int t) const { return steps.at(static_cast<std::size_t>(t)).pmf; }
    [[nodiscard]] const std::vector<LatticePoint>& support(int t) const { return pmf(t).support(); }
    /// Product of per-step retained masses; a lower bound on the true mass kept.
    [[nodiscard]] double retained_mass() const;
    [[nodiscard]] std::chrono::duration<double> total_runtime() const;
};

/// One step: mass current(x) * disturbance(z) accumulates at image(x) + z.
[[nodiscard]] SparsePMF fsr_step(const SparsePMF& current, const DynamicsMap& dynamics,
                                 const SparsePMF& disturbance, const FsrOptions& options = {});

/// Iterates fsr_step from `initial` for tau steps, timing each step.
[[nodiscard]] FsrResult fsr_compute(const SparsePMF& initial, const DynamicsMap& dynamics,
                                    const SparsePMF& disturbance, int tau, const FsrOptions& options = {});

/// Dense recursion over every cell of a fixed gridded domain. Produces the
/// same PMFs as fsr_compute; throws DomainOverflowError if mass escapes.
[[nodiscard]] FsrResult dp_baseline(const SparsePMF& initial, const DynamicsMap& dynamics,
                                    const SparsePMF& disturbance, const BoxRegion& domain, int tau);

}  // namespace fsreach
