#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fsreach/lattice.hpp"

namespace fsreach {

/// Tolerance on the total mass of a normalized PMF.
inline constexpr double kMassTolerance = 1e-12;

/// How an accumulator stores partial sums. `Auto` uses a dense scratch buffer
/// over the bounding box when that box is small relative to the number of
/// contributions, and a hash map otherwise. Both produce bit-identical sums
/// because every key receives its contributions in insertion order.
enum class AccumulationMode { Auto, Dense, Hash };

/// Sums values keyed by lattice point and emits them in lexicographic order.
class GridAccumulator {
public:
    GridAccumulator(const IndexBox& bounds, std::size_t expected_adds,
                    AccumulationMode mode = AccumulationMode::Auto);

    void add(const LatticePoint& p, double value);

    [[nodiscard]] bool dense() const noexcept { return dense_; }

    /// Sorted points with strictly positive accumulated values.
    [[nodiscard]] std::pair<std::vector<LatticePoint>, std::vector<double>> finish() &&;

private:
    [[nodiscard]] std::size_t flat_index(const LatticePoint& p) const noexcept;

    IndexBox bounds_;
    bool dense_ = false;
    std::vector<std::size_t> strides_;
    std::vector<double> buffer_;
    std::unordered_map<LatticePoint, double, LatticePointHash> map_;
};

/// Sorted sparse map from lattice points to strictly positive values.
class SparseGrid {
public:
    SparseGrid() = default;
    SparseGrid(Lattice lattice, std::vector<LatticePoint> points, std::vector<double> values);

    [[nodiscard]] const Lattice& lattice() const noexcept { return lattice_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return lattice_.dimension(); }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] bool empty() const noexcept { return points_.empty(); }

    [[nodiscard]] const LatticePoint& point(std::size_t i) const { return points_[i]; }
    [[nodiscard]] double value(std::size_t i) const { return values_[i]; }
    [[nodiscard]] const std::vector<LatticePoint>& points() const noexcept { return points_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    /// Value stored at `p`, or 0 when `p` is not in the support.
    [[nodiscard]] double value_at(const LatticePoint& p) const;
    [[nodiscard]] bool contains(const LatticePoint& p) const;
    [[nodiscard]] double sum() const;
    [[nodiscard]] double max_value() const;
    /// Tight index bounds of the support. Requires a nonempty grid.
    [[nodiscard]] IndexBox bounding_box() const;

protected:
    Lattice lattice_;
    std::vector<LatticePoint> points_;
    std::vector<double> values_;
};

class SparsePMF;

struct PruneResult;

/// Probability mass function on a lattice. Immutable; every stored mass is
/// strictly positive and the masses sum to one within kMassTolerance.
class SparsePMF : public SparseGrid {
public:
    SparsePMF() = default;

    /// Validating constructor. Duplicate points are merged, zero masses are
    /// dropped, negative or non-finite masses and unnormalized input throw.
    SparsePMF(Lattice lattice, std::span<const std::pair<LatticePoint, double>> entries);

    /// Like the validating constructor but rescales the masses to sum to one.
    static SparsePMF normalized(Lattice lattice, std::span<const std::pair<LatticePoint, double>> entries);
    static SparsePMF delta(Lattice lattice, const LatticePoint& at);
    /// Uniform mass over every lattice cell whose center lies in `box`.
    static SparsePMF uniform(Lattice lattice, const BoxRegion& box);

    /// Trusted construction from already sorted, positive, normalized data.
    static SparsePMF from_sorted(Lattice lattice, std::vector<LatticePoint> points,
                                 std::vector<double> masses);

    [[nodiscard]] double mass(std::size_t i) const { return values_[i]; }
    [[nodiscard]] double mass_at(const LatticePoint& p) const { return value_at(p); }
    [[nodiscard]] const std::vector<LatticePoint>& support() const noexcept { return points_; }

    /// Every point shifted by `offset` on the same lattice.
    [[nodiscard]] SparsePMF translated(const LatticePoint& offset) const;
    /// Marginal over the `count` axes starting at `first_axis`.
    [[nodiscard]] SparsePMF marginal(std::size_t first_axis, std::size_t count) const;
    /// Drops masses below `threshold` and renormalizes.
    [[nodiscard]] PruneResult pruned(double threshold) const;

    [[nodiscard]] Eigen::VectorXd mean() const;

private:
    SparsePMF(Lattice lattice, std::vector<LatticePoint> points, std::vector<double> masses)
        : SparseGrid(std::move(lattice), std::move(points), std::move(masses)) {}
};

struct PruneResult {
    SparsePMF pmf;
    /// Mass kept before renormalization; at least 1 - threshold * |support|.
    double retained_mass = 1.0;
    std::size_t removed_entries = 0;
};

struct ConvolveOptions {
    /// Entries below this mass are dropped and the result renormalized. 0 = exact.
    double prune_threshold = 0.0;
    AccumulationMode mode = AccumulationMode::Auto;
};

/// Exact sparse convolution: mass a(p) b(q) accumulates at p + q. The result
/// lives on a lattice whose origin is the sum of the input origins.
[[nodiscard]] SparsePMF convolve(const SparsePMF& a, const SparsePMF& b, const ConvolveOptions& options = {});

/// Joint PMF of independent marginals on the product lattice.
[[nodiscard]] SparsePMF product(const SparsePMF& a, const SparsePMF& b);

[[nodiscard]] double total_mass(const SparsePMF& a);

}  // namespace fsreach
