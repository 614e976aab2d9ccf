#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>

#include <Eigen/Core>

namespace fsreach {

using Index = std::int64_t;

/// Largest supported lattice dimension (a product of two 4-D PMFs still fits).
inline constexpr std::size_t kMaxDimension = 8;

/// Integer cell coordinates on a lattice. Fixed capacity, no heap allocation.
class LatticePoint {
public:
    LatticePoint() = default;
    explicit LatticePoint(std::size_t dimension);
    LatticePoint(std::initializer_list<Index> indices);
    explicit LatticePoint(std::span<const Index> indices);

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] Index operator[](std::size_t axis) const noexcept { return v_[axis]; }
    [[nodiscard]] Index& operator[](std::size_t axis) noexcept { return v_[axis]; }

    [[nodiscard]] const Index* begin() const noexcept { return v_.data(); }
    [[nodiscard]] const Index* end() const noexcept { return v_.data() + size_; }
    [[nodiscard]] std::span<const Index> indices() const noexcept { return {v_.data(), size_}; }

    LatticePoint& operator+=(const LatticePoint& other) noexcept;
    friend LatticePoint operator+(LatticePoint a, const LatticePoint& b) noexcept { return a += b; }
    friend LatticePoint operator-(const LatticePoint& a, const LatticePoint& b) noexcept;

    /// Concatenation; used for points of a product space.
    [[nodiscard]] LatticePoint concat(const LatticePoint& other) const;

    friend bool operator==(const LatticePoint& a, const LatticePoint& b) noexcept;
    friend std::strong_ordering operator<=>(const LatticePoint& a, const LatticePoint& b) noexcept;

private:
    std::array<Index, kMaxDimension> v_{};
    std::size_t size_ = 0;
};

struct LatticePointHash {
    std::size_t operator()(const LatticePoint& p) const noexcept;
};

/// Axis-aligned region in continuous coordinates. Invariant: lower <= upper.
class BoxRegion {
public:
    BoxRegion() = default;
    BoxRegion(Eigen::VectorXd lower, Eigen::VectorXd upper);

    [[nodiscard]] const Eigen::VectorXd& lower() const noexcept { return lower_; }
    [[nodiscard]] const Eigen::VectorXd& upper() const noexcept { return upper_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(lower_.size()); }

    [[nodiscard]] bool contains(const Eigen::VectorXd& point, double tolerance = 0.0) const;
    [[nodiscard]] bool has_interior() const;
    [[nodiscard]] bool intersects(const BoxRegion& other) const;
    [[nodiscard]] double diameter() const { return (upper_ - lower_).norm(); }

    friend bool operator==(const BoxRegion& a, const BoxRegion& b) {
        return a.lower_ == b.lower_ && a.upper_ == b.upper_;
    }

private:
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
};

/// Inclusive integer cell range [lower, upper] on each axis.
struct IndexBox {
    LatticePoint lower;
    LatticePoint upper;

    [[nodiscard]] bool contains(const LatticePoint& p) const noexcept;
    [[nodiscard]] std::size_t cell_count() const noexcept;
    [[nodiscard]] IndexBox translated(const LatticePoint& offset) const noexcept;
    friend bool operator==(const IndexBox&, const IndexBox&) = default;
};

/// Uniform grid: cell i sits at origin + resolution .* i.
class Lattice {
public:
    Lattice() = default;
    Lattice(Eigen::VectorXd origin, Eigen::VectorXd resolution);

    /// Zero-origin lattice with the same resolution on every axis.
    static Lattice uniform(std::size_t dimension, double resolution);

    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(origin_.size()); }
    [[nodiscard]] const Eigen::VectorXd& origin() const noexcept { return origin_; }
    [[nodiscard]] const Eigen::VectorXd& resolution() const noexcept { return resolution_; }

    /// Nearest lattice point; exact ties round half away from zero.
    [[nodiscard]] LatticePoint snap(const Eigen::VectorXd& point) const;
    [[nodiscard]] Eigen::VectorXd coord(const LatticePoint& p) const;
    [[nodiscard]] Eigen::VectorXd coord(std::span<const Index> p) const;

    /// Cells whose centers lie inside the box (closed, with a 1e-9 cell tolerance).
    [[nodiscard]] IndexBox cells_within(const BoxRegion& box) const;
    /// Continuous extent of an index box including the half-cell border.
    [[nodiscard]] BoxRegion cell_extent(const IndexBox& box) const;

    /// Same dimension and resolution (origins may differ).
    [[nodiscard]] bool compatible(const Lattice& other) const noexcept;
    /// Lattice of a product space: concatenated origins and resolutions.
    [[nodiscard]] Lattice product(const Lattice& other) const;

    friend bool operator==(const Lattice& a, const Lattice& b) {
        return a.origin_ == b.origin_ && a.resolution_ == b.resolution_;
    }

private:
    Eigen::VectorXd origin_;
    Eigen::VectorXd resolution_;
};

/// Round half away from zero, treating values within 1e-9 of a tie as ties.
Index round_half_away(double value) noexcept;

}  // namespace fsreach
