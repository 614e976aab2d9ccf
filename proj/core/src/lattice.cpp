#include "fsreach/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fsreach/error.hpp"

namespace fsreach {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::LatticeMismatch: return "LatticeMismatch";
        case ErrorCode::EmptySupport: return "EmptySupport";
        case ErrorCode::DomainOverflow: return "DomainOverflow";
        case ErrorCode::InvalidGeometry: return "InvalidGeometry";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::BadBigM: return "BadBigM";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

namespace {

constexpr double kTieTolerance = 1e-9;

void check_dimension(std::size_t n) {
    if (n == 0 || n > kMaxDimension) {
        throw Error(ErrorCode::InvalidInput,
                    "lattice dimension must be in [1, " + std::to_string(kMaxDimension) +
                        "], got " + std::to_string(n));
    }
}

}  // namespace

Index round_half_away(double value) noexcept {
    const double magnitude = std::fabs(value);
    const double floor_part = std::floor(magnitude);
    const double frac = magnitude - floor_part;
    double rounded = (frac >= 0.5 - kTieTolerance) ? floor_part + 1.0 : floor_part;
    return static_cast<Index>(value < 0 ? -rounded : rounded);
}

// --- LatticePoint ------------------------------------------------------------

LatticePoint::LatticePoint(std::size_t dimension) : size_(dimension) { check_dimension(dimension); }

LatticePoint::LatticePoint(std::initializer_list<Index> indices)
    : LatticePoint(std::span<const Index>(indices.begin(), indices.size())) {}

LatticePoint::LatticePoint(std::span<const Index> indices) : size_(indices.size()) {
    check_dimension(indices.size());
    std::copy(indices.begin(), indices.end(), v_.begin());
}

LatticePoint& LatticePoint::operator+=(const LatticePoint& other) noexcept {
    for (std::size_t i = 0; i < size_; ++i) v_[i] += other.v_[i];
    return *this;
}

LatticePoint operator-(const LatticePoint& a, const LatticePoint& b) noexcept {
    LatticePoint out = a;
    for (std::size_t i = 0; i < a.size_; ++i) out.v_[i] -= b.v_[i];
    return out;
}

LatticePoint LatticePoint::concat(const LatticePoint& other) const {
    LatticePoint out(size_ + other.size_);
    std::copy(begin(), end(), out.v_.begin());
    std::copy(other.begin(), other.end(), out.v_.begin() + static_cast<std::ptrdiff_t>(size_));
    return out;
}

bool operator==(const LatticePoint& a, const LatticePoint& b) noexcept {
    return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
}

std::strong_ordering operator<=>(const LatticePoint& a, const LatticePoint& b) noexcept {
    return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
}

std::size_t LatticePointHash::operator()(const LatticePoint& p) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ p.size();
    for (Index v : p) {
        h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
}

// --- BoxRegion ---------------------------------------------------------------

BoxRegion::BoxRegion(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.size() == 0) {
        throw Error(ErrorCode::InvalidInput, "box bounds must be nonempty and of equal length");
    }
    if (!lower_.allFinite() || !upper_.allFinite()) {
        throw Error(ErrorCode::InvalidInput, "box bounds must be finite");
    }
    if ((lower_.array() > upper_.array()).any()) {
        throw Error(ErrorCode::InvalidInput, "box lower bound exceeds upper bound");
    }
}

bool BoxRegion::contains(const Eigen::VectorXd& point, double tolerance) const {
    return ((point.array() >= lower_.array() - tolerance) &&
            (point.array() <= upper_.array() + tolerance))
        .all();
}

bool BoxRegion::has_interior() const { return ((upper_ - lower_).array() > 0.0).all(); }

bool BoxRegion::intersects(const BoxRegion& other) const {
    return ((lower_.array() <= other.upper_.array()) && (other.lower_.array() <= upper_.array())).all();
}

// --- IndexBox ----------------------------------------------------------------

bool IndexBox::contains(const LatticePoint& p) const noexcept {
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < lower[i] || p[i] > upper[i]) return false;
    }
    return true;
}

std::size_t IndexBox::cell_count() const noexcept {
    std::size_t count = 1;
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (upper[i] < lower[i]) return 0;
        count *= static_cast<std::size_t>(upper[i] - lower[i] + 1);
    }
    return count;
}

IndexBox IndexBox::translated(const LatticePoint& offset) const noexcept {
    return {lower + offset, upper + offset};
}

// --- Lattice -----------------------------------------------------------------

Lattice::Lattice(Eigen::VectorXd origin, Eigen::VectorXd resolution)
    : origin_(std::move(origin)), resolution_(std::move(resolution)) {
    check_dimension(static_cast<std::size_t>(origin_.size()));
    if (origin_.size() != resolution_.size()) {
        throw Error(ErrorCode::InvalidInput, "lattice origin and resolution differ in length");
    }
    if (!origin_.allFinite() || !resolution_.allFinite() || (resolution_.array() <= 0.0).any()) {
        throw Error(ErrorCode::InvalidInput, "lattice resolution must be finite and positive");
    }
}

Lattice Lattice::uniform(std::size_t dimension, double resolution) {
    check_dimension(dimension);
    const auto n = static_cast<Eigen::Index>(dimension);
    return Lattice(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, resolution));
}

LatticePoint Lattice::snap(const Eigen::VectorXd& point) const {
    if (point.size() != origin_.size()) {
        throw Error(ErrorCode::InvalidInput, "point dimension does not match lattice");
    }
    if (!point.allFinite()) {
        throw Error(ErrorCode::InvalidInput, "cannot snap a non-finite coordinate");
    }
    LatticePoint out(dimension());
    for (Eigen::Index i = 0; i < point.size(); ++i) {
        out[static_cast<std::size_t>(i)] = round_half_away((point[i] - origin_[i]) / resolution_[i]);
    }
    return out;
}

Eigen::VectorXd Lattice::coord(std::span<const Index> p) const {
    Eigen::VectorXd out(origin_.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out[i] = origin_[i] + resolution_[i] * static_cast<double>(p[static_cast<std::size_t>(i)]);
    }
    return out;
}

Eigen::VectorXd Lattice::coord(const LatticePoint& p) const { return coord(p.indices()); }

IndexBox Lattice::cells_within(const BoxRegion& box) const {
    if (box.dimension() != dimension()) {
        throw Error(ErrorCode::InvalidInput, "box dimension does not match lattice");
    }
    IndexBox out{LatticePoint(dimension()), LatticePoint(dimension())};
    for (std::size_t i = 0; i < dimension(); ++i) {
        const auto e = static_cast<Eigen::Index>(i);
        const double lo = (box.lower()[e] - origin_[e]) / resolution_[e];
        const double hi = (box.upper()[e] - origin_[e]) / resolution_[e];
        out.lower[i] = static_cast<Index>(std::ceil(lo - kTieTolerance));
        out.upper[i] = static_cast<Index>(std::floor(hi + kTieTolerance));
    }
    return out;
}

BoxRegion Lattice::cell_extent(const IndexBox& box) const {
    Eigen::VectorXd half = 0.5 * resolution_;
    return BoxRegion(coord(box.lower) - half, coord(box.upper) + half);
}

bool Lattice::compatible(const Lattice& other) const noexcept {
    if (dimension() != other.dimension()) return false;
    for (Eigen::Index i = 0; i < resolution_.size(); ++i) {
        const double a = resolution_[i];
        const double b = other.resolution_[i];
        if (std::fabs(a - b) > 1e-12 * std::max(a, b)) return false;
    }
    return true;
}

Lattice Lattice::product(const Lattice& other) const {
    Eigen::VectorXd origin(origin_.size() + other.origin_.size());
    Eigen::VectorXd res(origin.size());
    origin << origin_, other.origin_;
    res << resolution_, other.resolution_;
    return Lattice(std::move(origin), std::move(res));
}

}  // namespace fsreach
