#include "fsreach/sparse_pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fsreach/error.hpp"

namespace fsreach {

namespace {

constexpr std::size_t kMaxDenseCells = std::size_t{1} << 26;

void require_compatible(const Lattice& a, const Lattice& b) {
    if (!a.compatible(b)) {
        throw Error(ErrorCode::LatticeMismatch, "lattices differ in dimension or resolution");
    }
}

// Merges unsorted entries into sorted unique points with summed values.
std::pair<std::vector<LatticePoint>, std::vector<double>> merge_entries(
    std::size_t dimension, std::span<const std::pair<LatticePoint, double>> entries) {
    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (const auto& [p, m] : entries) {
        if (p.size() != dimension) {
            throw Error(ErrorCode::InvalidInput, "entry dimension does not match lattice");
        }
        if (!std::isfinite(m) || m < 0.0) {
            throw Error(ErrorCode::InvalidInput, "masses must be finite and non-negative");
        }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return entries[i].first < entries[j].first; });
    std::vector<LatticePoint> points;
    std::vector<double> values;
    for (std::size_t k : order) {
        const auto& [p, m] = entries[k];
        if (!points.empty() && points.back() == p) {
            values.back() += m;
        } else {
            points.push_back(p);
            values.push_back(m);
        }
    }
    std::size_t w = 0;
    for (std::size_t r = 0; r < points.size(); ++r) {
        if (values[r] > 0.0) {
            points[w] = points[r];
            values[w] = values[r];
            ++w;
        }
    }
    points.resize(w);
    values.resize(w);
    return {std::move(points), std::move(values)};
}

double ordered_sum(const std::vector<double>& values) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

}  // namespace

// --- GridAccumulator ---------------------------------------------------------

GridAccumulator::GridAccumulator(const IndexBox& bounds, std::size_t expected_adds, AccumulationMode mode)
    : bounds_(bounds) {
    const std::size_t volume = bounds_.cell_count();
    switch (mode) {
        case AccumulationMode::Dense: dense_ = volume <= kMaxDenseCells; break;
        case AccumulationMode::Hash: dense_ = false; break;
        case AccumulationMode::Auto:
            dense_ = volume <= kMaxDenseCells && volume <= std::max<std::size_t>(4 * expected_adds, 4096);
            break;
    }
    if (dense_) {
        const std::size_t n = bounds_.lower.size();
        strides_.assign(n, 1);
        for (std::size_t i = n; i-- > 1;) {
            strides_[i - 1] = strides_[i] * static_cast<std::size_t>(bounds_.upper[i] - bounds_.lower[i] + 1);
        }
        buffer_.assign(volume, 0.0);
    } else {
        map_.reserve(std::min<std::size_t>(expected_adds, std::size_t{1} << 20));
    }
}

std::size_t GridAccumulator::flat_index(const LatticePoint& p) const noexcept {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < strides_.size(); ++i) {
        flat += static_cast<std::size_t>(p[i] - bounds_.lower[i]) * strides_[i];
    }
    return flat;
}

void GridAccumulator::add(const LatticePoint& p, double value) {
    if (dense_) {
        if (!bounds_.contains(p)) throw std::logic_error("accumulator point outside declared bounds");
        buffer_[flat_index(p)] += value;
    } else {
        map_[p] += value;
    }
}

std::pair<std::vector<LatticePoint>, std::vector<double>> GridAccumulator::finish() && {
    std::vector<LatticePoint> points;
    std::vector<double> values;
    if (dense_) {
        const std::size_t n = bounds_.lower.size();
        LatticePoint cursor = bounds_.lower;
        for (std::size_t flat = 0; flat < buffer_.size(); ++flat) {
            if (buffer_[flat] > 0.0) {
                points.push_back(cursor);
                values.push_back(buffer_[flat]);
            }
            for (std::size_t i = n; i-- > 0;) {
                if (++cursor[i] <= bounds_.upper[i]) break;
                cursor[i] = bounds_.lower[i];
            }
        }
    } else {
        std::vector<std::pair<LatticePoint, double>> items(map_.begin(), map_.end());
        std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        points.reserve(items.size());
        values.reserve(items.size());
        for (auto& [p, v] : items) {
            if (v > 0.0) {
                points.push_back(p);
                values.push_back(v);
            }
        }
    }
    return {std::move(points), std::move(values)};
}

// --- SparseGrid --------------------------------------------------------------

SparseGrid::SparseGrid(Lattice lattice, std::vector<LatticePoint> points, std::vector<double> values)
    : lattice_(std::move(lattice)), points_(std::move(points)), values_(std::move(values)) {}

double SparseGrid::value_at(const LatticePoint& p) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), p);
    if (it == points_.end() || *it != p) return 0.0;
    return values_[static_cast<std::size_t>(it - points_.begin())];
}

bool SparseGrid::contains(const LatticePoint& p) const {
    return std::binary_search(points_.begin(), points_.end(), p);
}

double SparseGrid::sum() const { return ordered_sum(values_); }

double SparseGrid::max_value() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

IndexBox SparseGrid::bounding_box() const {
    if (points_.empty()) throw Error(ErrorCode::EmptySupport, "bounding box of an empty grid");
    IndexBox box{points_.front(), points_.front()};
    for (const auto& p : points_) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            box.lower[i] = std::min(box.lower[i], p[i]);
            box.upper[i] = std::max(box.upper[i], p[i]);
        }
    }
    return box;
}

// --- SparsePMF ---------------------------------------------------------------

SparsePMF::SparsePMF(Lattice lattice, std::span<const std::pair<LatticePoint, double>> entries) {
    auto [points, values] = merge_entries(lattice.dimension(), entries);
    if (points.empty()) throw Error(ErrorCode::EmptySupport, "PMF has no positive mass");
    const double total = ordered_sum(values);
    if (std::fabs(total - 1.0) > kMassTolerance) {
        throw Error(ErrorCode::InvalidInput, "PMF masses sum to " + std::to_string(total) + ", expected 1");
    }
    lattice_ = std::move(lattice);
    points_ = std::move(points);
    values_ = std::move(values);
}

SparsePMF SparsePMF::normalized(Lattice lattice, std::span<const std::pair<LatticePoint, double>> entries) {
    auto [points, values] = merge_entries(lattice.dimension(), entries);
    if (points.empty()) throw Error(ErrorCode::EmptySupport, "PMF has no positive mass");
    const double total = ordered_sum(values);
    for (double& v : values) v /= total;
    return from_sorted(std::move(lattice), std::move(points), std::move(values));
}

SparsePMF SparsePMF::delta(Lattice lattice, const LatticePoint& at) {
    if (at.size() != lattice.dimension()) {
        throw Error(ErrorCode::InvalidInput, "delta point dimension does not match lattice");
    }
    return from_sorted(std::move(lattice), {at}, {1.0});
}

SparsePMF SparsePMF::uniform(Lattice lattice, const BoxRegion& box) {
    const IndexBox cells = lattice.cells_within(box);
    const std::size_t count = cells.cell_count();
    if (count == 0) throw Error(ErrorCode::EmptySupport, "box contains no lattice cell");
    std::vector<LatticePoint> points;
    points.reserve(count);
    LatticePoint cursor = cells.lower;
    const std::size_t n = cursor.size();
    for (std::size_t k = 0; k < count; ++k) {
        points.push_back(cursor);
        for (std::size_t i = n; i-- > 0;) {
            if (++cursor[i] <= cells.upper[i]) break;
            cursor[i] = cells.lower[i];
        }
    }
    std::vector<double> values(count, 1.0 / static_cast<double>(count));
    return from_sorted(std::move(lattice), std::move(points), std::move(values));
}

SparsePMF SparsePMF::from_sorted(Lattice lattice, std::vector<LatticePoint> points, std::vector<double> masses) {
    if (points.empty()) throw Error(ErrorCode::EmptySupport, "PMF has no positive mass");
    return SparsePMF(std::move(lattice), std::move(points), std::move(masses));
}

SparsePMF SparsePMF::translated(const LatticePoint& offset) const {
    if (offset.size() != dimension()) throw Error(ErrorCode::InvalidInput, "offset dimension mismatch");
    std::vector<LatticePoint> shifted = points_;
    for (auto& p : shifted) p += offset;
    return SparsePMF(lattice_, std::move(shifted), values_);
}

SparsePMF SparsePMF::marginal(std::size_t first_axis, std::size_t count) const {
    if (count == 0 || first_axis + count > dimension()) {
        throw Error(ErrorCode::InvalidInput, "marginal axes out of range");
    }
    const auto f = static_cast<Eigen::Index>(first_axis);
    const auto c = static_cast<Eigen::Index>(count);
    Lattice sub(lattice_.origin().segment(f, c), lattice_.resolution().segment(f, c));
    std::vector<std::pair<LatticePoint, double>> entries;
    entries.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
        entries.emplace_back(LatticePoint(points_[i].indices().subspan(first_axis, count)), values_[i]);
    }
    auto [points, values] = merge_entries(count, entries);
    return from_sorted(std::move(sub), std::move(points), std::move(values));
}

PruneResult SparsePMF::pruned(double threshold) const {
    if (!(threshold >= 0.0)) throw Error(ErrorCode::InvalidInput, "prune threshold must be >= 0");
    std::vector<LatticePoint> points;
    std::vector<double> values;
    for (std::size_t i = 0; i < size(); ++i) {
        if (values_[i] >= threshold) {
            points.push_back(points_[i]);
            values.push_back(values_[i]);
        }
    }
    if (points.empty()) throw Error(ErrorCode::EmptySupport, "pruning removed every entry");
    PruneResult out;
    out.removed_entries = size() - points.size();
    out.retained_mass = ordered_sum(values);
    if (out.removed_entries > 0) {
        for (double& v : values) v /= out.retained_mass;
    }
    out.pmf = from_sorted(lattice_, std::move(points), std::move(values));
    return out;
}

Eigen::VectorXd SparsePMF::mean() const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension()));
    for (std::size_t i = 0; i < size(); ++i) m += values_[i] * lattice_.coord(points_[i]);
    return m;
}

// --- free functions ----------------------------------------------------------

SparsePMF convolve(const SparsePMF& a, const SparsePMF& b, const ConvolveOptions& options) {
    require_compatible(a.lattice(), b.lattice());
    const IndexBox ba = a.bounding_box();
    const IndexBox bb = b.bounding_box();
    GridAccumulator acc({ba.lower + bb.lower, ba.upper + bb.upper}, a.size() * b.size(), options.mode);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const LatticePoint& p = a.point(i);
        const double ma = a.mass(i);
        for (std::size_t j = 0; j < b.size(); ++j) acc.add(p + b.point(j), ma * b.mass(j));
    }
    auto [points, values] = std::move(acc).finish();
    Lattice out_lattice(a.lattice().origin() + b.lattice().origin(), a.lattice().resolution());
    SparsePMF out = SparsePMF::from_sorted(std::move(out_lattice), std::move(points), std::move(values));
    if (options.prune_threshold > 0.0) return out.pruned(options.prune_threshold).pmf;
    return out;
}

SparsePMF product(const SparsePMF& a, const SparsePMF& b) {
    if (a.dimension() + b.dimension() > kMaxDimension) {
        throw Error(ErrorCode::TooLarge, "product dimension exceeds kMaxDimension");
    }
    std::vector<LatticePoint> points;
    std::vector<double> values;
    points.reserve(a.size() * b.size());
    values.reserve(a.size() * b.size());
    // Lexicographic order of (p, q) is the concatenated order, so the output is sorted.
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double m = a.mass(i) * b.mass(j);
            if (m > 0.0) {
                points.push_back(a.point(i).concat(b.point(j)));
                values.push_back(m);
            }
        }
    }
    return SparsePMF::from_sorted(a.lattice().product(b.lattice()), std::move(points), std::move(values));
}

double total_mass(const SparsePMF& a) { return a.sum(); }

}  // namespace fsreach
