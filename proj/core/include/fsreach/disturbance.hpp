#pragma once

#include <random>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "fsreach/lattice.hpp"
#include "fsreach/sparse_pmf.hpp"

namespace fsreach {

/// Gaussian restricted to a box and renormalized. Image dimension = box dimension.
struct TruncatedGaussian {
    BoxRegion support_box;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

/// Each of the p components of w draws a speed independently from the same
/// marginal and carries a fixed sign; the per-step displacement is
/// v = sample_time * gain_matrix * (sign .* w).
struct FiniteSpeedSet {
    std::vector<double> speeds;
    std::vector<double> probs;
    Eigen::VectorXd per_axis_sign;
    Eigen::MatrixXd gain_matrix;
    double sample_time = 1.0;
};

struct ExplicitPmf {
    SparsePMF pmf;
};

using DisturbanceSpec = std::variant<TruncatedGaussian, FiniteSpeedSet, ExplicitPmf>;

/// Throws InvalidInput describing the first violated invariant.
void validate(const DisturbanceSpec& spec);

/// Dimension of v = g(w).
[[nodiscard]] std::size_t image_dimension(const DisturbanceSpec& spec);

/// PMF of v on `lattice`. Truncated Gaussians are point-evaluated at the cell
/// centers inside the support box and renormalized; speed sets are snapped to
/// the lattice with mass accumulation.
[[nodiscard]] SparsePMF discretize(const DisturbanceSpec& spec, const Lattice& lattice);

/// Expected speed of the marginal, sum_i speed_i * prob_i.
[[nodiscard]] double mean_speed(const FiniteSpeedSet& set);

/// Draws v from the continuous or discrete specification (never from the
/// lattice-snapped PMF). All randomness comes from the caller's engine.
class DisturbanceSampler {
public:
    explicit DisturbanceSampler(DisturbanceSpec spec);

    [[nodiscard]] Eigen::VectorXd operator()(std::mt19937_64& rng) const;
    [[nodiscard]] const DisturbanceSpec& spec() const noexcept { return spec_; }

private:
    DisturbanceSpec spec_;
    Eigen::MatrixXd cholesky_;
    mutable std::discrete_distribution<std::size_t> categorical_;
};

/// One draw; builds a sampler per call.
[[nodiscard]] Eigen::VectorXd sample(const DisturbanceSpec& spec, std::mt19937_64& rng);

}  // namespace fsreach
