#include "fsreach/disturbance.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "fsreach/error.hpp"

namespace fsreach {

namespace {

constexpr int kMaxRejections = 1'000'000;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void invalid(const std::string& message) { throw Error(ErrorCode::InvalidInput, message); }

void validate_gaussian(const TruncatedGaussian& g) {
    const auto n = static_cast<Eigen::Index>(g.support_box.dimension());
    if (n == 0) invalid("truncated Gaussian needs a support box");
    if (g.mean.size() != n || g.covariance.rows() != n || g.covariance.cols() != n) {
        invalid("truncated Gaussian mean/covariance dimension does not match its support box");
    }
    if (!g.mean.allFinite() || !g.covariance.allFinite()) invalid("truncated Gaussian parameters must be finite");
    const double scale = std::max(1.0, g.covariance.cwiseAbs().maxCoeff());
    if ((g.covariance - g.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        invalid("covariance must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.covariance, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale) invalid("covariance must be positive semidefinite");
    if (eig.eigenvalues().minCoeff() <= 1e-14 * scale) {
        invalid("covariance is singular; the truncated density is undefined");
    }
}

void validate_speed_set(const FiniteSpeedSet& s) {
    if (s.speeds.empty() || s.speeds.size() != s.probs.size()) {
        invalid("speed set needs equally many speeds and probabilities");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < s.probs.size(); ++i) {
        if (!std::isfinite(s.speeds[i])) invalid("speeds must be finite");
        if (!std::isfinite(s.probs[i]) || s.probs[i] < 0.0) invalid("probabilities must be non-negative");
        total += s.probs[i];
    }
    if (std::fabs(total - 1.0) > kMassTolerance) {
        invalid("speed probabilities sum to " + std::to_string(total) + ", expected 1");
    }
    if (s.gain_matrix.size() == 0 || s.gain_matrix.cols() != s.per_axis_sign.size()) {
        invalid("gain matrix columns must match the sign vector length");
    }
    for (Eigen::Index i = 0; i < s.per_axis_sign.size(); ++i) {
        if (s.per_axis_sign[i] != 1.0 && s.per_axis_sign[i] != -1.0) invalid("per-axis signs must be +1 or -1");
    }
    if (!(s.sample_time > 0.0) || !std::isfinite(s.sample_time)) invalid("sample time must be positive");
    if (!s.gain_matrix.allFinite()) invalid("gain matrix must be finite");
}

Eigen::VectorXd speed_set_image(const FiniteSpeedSet& s, const Eigen::VectorXd& w) {
    return s.sample_time * (s.gain_matrix * s.per_axis_sign.cwiseProduct(w));
}

SparsePMF discretize_gaussian(const TruncatedGaussian& g, const Lattice& lattice) {
    if (lattice.dimension() != g.support_box.dimension()) {
        throw Error(ErrorCode::LatticeMismatch, "lattice dimension differs from the disturbance dimension");
    }
    const IndexBox cells = lattice.cells_within(g.support_box);
    const std::size_t count = cells.cell_count();
    if (count == 0) throw Error(ErrorCode::EmptySupport, "no lattice cell inside the truncation box");
    const Eigen::LLT<Eigen::MatrixXd> llt(g.covariance);
    std::vector<std::pair<LatticePoint, double>> entries;
    entries.reserve(count);
    LatticePoint cursor = cells.lower;
    const std::size_t n = cursor.size();
    for (std::size_t k = 0; k < count; ++k) {
        const Eigen::VectorXd d = lattice.coord(cursor) - g.mean;
        const double quad = d.dot(llt.solve(d));
        entries.emplace_back(cursor, std::exp(-0.5 * quad));
        for (std::size_t i = n; i-- > 0;) {
            if (++cursor[i] <= cells.upper[i]) break;
            cursor[i] = cells.lower[i];
        }
    }
    return SparsePMF::normalized(lattice, entries);
}

SparsePMF discretize_speed_set(const FiniteSpeedSet& s, const Lattice& lattice) {
    if (static_cast<std::size_t>(s.gain_matrix.rows()) != lattice.dimension()) {
        throw Error(ErrorCode::LatticeMismatch, "lattice dimension differs from the gain matrix rows");
    }
    const std::size_t p = static_cast<std::size_t>(s.per_axis_sign.size());
    const std::size_t k = s.speeds.size();
    std::vector<std::size_t> choice(p, 0);
    std::vector<std::pair<LatticePoint, double>> entries;
    Eigen::VectorXd w(static_cast<Eigen::Index>(p));
    while (true) {
        double mass = 1.0;
        for (std::size_t j = 0; j < p; ++j) {
            w[static_cast<Eigen::Index>(j)] = s.speeds[choice[j]];
            mass *= s.probs[choice[j]];
        }
        if (mass > 0.0) entries.emplace_back(lattice.snap(speed_set_image(s, w)), mass);
        std::size_t j = p;
        while (j-- > 0) {
            if (++choice[j] < k) break;
            choice[j] = 0;
        }
        if (j == static_cast<std::size_t>(-1)) break;
    }
    return SparsePMF(lattice, entries);
}

SparsePMF discretize_explicit(const ExplicitPmf& e, const Lattice& lattice) {
    if (e.pmf.lattice() == lattice) return e.pmf;
    if (e.pmf.dimension() != lattice.dimension()) {
        throw Error(ErrorCode::LatticeMismatch, "explicit PMF dimension differs from the lattice");
    }
    std::vector<std::pair<LatticePoint, double>> entries;
    entries.reserve(e.pmf.size());
    for (std::size_t i = 0; i < e.pmf.size(); ++i) {
        entries.emplace_back(lattice.snap(e.pmf.lattice().coord(e.pmf.point(i))), e.pmf.mass(i));
    }
    return SparsePMF(lattice, entries);
}

}  // namespace

void validate(const DisturbanceSpec& spec) {
    std::visit(overloaded{
                   [](const TruncatedGaussian& g) { validate_gaussian(g); },
                   [](const FiniteSpeedSet& s) { validate_speed_set(s); },
                   [](const ExplicitPmf& e) {
                       if (e.pmf.empty()) invalid("explicit PMF is empty");
                   },
               },
               spec);
}

std::size_t image_dimension(const DisturbanceSpec& spec) {
    return std::visit(overloaded{
                          [](const TruncatedGaussian& g) { return g.support_box.dimension(); },
                          [](const FiniteSpeedSet& s) { return static_cast<std::size_t>(s.gain_matrix.rows()); },
                          [](const ExplicitPmf& e) { return e.pmf.dimension(); },
                      },
                      spec);
}

SparsePMF discretize(const DisturbanceSpec& spec, const Lattice& lattice) {
    validate(spec);
    return std::visit(overloaded{
                          [&](const TruncatedGaussian& g) { return discretize_gaussian(g, lattice); },
                          [&](const FiniteSpeedSet& s) { return discretize_speed_set(s, lattice); },
                          [&](const ExplicitPmf& e) { return discretize_explicit(e, lattice); },
                      },
                      spec);
}

double mean_speed(const FiniteSpeedSet& set) {
    double m = 0.0;
    for (std::size_t i = 0; i < set.speeds.size(); ++i) m += set.speeds[i] * set.probs[i];
    return m;
}

DisturbanceSampler::DisturbanceSampler(DisturbanceSpec spec) : spec_(std::move(spec)) {
    validate(spec_);
    if (const auto* g = std::get_if<TruncatedGaussian>(&spec_)) {
        cholesky_ = Eigen::LLT<Eigen::MatrixXd>(g->covariance).matrixL();
    } else if (const auto* s = std::get_if<FiniteSpeedSet>(&spec_)) {
        categorical_ = std::discrete_distribution<std::size_t>(s->probs.begin(), s->probs.end());
    } else {
        const auto& pmf = std::get<ExplicitPmf>(spec_).pmf;
        categorical_ = std::discrete_distribution<std::size_t>(pmf.values().begin(), pmf.values().end());
    }
}

Eigen::VectorXd DisturbanceSampler::operator()(std::mt19937_64& rng) const {
    if (const auto* g = std::get_if<TruncatedGaussian>(&spec_)) {
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd z(g->mean.size());
        for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
            for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
            Eigen::VectorXd w = g->mean + cholesky_ * z;
            if (g->support_box.contains(w)) return w;
        }
        throw Error(ErrorCode::InvalidInput, "truncation box has negligible Gaussian mass");
    }
    if (const auto* s = std::get_if<FiniteSpeedSet>(&spec_)) {
        Eigen::VectorXd w(s->per_axis_sign.size());
        for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = s->speeds[categorical_(rng)];
        return speed_set_image(*s, w);
    }
    const auto& pmf = std::get<ExplicitPmf>(spec_).pmf;
    return pmf.lattice().coord(pmf.point(categorical_(rng)));
}

Eigen::VectorXd sample(const DisturbanceSpec& spec, std::mt19937_64& rng) { return DisturbanceSampler(spec)(rng); }

}  // namespace fsreach
