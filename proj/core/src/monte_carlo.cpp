#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "fsreach/error.hpp"
#include "fsreach/simulation.hpp"

namespace fsreach {

namespace {

constexpr std::size_t kChunk = 4096;

}  // namespace

unsigned worker_count() {
    if (const char* env = std::getenv("FSREACH_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

std::vector<CollisionEstimate> monte_carlo_collision(const Scenario& scenario,
                                                     const std::vector<Eigen::VectorXd>& start_positions,
                                                     const std::vector<Eigen::VectorXd>& plan_states,
                                                     std::size_t n_samples, std::uint64_t seed) {
    if (start_positions.size() != scenario.obstacles.size()) throw Error(ErrorCode::InvalidInput, "one start position per obstacle is required");
    if (n_samples == 0) throw Error(ErrorCode::InvalidInput, "n_samples must be positive");
    const std::size_t K = plan_states.size();
    std::vector<DisturbanceSampler> samplers;
    for (const ObstacleSpec& o : scenario.obstacles) samplers.emplace_back(o.disturbance);

    const std::size_t chunks = (n_samples + kChunk - 1) / kChunk;
    std::vector<std::vector<std::size_t>> hits(chunks, std::vector<std::size_t>(K, 0));
    auto work = [&](std::size_t first, std::size_t stride) {
        // Samplers hold distribution state, so each worker gets its own copies.
        std::vector<DisturbanceSampler> local = samplers;
        for (std::size_t c = first; c < chunks; c += stride) {
            std::mt19937_64 rng = make_stream(seed, c + 1);
            const std::size_t n = std::min(kChunk, n_samples - c * kChunk);
            for (std::size_t s = 0; s < n; ++s) {
                std::vector<Eigen::VectorXd> pos = start_positions;
                for (std::size_t k = 0; k < K; ++k) {
                    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] += local[i](rng);
                    if (in_collision(scenario, plan_states[k], pos)) ++hits[c][k];
                }
            }
        }
    };
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), chunks));
    if (workers <= 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    }

    std::vector<CollisionEstimate> out(K);
    for (std::size_t k = 0; k < K; ++k) {
        CollisionEstimate& e = out[k];
        e.samples = n_samples;
        for (std::size_t c = 0; c < chunks; ++c) e.hits += hits[c][k];
        const auto n = static_cast<double>(n_samples);
        e.probability = static_cast<double>(e.hits) / n;
        e.sigma = std::sqrt(e.probability * (1.0 - e.probability) / n);
        e.ci_low = std::max(0.0, e.probability - 1.96 * e.sigma);
        e.ci_high = std::min(1.0, e.probability + 1.96 * e.sigma);
    }
    return out;
}

std::vector<CollisionEstimate> validate_trace(const Scenario& scenario, const SimTrace& trace, std::size_t n_samples,
                                              std::uint64_t seed) {
    std::vector<CollisionEstimate> out;
    for (std::size_t t = 0; t + 1 < trace.steps.size(); ++t) {
        const std::vector<Eigen::VectorXd> state{trace.steps[t + 1].robot};
        out.push_back(monte_carlo_collision(scenario, trace.steps[t].obstacles, state, n_samples, seed + t).front());
    }
    return out;
}

}  // namespace fsreach
