#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "errmax/barrier.hpp"
#include "errmax/error.hpp"
#include "errmax/parallel.hpp"

namespace errmax {

namespace {

constexpr double kBgkBeta = 0.5826;  // -zeta(1/2) / sqrt(2 pi)

struct BlockSums {
    double sum = 0.0;
    double sum_sq = 0.0;
};

}  // namespace

McEstimate mc_reference_price(const BarrierInputs& inp, int n_paths, int n_steps, std::uint64_t seed,
                              const McOptions& options) {
    require(n_paths >= 1000, ErrorKind::Domain, "n_paths must be >= 1000");
    require(n_steps >= 100, ErrorKind::Domain, "n_steps must be >= 100");
    require(options.block_paths > 0, ErrorKind::Domain, "block_paths must be > 0");
    // Same validation as the closed form (throws KnockedOut for b <= 1).
    (void)barrier_price(inp);

    const double dt = inp.tau / n_steps;
    const double sqrt_dt = std::sqrt(dt);
    const double drift = (inp.rate - 0.5 * inp.sigma * inp.sigma) * dt;
    const double vol = inp.sigma * sqrt_dt;
    const double log_s0 = std::log(kSpot);
    const double strike = kSpot * inp.strike_ratio;
    double log_h = std::log(kSpot * inp.barrier_ratio);
    if (options.correction == McCorrection::BarrierShift) log_h -= kBgkBeta * vol;
    const double bridge_scale = 2.0 / (inp.sigma * inp.sigma * dt);
    const double discount = std::exp(-inp.rate * inp.tau);
    const bool bridge = options.correction == McCorrection::BrownianBridge;

    const auto block = static_cast<std::size_t>(options.block_paths);
    const auto total = static_cast<std::size_t>(n_paths);
    const std::size_t n_blocks = (total + block - 1) / block;
    std::vector<BlockSums> sums(n_blocks);

    parallel_for(n_blocks, options.threads, [&](std::size_t blk) {
        std::mt19937_64 rng(derive_seed(seed, blk));
        std::normal_distribution<double> normal(0.0, 1.0);
        const std::size_t paths = std::min(block, total - blk * block);
        BlockSums acc;
        for (std::size_t p = 0; p < paths; ++p) {
            double x = log_s0;
            double survival = 1.0;
            for (int step = 0; step < n_steps; ++step) {
                const double next = x + drift + vol * normal(rng);
                if (next >= log_h) {
                    survival = 0.0;
                    break;
                }
                if (bridge) {
                    const double exponent = bridge_scale * (log_h - x) * (log_h - next);
                    if (exponent < 50.0) survival *= 1.0 - std::exp(-exponent);
                }
                x = next;
            }
            const double payoff = survival > 0.0 ? survival * std::max(std::exp(x) - strike, 0.0) * discount : 0.0;
            acc.sum += payoff;
            acc.sum_sq += payoff * payoff;
        }
        sums[blk] = acc;
    });

    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& s : sums) {
        sum += s.sum;
        sum_sq += s.sum_sq;
    }
    const auto n = static_cast<double>(total);
    const double mean = sum / n;
    const double variance = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(variance / n)};
}

}  // namespace errmax
