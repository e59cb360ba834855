#pragma once

#include <cstdint>

namespace errmax {

/// Spot is fixed; barrier and strike enter as ratios to it and prices come
/// out in dollars.
inline constexpr double kSpot = 100.0;

struct BarrierInputs {
    double barrier_ratio = 0.0;  // H / S
    double strike_ratio = 0.0;   // K / S
    double tau = 0.0;            // years to maturity
    double sigma = 0.0;          // annualised volatility
    double rate = 0.0;           // continuously compounded
};

double normal_cdf(double x);

/// Black-Scholes European call with S = kSpot.
double vanilla_call(double strike_ratio, double tau, double sigma, double rate);

/// Closed-form up-and-out European call under Black-Scholes with continuous
/// monitoring and no rebate (Reiner-Rubinstein / Haug decomposition
/// A - B + C - D with eta = -1, phi = +1). Exactly 0 when the barrier does not
/// exceed the strike. Throws KnockedOut when barrier_ratio <= 1 and Domain on
/// non-finite or non-positive fields.
double barrier_price(const BarrierInputs& inp);

enum class McCorrection {
    /// Exact per-step crossing probability of the log-Brownian bridge; the
    /// estimator is unbiased for continuous monitoring.
    BrownianBridge,
    /// Discrete monitoring against H * exp(-0.5826 sigma sqrt(dt)).
    BarrierShift,
    /// Plain discrete monitoring (biased high).
    None,
};

struct McOptions {
    McCorrection correction = McCorrection::BrownianBridge;
    unsigned threads = 0;
    int block_paths = 8192;
};

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo reference for barrier_price. Paths are split into fixed-size
/// blocks with seeds derived from `seed`; block sums are combined in block
/// order, so the result does not depend on the thread count.
/// Requires n_paths >= 1000 and n_steps >= 100.
McEstimate mc_reference_price(const BarrierInputs& inp, int n_paths, int n_steps, std::uint64_t seed,
                              const McOptions& options = {});

}  // namespace errmax
