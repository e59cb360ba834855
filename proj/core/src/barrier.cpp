#include "errmax/barrier.hpp"

#include <cmath>
#include <string>

#include "errmax/error.hpp"

namespace errmax {

namespace {

void check_inputs(const BarrierInputs& inp) {
    const bool finite = std::isfinite(inp.barrier_ratio) && std::isfinite(inp.strike_ratio) &&
                        std::isfinite(inp.tau) && std::isfinite(inp.sigma) && std::isfinite(inp.rate);
    require(finite, ErrorKind::Domain, "barrier inputs must be finite");
    require(inp.tau > 0.0, ErrorKind::Domain, "tau must be > 0");
    require(inp.sigma > 0.0, ErrorKind::Domain, "sigma must be > 0");
    require(inp.strike_ratio > 0.0, ErrorKind::Domain, "strike ratio must be > 0");
    require(inp.barrier_ratio > 0.0, ErrorKind::Domain, "barrier ratio must be > 0");
    require(inp.barrier_ratio > 1.0, ErrorKind::KnockedOut,
            "barrier ratio " + std::to_string(inp.barrier_ratio) + " <= 1: spot is already at or above the barrier");
}

// (H/S)^power * N(arg), with the 0 * inf limit taken as 0.
double reflected(double log_hs, double power, double arg) {
    const double n = normal_cdf(arg);
    if (n == 0.0) return 0.0;
    return std::exp(power * log_hs + std::log(n));
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double vanilla_call(double strike_ratio, double tau, double sigma, double rate) {
    const double s = kSpot;
    const double k = kSpot * strike_ratio;
    const double v = sigma * std::sqrt(tau);
    const double d1 = (std::log(s / k) + rate * tau) / v + 0.5 * v;
    return s * normal_cdf(d1) - k * std::exp(-rate * tau) * normal_cdf(d1 - v);
}

double barrier_price(const BarrierInputs& inp) {
    check_inputs(inp);
    if (inp.barrier_ratio <= inp.strike_ratio) return 0.0;

    const double s = kSpot;
    const double k = kSpot * inp.strike_ratio;
    const double h = kSpot * inp.barrier_ratio;
    const double v = inp.sigma * std::sqrt(inp.tau);
    const double mu = (inp.rate - 0.5 * inp.sigma * inp.sigma) / (inp.sigma * inp.sigma);
    const double shift = (1.0 + mu) * v;
    const double df = std::exp(-inp.rate * inp.tau);
    const double log_hs = std::log(h / s);

    const double x1 = std::log(s / k) / v + shift;
    const double x2 = std::log(s / h) / v + shift;
    const double y1 = std::log(h * h / (s * k)) / v + shift;
    const double y2 = log_hs / v + shift;

    const double a = s * normal_cdf(x1) - k * df * normal_cdf(x1 - v);
    const double b = s * normal_cdf(x2) - k * df * normal_cdf(x2 - v);
    const double c = s * reflected(log_hs, 2.0 * mu + 2.0, -y1) - k * df * reflected(log_hs, 2.0 * mu, -(y1 - v));
    const double d = s * reflected(log_hs, 2.0 * mu + 2.0, -y2) - k * df * reflected(log_hs, 2.0 * mu, -(y2 - v));

    const double price = a - b + c - d;
    return price > 0.0 ? price : 0.0;
}

}  // namespace errmax
