#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "errmax/normalizer.hpp"

namespace errmax {

using RawFunction = std::function<double(std::span<const double>)>;
using RawPredicate = std::function<bool(std::span<const double>)>;
using RawGradient = std::function<Eigen::VectorXd(std::span<const double>)>;

/// The supervising function Z over a raw-unit domain box.
///
/// `valid` is the full admissibility test (box bounds plus `is_valid`);
/// `evaluate` must return a finite value on every valid point.
struct OracleSpec {
    std::string kind;
    std::vector<std::string> dim_names;
    std::vector<std::string> dim_units;
    std::string target_units = "dollars";
    std::vector<Interval> domain;
    RawFunction evaluate;
    RawPredicate is_valid;               // optional extra constraint beyond the box
    RawGradient analytic_gradient;       // synthetic oracles only
    std::vector<Eigen::VectorXd> known_extrema;  // raw coordinates, see make_synthetic_oracle

    [[nodiscard]] std::size_t dim() const noexcept { return domain.size(); }
    [[nodiscard]] Normalizer normalizer() const { return Normalizer(domain); }
    [[nodiscard]] bool in_domain(std::span<const double> x) const;
    [[nodiscard]] bool valid(std::span<const double> x) const;
    [[nodiscard]] bool valid(const Eigen::VectorXd& x) const;
    [[nodiscard]] double operator()(const Eigen::VectorXd& x) const;
};

/// Default "realistic" box for the barrier oracle, in the order
/// (barrier/spot, strike/spot, tau, sigma, rate).
std::vector<Interval> default_barrier_domain();

/// Up-and-out call oracle. Valid points lie in the box and have
/// barrier/spot > 1 and barrier/spot > strike/spot.
OracleSpec make_barrier_oracle(std::vector<Interval> domain = default_barrier_domain());

enum class SyntheticKind { QuadraticBowl, MultimodalSine, Constant };

SyntheticKind parse_synthetic_kind(std::string_view name);

struct SyntheticParams {
    int dim = 2;
    double amplitude = 1.0;                // sine amplitude / bowl curvature scale
    double constant = 0.0;                 // constant oracle value
    std::optional<Eigen::VectorXd> center; // bowl centre, raw units (default: box midpoint)
    std::vector<Interval> domain;          // empty: kind-specific default
};

/// Analytic test oracles.
///
///   quadratic-bowl  Z = amplitude * |x - c|^2, box default [0,1]^d.
///                   known_extrema = {c} (the global minimum of Z).
///   multimodal-sine Z = amplitude * prod_i sin(x_i), box default [0, 3 pi]^d.
///                   Z^2 peaks where every x_i = pi/2 + m pi; known_extrema
///                   lists that grid (spacing pi) inside the box.
///   constant        Z = constant, no extrema.
OracleSpec make_synthetic_oracle(SyntheticKind kind, const SyntheticParams& params = {});
OracleSpec make_synthetic_oracle(std::string_view kind, const SyntheticParams& params = {});

enum class FdScheme { Forward, Central };

struct FdConfig {
    double h = 1e-3;
    FdScheme scheme = FdScheme::Forward;

    void validate() const;
};

/// Finite-difference gradient of Z in normalised coordinates. Forward scheme
/// uses d+1 oracle calls (d if `z_at_x` is supplied), central uses 2d. A probe
/// that leaves [0,1]^d or the valid region is replaced by the opposite
/// one-sided difference; if neither side is admissible, or the oracle fails at
/// a probe, GradientProbeError names the coordinate.
Eigen::VectorXd fd_gradient(const OracleSpec& oracle, const Eigen::VectorXd& x_norm, const FdConfig& fd,
                            const Normalizer& normalizer, std::optional<double> z_at_x = std::nullopt);

}  // namespace errmax
