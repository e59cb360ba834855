#pragma once

#include <vector>

#include <Eigen/Dense>

namespace errmax {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    [[nodiscard]] double width() const noexcept { return hi - lo; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Per-dimension affine map raw -> (raw - lo) / (hi - lo), so the domain box
/// maps onto [0,1]^d.
class Normalizer {
public:
    Normalizer() = default;
    explicit Normalizer(std::vector<Interval> bounds);

    [[nodiscard]] std::size_t dim() const noexcept { return bounds_.size(); }
    [[nodiscard]] const std::vector<Interval>& bounds() const noexcept { return bounds_; }

    [[nodiscard]] Eigen::VectorXd normalize(const Eigen::VectorXd& raw) const;
    [[nodiscard]] Eigen::VectorXd denormalize(const Eigen::VectorXd& norm) const;

    friend bool operator==(const Normalizer&, const Normalizer&) = default;

private:
    std::vector<Interval> bounds_;
};

}  // namespace errmax
