#include "errmax/oracle.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "errmax/barrier.hpp"
#include "errmax/error.hpp"

namespace errmax {

bool OracleSpec::in_domain(std::span<const double> x) const {
    if (x.size() != domain.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        // Tolerate the last-ulp drift of a normalise/denormalise round trip.
        const double slack = 1e-12 * domain[i].width();
        if (!std::isfinite(x[i]) || x[i] < domain[i].lo - slack || x[i] > domain[i].hi + slack) return false;
    }
    return true;
}

bool OracleSpec::valid(std::span<const double> x) const {
    return in_domain(x) && (!is_valid || is_valid(x));
}

bool OracleSpec::valid(const Eigen::VectorXd& x) const {
    return valid(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

double OracleSpec::operator()(const Eigen::VectorXd& x) const {
    return evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

std::vector<Interval> default_barrier_domain() {
    return {{1.01, 2.0}, {0.5, 1.5}, {0.05, 2.0}, {0.05, 0.6}, {0.0, 0.1}};
}

OracleSpec make_barrier_oracle(std::vector<Interval> domain) {
    require(domain.size() == 5, ErrorKind::InvalidSpec, "barrier oracle domain needs 5 intervals");
    for (const auto& iv : domain) {
        require(iv.hi > iv.lo, ErrorKind::InvalidSpec, "barrier oracle interval must have hi > lo");
    }
    require(domain[2].lo > 0.0 && domain[3].lo > 0.0 && domain[1].lo > 0.0, ErrorKind::InvalidSpec,
            "tau, sigma and strike ratio intervals must be strictly positive");

    OracleSpec spec;
    spec.kind = "barrier";
    spec.dim_names = {"barrier_over_spot", "strike_over_spot", "tau", "sigma", "rate"};
    spec.dim_units = {"ratio", "ratio", "years", "per_sqrt_year", "per_year"};
    spec.target_units = "dollars";
    spec.domain = std::move(domain);
    spec.is_valid = [](std::span<const double> x) { return x[0] > 1.0 && x[0] > x[1]; };
    spec.evaluate = [](std::span<const double> x) {
        return barrier_price({x[0], x[1], x[2], x[3], x[4]});
    };
    return spec;
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
    if (name == "quadratic-bowl") return SyntheticKind::QuadraticBowl;
    if (name == "multimodal-sine") return SyntheticKind::MultimodalSine;
    if (name == "constant") return SyntheticKind::Constant;
    fail(ErrorKind::InvalidSpec, "unknown synthetic oracle kind '" + std::string(name) + "'");
}

OracleSpec make_synthetic_oracle(std::string_view kind, const SyntheticParams& params) {
    return make_synthetic_oracle(parse_synthetic_kind(kind), params);
}

OracleSpec make_synthetic_oracle(SyntheticKind kind, const SyntheticParams& params) {
    require(params.dim >= 1, ErrorKind::InvalidSpec, "synthetic oracle dimension must be >= 1");
    const auto d = static_cast<std::size_t>(params.dim);

    OracleSpec spec;
    spec.target_units = "units";
    for (std::size_t i = 0; i < d; ++i) {
        spec.dim_names.push_back("x" + std::to_string(i));
        spec.dim_units.push_back("units");
    }
    if (!params.domain.empty()) {
        require(params.domain.size() == d, ErrorKind::InvalidSpec, "synthetic domain size != dim");
        for (const auto& iv : params.domain) {
            require(iv.hi > iv.lo, ErrorKind::InvalidSpec, "synthetic interval must have hi > lo");
        }
        spec.domain = params.domain;
    }

    const double amp = params.amplitude;
    switch (kind) {
        case SyntheticKind::QuadraticBowl: {
            spec.kind = "quadratic-bowl";
            if (spec.domain.empty()) spec.domain.assign(d, Interval{0.0, 1.0});
            Eigen::VectorXd c(static_cast<Eigen::Index>(d));
            if (params.center) {
                require(params.center->size() == static_cast<Eigen::Index>(d), ErrorKind::InvalidSpec,
                        "bowl centre dimension != dim");
                c = *params.center;
            } else {
                for (std::size_t i = 0; i < d; ++i) c(static_cast<Eigen::Index>(i)) = 0.5 * (spec.domain[i].lo + spec.domain[i].hi);
            }
            spec.evaluate = [c, amp](std::span<const double> x) {
                double s = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double t = x[i] - c(static_cast<Eigen::Index>(i));
                    s += t * t;
                }
                return amp * s;
            };
            spec.analytic_gradient = [c, amp](std::span<const double> x) {
                Eigen::VectorXd g(static_cast<Eigen::Index>(x.size()));
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const auto j = static_cast<Eigen::Index>(i);
                    g(j) = 2.0 * amp * (x[i] - c(j));
                }
                return g;
            };
            spec.known_extrema.push_back(c);
            break;
        }
        case SyntheticKind::MultimodalSine: {
            spec.kind = "multimodal-sine";
            if (spec.domain.empty()) spec.domain.assign(d, Interval{0.0, 3.0 * std::numbers::pi});
            spec.evaluate = [amp](std::span<const double> x) {
                double p = amp;
                for (double v : x) p *= std::sin(v);
                return p;
            };
            spec.analytic_gradient = [amp](std::span<const double> x) {
                Eigen::VectorXd g(static_cast<Eigen::Index>(x.size()));
                for (std::size_t i = 0; i < x.size(); ++i) {
                    double p = amp * std::cos(x[i]);
                    for (std::size_t j = 0; j < x.size(); ++j) {
                        if (j != i) p *= std::sin(x[j]);
                    }
                    g(static_cast<Eigen::Index>(i)) = p;
                }
                return g;
            };
            // Peaks of Z^2: every coordinate at pi/2 + m*pi.
            std::vector<std::vector<double>> axis(d);
            for (std::size_t i = 0; i < d; ++i) {
                const double first = std::ceil((spec.domain[i].lo - std::numbers::pi / 2) / std::numbers::pi);
                for (double m = first;; m += 1.0) {
                    const double v = std::numbers::pi / 2 + m * std::numbers::pi;
                    if (v > spec.domain[i].hi) break;
                    axis[i].push_back(v);
                }
            }
            std::vector<std::size_t> idx(d, 0);
            bool any = true;
            for (const auto& a : axis) any = any && !a.empty();
            while (any) {
                Eigen::VectorXd p(static_cast<Eigen::Index>(d));
                for (std::size_t i = 0; i < d; ++i) p(static_cast<Eigen::Index>(i)) = axis[i][idx[i]];
                spec.known_extrema.push_back(p);
                std::size_t i = 0;
                while (i < d && ++idx[i] == axis[i].size()) idx[i++] = 0;
                if (i == d) break;
            }
            break;
        }
        case SyntheticKind::Constant: {
            spec.kind = "constant";
            if (spec.domain.empty()) spec.domain.assign(d, Interval{0.0, 1.0});
            const double value = params.constant;
            spec.evaluate = [value](std::span<const double>) { return value; };
            spec.analytic_gradient = [](std::span<const double> x) {
                return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.size())).eval();
            };
            break;
        }
    }
    return spec;
}

void FdConfig::validate() const {
    require(h > 0.0 && h < 0.5 && std::isfinite(h), ErrorKind::InvalidSpec,
            "finite-difference step must lie in (0, 0.5) in normalised coordinates");
}

namespace {

bool probe_ok(const OracleSpec& oracle, const Normalizer& normalizer, const Eigen::VectorXd& probe) {
    if ((probe.array() < 0.0).any() || (probe.array() > 1.0).any()) return false;
    return oracle.valid(normalizer.denormalize(probe));
}

double probe_value(const OracleSpec& oracle, const Normalizer& normalizer, const Eigen::VectorXd& probe,
                   std::size_t coord) {
    double z = 0.0;
    try {
        z = oracle(normalizer.denormalize(probe));
    } catch (const std::exception& e) {
        throw GradientProbeError(coord, std::string("oracle failed at probe: ") + e.what());
    }
    if (!std::isfinite(z)) throw GradientProbeError(coord, "oracle returned a non-finite value at probe");
    return z;
}

}  // namespace

Eigen::VectorXd fd_gradient(const OracleSpec& oracle, const Eigen::VectorXd& x_norm, const FdConfig& fd,
                            const Normalizer& normalizer, std::optional<double> z_at_x) {
    fd.validate();
    require(x_norm.size() == static_cast<Eigen::Index>(oracle.dim()) &&
                normalizer.dim() == oracle.dim(),
            ErrorKind::Shape, "fd_gradient dimension mismatch");

    const std::size_t d = oracle.dim();
    Eigen::VectorXd grad(static_cast<Eigen::Index>(d));
    auto centre = [&](std::size_t coord) {
        if (!z_at_x) z_at_x = probe_value(oracle, normalizer, x_norm, coord);
        return *z_at_x;
    };

    for (std::size_t i = 0; i < d; ++i) {
        const auto j = static_cast<Eigen::Index>(i);
        Eigen::VectorXd up = x_norm;
        Eigen::VectorXd down = x_norm;
        up(j) += fd.h;
        down(j) -= fd.h;
        const bool up_ok = probe_ok(oracle, normalizer, up);
        const bool down_ok = probe_ok(oracle, normalizer, down);

        if (fd.scheme == FdScheme::Central && up_ok && down_ok) {
            grad(j) = (probe_value(oracle, normalizer, up, i) - probe_value(oracle, normalizer, down, i)) / (2.0 * fd.h);
        } else if (up_ok && (fd.scheme == FdScheme::Forward || !down_ok)) {
            grad(j) = (probe_value(oracle, normalizer, up, i) - centre(i)) / fd.h;
        } else if (down_ok) {
            grad(j) = (centre(i) - probe_value(oracle, normalizer, down, i)) / fd.h;
        } else {
            throw GradientProbeError(i, "no admissible finite-difference probe on either side");
        }
    }
    return grad;
}

}  // namespace errmax
