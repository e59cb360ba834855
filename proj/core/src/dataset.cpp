#include "errmax/dataset.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <string>

#include "errmax/error.hpp"
#include "errmax/parallel.hpp"

namespace errmax {

Normalizer::Normalizer(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
        require(std::isfinite(bounds_[i].lo) && std::isfinite(bounds_[i].hi) && bounds_[i].hi > bounds_[i].lo,
                ErrorKind::InvalidSpec, "normalizer bound " + std::to_string(i) + " needs finite hi > lo");
    }
}

Eigen::VectorXd Normalizer::normalize(const Eigen::VectorXd& raw) const {
    require(raw.size() == static_cast<Eigen::Index>(dim()), ErrorKind::Shape, "normalize: dimension mismatch");
    Eigen::VectorXd out(raw.size());
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        const auto& b = bounds_[static_cast<std::size_t>(i)];
        out(i) = (raw(i) - b.lo) / b.width();
    }
    return out;
}

Eigen::VectorXd Normalizer::denormalize(const Eigen::VectorXd& norm) const {
    require(norm.size() == static_cast<Eigen::Index>(dim()), ErrorKind::Shape, "denormalize: dimension mismatch");
    Eigen::VectorXd out(norm.size());
    for (Eigen::Index i = 0; i < norm.size(); ++i) {
        const auto& b = bounds_[static_cast<std::size_t>(i)];
        out(i) = b.lo + norm(i) * b.width();
    }
    return out;
}

std::string Provenance::str() const {
    return is_uniform() ? std::string("uniform") : "mined-round-" + std::to_string(round);
}

Provenance Provenance::parse(std::string_view text) {
    if (text == "uniform") return uniform();
    constexpr std::string_view prefix = "mined-round-";
    if (text.starts_with(prefix)) {
        int k = -1;
        const auto digits = text.substr(prefix.size());
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec == std::errc{} && ptr == digits.data() + digits.size() && k >= 0) return mined(k);
    }
    fail(ErrorKind::Parse, "unknown provenance tag '" + std::string(text) + "'");
}

Eigen::VectorXd LabeledSet::input(std::size_t i) const {
    return inputs.row(static_cast<Eigen::Index>(i)).transpose();
}

Eigen::VectorXd LabeledSet::raw_input(std::size_t i) const { return normalizer.denormalize(input(i)); }

LabeledSet empty_set(const OracleSpec& oracle, std::string name) {
    LabeledSet set;
    set.name = std::move(name);
    set.normalizer = oracle.normalizer();
    set.dim_names = oracle.dim_names;
    set.dim_units = oracle.dim_units;
    set.target_units = oracle.target_units;
    set.inputs.resize(0, static_cast<Eigen::Index>(oracle.dim()));
    return set;
}

LabeledSet sample_uniform(const OracleSpec& oracle, std::size_t n, std::uint64_t seed, std::string name) {
    require(n >= 1, ErrorKind::Domain, "sample_uniform needs n >= 1");
    LabeledSet set = empty_set(oracle, std::move(name));
    const auto d = static_cast<Eigen::Index>(oracle.dim());
    set.inputs.resize(static_cast<Eigen::Index>(n), d);
    set.provenance.assign(n, Provenance::uniform());

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t budget = 100 * n;
    std::size_t accepted = 0;
    Eigen::VectorXd u(d);
    for (std::size_t draws = 0; accepted < n; ++draws) {
        if (draws >= budget) {
            fail(ErrorKind::SamplingStarvation, "accepted " + std::to_string(accepted) + " of " +
                                                    std::to_string(n) + " samples in " + std::to_string(budget) +
                                                    " draws");
        }
        for (Eigen::Index j = 0; j < d; ++j) u(j) = unit(rng);
        if (oracle.valid(set.normalizer.denormalize(u))) {
            set.inputs.row(static_cast<Eigen::Index>(accepted++)) = u.transpose();
        }
    }
    return set;
}

LabeledSet label(LabeledSet set, const OracleSpec& oracle, unsigned threads) {
    require(set.dim() == oracle.dim(), ErrorKind::Shape, "set and oracle dimensions differ");
    set.targets.resize(static_cast<Eigen::Index>(set.size()));
    parallel_for(set.size(), threads, [&](std::size_t i) {
        double z = 0.0;
        try {
            z = oracle(set.raw_input(i));
        } catch (const std::exception& e) {
            throw LabelingError(i, e.what());
        }
        if (!std::isfinite(z)) throw LabelingError(i, "oracle returned a non-finite target");
        set.targets(static_cast<Eigen::Index>(i)) = z;
    });
    return set;
}

LabeledSet merge(const LabeledSet& a, const LabeledSet& b, std::string name) {
    require(a.normalizer == b.normalizer, ErrorKind::IncompatibleSets,
            "cannot merge '" + a.name + "' and '" + b.name + "': normalizers differ");
    require(a.is_labeled() == b.is_labeled(), ErrorKind::IncompatibleSets,
            "cannot merge a labelled set with an unlabelled one");
    LabeledSet out = a;
    if (!name.empty()) out.name = std::move(name);
    const auto na = static_cast<Eigen::Index>(a.size());
    const auto nb = static_cast<Eigen::Index>(b.size());
    out.inputs.conservativeResize(na + nb, static_cast<Eigen::Index>(a.dim()));
    if (nb > 0) out.inputs.bottomRows(nb) = b.inputs;
    if (a.is_labeled()) {
        out.targets.conservativeResize(na + nb);
        if (nb > 0) out.targets.tail(nb) = b.targets;
    }
    out.provenance.insert(out.provenance.end(), b.provenance.begin(), b.provenance.end());
    return out;
}

LabeledSet subset(const LabeledSet& src, std::span<const std::size_t> indices, std::string name) {
    LabeledSet out = src;
    if (!name.empty()) out.name = std::move(name);
    const auto n = static_cast<Eigen::Index>(indices.size());
    out.inputs.resize(n, static_cast<Eigen::Index>(src.dim()));
    out.provenance.resize(indices.size());
    if (src.is_labeled()) out.targets.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::size_t i = indices[static_cast<std::size_t>(r)];
        require(i < src.size(), ErrorKind::Shape, "subset index out of range");
        out.inputs.row(r) = src.inputs.row(static_cast<Eigen::Index>(i));
        if (src.is_labeled()) out.targets(r) = src.targets(static_cast<Eigen::Index>(i));
        out.provenance[static_cast<std::size_t>(r)] = src.provenance[i];
    }
    return out;
}

}  // namespace errmax
