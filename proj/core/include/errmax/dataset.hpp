#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errmax/nn.hpp"
#include "errmax/normalizer.hpp"
#include "errmax/oracle.hpp"

namespace errmax {

/// Where a sample came from: the uniform draw, or ascent round k.
struct Provenance {
    int round = -1;  // -1 = uniform

    static Provenance uniform() { return {}; }
    static Provenance mined(int round) { return {round}; }
    [[nodiscard]] bool is_uniform() const noexcept { return round < 0; }
    [[nodiscard]] std::string str() const;
    static Provenance parse(std::string_view text);

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Inputs in normalised [0,1]^d coordinates (one row per sample) with oracle
/// targets in raw units. `targets` is empty until the set is labelled.
struct LabeledSet {
    std::string name;
    Normalizer normalizer;
    std::vector<std::string> dim_names;
    std::vector<std::string> dim_units;
    std::string target_units;
    Eigen::MatrixXd inputs;
    Eigen::VectorXd targets;
    std::vector<Provenance> provenance;

    [[nodiscard]] std::size_t size() const noexcept { return provenance.size(); }
    [[nodiscard]] bool empty() const noexcept { return provenance.empty(); }
    [[nodiscard]] std::size_t dim() const noexcept { return normalizer.dim(); }
    [[nodiscard]] bool is_labeled() const noexcept {
        return static_cast<std::size_t>(targets.size()) == size();
    }
    [[nodiscard]] Eigen::VectorXd input(std::size_t i) const;
    [[nodiscard]] Eigen::VectorXd raw_input(std::size_t i) const;
    [[nodiscard]] SampleView view() const { return {inputs, targets}; }
};

/// Empty set carrying the oracle's metadata.
LabeledSet empty_set(const OracleSpec& oracle, std::string name);

/// Draws coordinates uniformly on [0,1]^d and keeps those whose
/// denormalisation is valid for the oracle, until n are accepted. Throws
/// SamplingStarvation after 100*n draws.
LabeledSet sample_uniform(const OracleSpec& oracle, std::size_t n, std::uint64_t seed, std::string name = "S0");

/// Fills targets[i] = Z(denormalize(inputs[i])). Throws LabelingError with the
/// sample index if the oracle fails or returns a non-finite value.
LabeledSet label(LabeledSet set, const OracleSpec& oracle, unsigned threads = 0);

/// Concatenation preserving provenance. Throws IncompatibleSets if the
/// normalisers or labelling states differ.
LabeledSet merge(const LabeledSet& a, const LabeledSet& b, std::string name = {});

/// Rows `indices` of `src`, in the given order.
LabeledSet subset(const LabeledSet& src, std::span<const std::size_t> indices, std::string name = {});

/// CSV layout:
///
///   #errmax-labeled-set v1
///   #name=<name>
///   #dim_names=<n0>,<n1>,...
///   #dim_units=<u0>,<u1>,...
///   #target_units=<units>
///   #normalizer lo=<lo0>,... hi=<hi0>,...
///   dim_0,...,dim_{d-1},target,provenance
///   <normalised inputs>,<target>,<uniform|mined-round-k>
///
/// Numbers use 17 significant digits so a save/load round trip is bit-exact.
/// Unlabelled sets leave the target field empty.
void save_csv(const LabeledSet& set, const std::filesystem::path& path);
LabeledSet load_csv(const std::filesystem::path& path);

}  // namespace errmax
