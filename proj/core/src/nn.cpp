#include "errmax/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "errmax/error.hpp"

namespace errmax {

namespace {

void validate_dims(const std::vector<int>& dims) {
    require(dims.size() >= 2, ErrorKind::InvalidSpec, "layer_dims needs at least 2 entries");
    for (std::size_t k = 0; k < dims.size(); ++k) {
        require(dims[k] > 0, ErrorKind::InvalidSpec,
                "layer_dims[" + std::to_string(k) + "] = " + std::to_string(dims[k]) + " is not positive");
    }
    require(dims.back() == 1, ErrorKind::InvalidSpec, "output dimension must be 1");
}

void check_input(const MlpModel& model, Eigen::Index cols) {
    require(!model.layer_dims().empty(), ErrorKind::Shape, "model has no layers");
    require(cols == model.input_dim(), ErrorKind::Shape,
            "input dimension " + std::to_string(cols) + " != model input dimension " +
                std::to_string(model.input_dim()));
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

// Derivative mask: 1 where pre-activation > 0, else 0 (kink included).
Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& z) {
    return (z.array() > 0.0).cast<double>().matrix();
}

}  // namespace

MlpModel::MlpModel(std::vector<int> layer_dims, std::uint64_t rng_seed)
    : dims_(std::move(layer_dims)), rng_seed_(rng_seed) {
    validate_dims(dims_);
    for (std::size_t k = 0; k + 1 < dims_.size(); ++k) {
        weights_.emplace_back(Eigen::MatrixXd::Zero(dims_[k], dims_[k + 1]));
        biases_.emplace_back(Eigen::VectorXd::Zero(dims_[k + 1]));
    }
}

Eigen::MatrixXd& MlpModel::mutable_weights(std::size_t layer) {
    ++generation_;
    return weights_.at(layer);
}

Eigen::VectorXd& MlpModel::mutable_biases(std::size_t layer) {
    ++generation_;
    return biases_.at(layer);
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        n += static_cast<std::size_t>(weights_[k].size() + biases_[k].size());
    }
    return n;
}

bool MlpModel::all_finite() const {
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        if (!weights_[k].allFinite() || !biases_[k].allFinite()) return false;
    }
    return true;
}

bool operator==(const MlpModel& a, const MlpModel& b) {
    if (a.dims_ != b.dims_ || a.rng_seed_ != b.rng_seed_) return false;
    for (std::size_t k = 0; k < a.weights_.size(); ++k) {
        if (a.weights_[k] != b.weights_[k] || a.biases_[k] != b.biases_[k]) return false;
    }
    return true;
}

MlpModel init_mlp(const std::vector<int>& layer_dims, std::uint64_t seed) {
    MlpModel model(layer_dims, seed);
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        const double limit = std::sqrt(6.0 / layer_dims[k]);
        std::uniform_real_distribution<double> dist(-limit, limit);
        auto& w = model.mutable_weights(k);
        // Column-major fill order is part of the determinism contract.
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
        }
    }
    return model;
}

double forward(const MlpModel& model, std::span<const double> x) {
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    return forward(model, Eigen::VectorXd(v));
}

double forward(const MlpModel& model, const Eigen::VectorXd& x) {
    check_input(model, x.size());
    Eigen::VectorXd h = x;
    const std::size_t last = model.num_layers() - 1;
    for (std::size_t k = 0; k < model.num_layers(); ++k) {
        Eigen::VectorXd z = model.weights(k).transpose() * h + model.biases(k);
        h = (k == last) ? z : Eigen::VectorXd(z.cwiseMax(0.0));
    }
    return h(0);
}

Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    check_input(model, inputs.cols());
    constexpr Eigen::Index kChunk = 4096;
    Eigen::VectorXd out(inputs.rows());
    const std::size_t last = model.num_layers() - 1;
    for (Eigen::Index start = 0; start < inputs.rows(); start += kChunk) {
        const Eigen::Index rows = std::min(kChunk, inputs.rows() - start);
        Eigen::MatrixXd h = inputs.middleRows(start, rows);
        for (std::size_t k = 0; k < model.num_layers(); ++k) {
            Eigen::MatrixXd z = h * model.weights(k);
            z.rowwise() += model.biases(k).transpose();
            h = (k == last) ? std::move(z) : relu(z);
        }
        out.segment(start, rows) = h.col(0);
    }
    return out;
}

Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs, ForwardTrace& trace) {
    check_input(model, inputs.cols());
    const std::size_t layers = model.num_layers();
    trace.pre_activations.resize(layers);
    trace.activations.resize(layers + 1);
    trace.generation = model.generation();
    trace.activations[0] = inputs;
    for (std::size_t k = 0; k < layers; ++k) {
        auto& z = trace.pre_activations[k];
        z.noalias() = trace.activations[k] * model.weights(k);
        z.rowwise() += model.biases(k).transpose();
        trace.activations[k + 1] = (k + 1 == layers) ? z : relu(z);
    }
    return trace.activations.back().col(0);
}

ParamGradients backward_params(const MlpModel& model, const ForwardTrace& trace,
                               const Eigen::VectorXd& upstream) {
    const std::size_t layers = model.num_layers();
    require(trace.generation == model.generation() && trace.num_layers() == layers &&
                trace.activations.size() == layers + 1,
            ErrorKind::Contract, "forward trace is stale or belongs to a different model");
    for (std::size_t k = 0; k < layers; ++k) {
        require(trace.pre_activations[k].cols() == model.layer_dims()[k + 1], ErrorKind::Contract,
                "forward trace layer shapes do not match the model");
    }
    require(upstream.size() == trace.batch_size(), ErrorKind::Shape,
            "upstream size does not match the traced batch");

    ParamGradients grads;
    grads.weights.resize(layers);
    grads.biases.resize(layers);

    Eigen::MatrixXd delta = upstream;  // batch x 1, dL/dz at the output
    for (std::size_t k = layers; k-- > 0;) {
        grads.weights[k].noalias() = trace.activations[k].transpose() * delta;
        grads.biases[k] = delta.colwise().sum().transpose();
        if (k > 0) {
            Eigen::MatrixXd back = delta * model.weights(k).transpose();
            delta = back.cwiseProduct(relu_mask(trace.pre_activations[k - 1]));
        }
    }
    return grads;
}

Eigen::VectorXd input_gradient(const MlpModel& model, const Eigen::VectorXd& x) {
    check_input(model, x.size());
    const std::size_t layers = model.num_layers();
    std::vector<Eigen::VectorXd> pre(layers);
    Eigen::VectorXd h = x;
    for (std::size_t k = 0; k < layers; ++k) {
        pre[k] = model.weights(k).transpose() * h + model.biases(k);
        h = pre[k].cwiseMax(0.0);
    }
    Eigen::VectorXd delta = Eigen::VectorXd::Ones(1);
    for (std::size_t k = layers; k-- > 0;) {
        delta = model.weights(k) * delta;
        if (k > 0) delta = delta.cwiseProduct((pre[k - 1].array() > 0.0).cast<double>().matrix());
    }
    return delta;
}

}  // namespace errmax
