#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace errmax {

enum class Activation { Relu, Identity };

/// Dense feed-forward regression network Y: R^d -> R.
///
/// Layer k maps dims[k] -> dims[k+1] through a weight matrix of shape
/// dims[k] x dims[k+1] (so a row-per-sample batch X propagates as X*W + b).
/// Hidden layers use ReLU, the output layer is the identity. Parameters are
/// double precision throughout.
///
/// Every mutable accessor bumps a generation counter; forward traces record
/// it so backprop can reject a trace taken before the parameters changed.
class MlpModel {
public:
    MlpModel() = default;

    /// All-zero parameters. Validates dims (>= 2 entries, all positive, last == 1).
    explicit MlpModel(std::vector<int> layer_dims, std::uint64_t rng_seed = 0);

    [[nodiscard]] const std::vector<int>& layer_dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t num_layers() const noexcept { return weights_.size(); }
    [[nodiscard]] int input_dim() const { return dims_.front(); }
    [[nodiscard]] std::uint64_t rng_seed() const noexcept { return rng_seed_; }
    [[nodiscard]] std::uint64_t generation() const noexcept { return generation_; }
    [[nodiscard]] Activation hidden_activation() const noexcept { return Activation::Relu; }
    [[nodiscard]] Activation output_activation() const noexcept { return Activation::Identity; }

    [[nodiscard]] const Eigen::MatrixXd& weights(std::size_t layer) const { return weights_.at(layer); }
    [[nodiscard]] const Eigen::VectorXd& biases(std::size_t layer) const { return biases_.at(layer); }
    Eigen::MatrixXd& mutable_weights(std::size_t layer);
    Eigen::VectorXd& mutable_biases(std::size_t layer);

    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] bool all_finite() const;

    /// Bitwise parameter and shape equality.
    friend bool operator==(const MlpModel& a, const MlpModel& b);

private:
    std::vector<int> dims_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
    std::uint64_t rng_seed_ = 0;
    std::uint64_t generation_ = 0;
};

/// He-style fan-in scaled uniform init: W ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)),
/// biases zero. Identical dims and seed give bit-identical parameters.
MlpModel init_mlp(const std::vector<int>& layer_dims, std::uint64_t seed);

/// Per-layer pre-activations and activations for one row-per-sample batch.
/// activations[0] is the input batch; activations[k+1] = act(pre[k]).
struct ForwardTrace {
    std::vector<Eigen::MatrixXd> pre_activations;
    std::vector<Eigen::MatrixXd> activations;
    std::uint64_t generation = 0;

    [[nodiscard]] std::size_t num_layers() const noexcept { return pre_activations.size(); }
    [[nodiscard]] Eigen::Index batch_size() const { return activations.front().rows(); }
};

struct ParamGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

double forward(const MlpModel& model, std::span<const double> x);
double forward(const MlpModel& model, const Eigen::VectorXd& x);

/// Batch evaluation; `inputs` holds one sample per row.
Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs);
Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs, ForwardTrace& trace);

/// Gradient of L = sum_i loss_i with respect to every parameter, where
/// upstream[i] = dloss_i / dY(x_i). The trace must come from forward_batch on
/// the same (unmodified) model.
ParamGradients backward_params(const MlpModel& model, const ForwardTrace& trace,
                               const Eigen::VectorXd& upstream);

/// dY/dx by backprop to the inputs. At a ReLU kink (pre-activation exactly 0)
/// the derivative is taken as 0.
Eigen::VectorXd input_gradient(const MlpModel& model, const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
    double initial_lr = 0.01;
    double lr_decay_factor = 10.0;
    int lr_decay_period_epochs = 50;
    int batch_size = 256;
    double stop_tol = 1e-3;
    int stop_window_epochs = 10;
    int max_epochs = 300;
    double momentum = 0.0;

    void validate() const;
};

/// initial_lr / decay_factor^floor(epoch / period)
double learning_rate(const TrainConfig& cfg, int epoch);

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
};

enum class StopReason { Converged, MaxEpochs };

struct TrainResult {
    double initial_loss = 0.0;
    std::vector<EpochRecord> history;
    StopReason stop_reason = StopReason::MaxEpochs;

    [[nodiscard]] int epochs_run() const noexcept { return static_cast<int>(history.size()); }
    [[nodiscard]] double final_loss() const { return history.empty() ? initial_loss : history.back().loss; }
};

/// Non-owning view of labelled samples (one input per row).
struct SampleView {
    const Eigen::MatrixXd& inputs;
    const Eigen::VectorXd& targets;

    [[nodiscard]] Eigen::Index size() const { return targets.size(); }
};

/// alpha * mean_base (Y-z)^2 + (1-alpha) * mean_mined (Y-z)^2. A block with
/// zero weight is never touched (it may be empty).
double weighted_objective(const MlpModel& model, SampleView base, SampleView mined, double alpha);

/// Mini-batch SGD on the alpha-weighted objective. Batches are drawn from the
/// shuffled union of the blocks carrying positive weight; each sample enters
/// the batch loss with weight N/B * w_i (w_i = alpha/|base| or
/// (1-alpha)/|mined|), so the expected batch gradient is the full gradient.
/// With alpha == 1 the mined block is ignored entirely.
///
/// Halts when |L(e) - L(e-window)| / L(e-window) < stop_tol, where L(-1) is
/// the loss before training, or at max_epochs. Throws TrainingDivergedError if
/// the objective or any parameter becomes non-finite.
TrainResult train(MlpModel& model, SampleView base, SampleView mined, double alpha,
                  const TrainConfig& cfg, std::uint64_t seed);

TrainResult train(MlpModel& model, SampleView data, const TrainConfig& cfg, std::uint64_t seed);

}  // namespace errmax
