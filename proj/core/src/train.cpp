#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "errmax/error.hpp"
#include "errmax/nn.hpp"

namespace errmax {

namespace {

double mean_squared(const MlpModel& model, SampleView view) {
    const Eigen::VectorXd residual = forward_batch(model, view.inputs) - view.targets;
    return residual.squaredNorm() / static_cast<double>(view.size());
}

void check_view(const MlpModel& model, SampleView view, const char* name) {
    require(view.size() > 0, ErrorKind::Domain, std::string(name) + " block is empty");
    require(view.inputs.rows() == view.size(), ErrorKind::Shape,
            std::string(name) + " inputs and targets differ in length");
    require(view.inputs.cols() == model.input_dim(), ErrorKind::Shape,
            std::string(name) + " input dimension does not match the model");
}

struct PoolEntry {
    const SampleView* block;
    Eigen::Index row;
    double weight;
};

}  // namespace

void TrainConfig::validate() const {
    require(initial_lr > 0.0 && std::isfinite(initial_lr), ErrorKind::InvalidSpec, "initial_lr must be > 0");
    require(lr_decay_factor > 1.0, ErrorKind::InvalidSpec, "lr_decay_factor must be > 1");
    require(lr_decay_period_epochs > 0, ErrorKind::InvalidSpec, "lr_decay_period_epochs must be > 0");
    require(batch_size > 0, ErrorKind::InvalidSpec, "batch_size must be > 0");
    require(stop_tol > 0.0, ErrorKind::InvalidSpec, "stop_tol must be > 0");
    require(stop_window_epochs > 0, ErrorKind::InvalidSpec, "stop_window_epochs must be > 0");
    require(max_epochs > 0, ErrorKind::InvalidSpec, "max_epochs must be > 0");
    require(momentum >= 0.0 && momentum < 1.0, ErrorKind::InvalidSpec, "momentum must be in [0, 1)");
}

double learning_rate(const TrainConfig& cfg, int epoch) {
    const int drops = epoch / cfg.lr_decay_period_epochs;
    return cfg.initial_lr / std::pow(cfg.lr_decay_factor, drops);
}

double weighted_objective(const MlpModel& model, SampleView base, SampleView mined, double alpha) {
    require(alpha >= 0.0 && alpha <= 1.0, ErrorKind::Domain, "alpha must lie in [0, 1]");
    if (alpha == 1.0) return mean_squared(model, base);
    if (alpha == 0.0) return mean_squared(model, mined);
    return alpha * mean_squared(model, base) + (1.0 - alpha) * mean_squared(model, mined);
}

TrainResult train(MlpModel& model, SampleView base, SampleView mined, double alpha,
                  const TrainConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    require(alpha >= 0.0 && alpha <= 1.0, ErrorKind::Domain, "alpha must lie in [0, 1]");
    const bool use_base = alpha > 0.0;
    const bool use_mined = alpha < 1.0;
    if (use_base) check_view(model, base, "base");
    if (use_mined) check_view(model, mined, "mined");

    std::vector<PoolEntry> pool;
    if (use_base) {
        const double w = alpha / static_cast<double>(base.size());
        for (Eigen::Index i = 0; i < base.size(); ++i) pool.push_back({&base, i, w});
    }
    if (use_mined) {
        const double w = (1.0 - alpha) / static_cast<double>(mined.size());
        for (Eigen::Index i = 0; i < mined.size(); ++i) pool.push_back({&mined, i, w});
    }
    const auto n_total = static_cast<double>(pool.size());
    const int d = model.input_dim();

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);

    const std::size_t layers = model.num_layers();
    std::vector<Eigen::MatrixXd> vel_w;
    std::vector<Eigen::VectorXd> vel_b;
    if (cfg.momentum > 0.0) {
        for (std::size_t k = 0; k < layers; ++k) {
            vel_w.emplace_back(Eigen::MatrixXd::Zero(model.weights(k).rows(), model.weights(k).cols()));
            vel_b.emplace_back(Eigen::VectorXd::Zero(model.biases(k).size()));
        }
    }

    TrainResult result;
    result.initial_loss = weighted_objective(model, base, mined, alpha);
    require(std::isfinite(result.initial_loss), ErrorKind::Domain, "initial objective is not finite");

    ForwardTrace trace;
    Eigen::MatrixXd batch_x;
    Eigen::VectorXd batch_z;
    Eigen::VectorXd batch_w;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double lr = learning_rate(cfg, epoch);
        std::shuffle(order.begin(), order.end(), rng);

        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const auto b = static_cast<Eigen::Index>(stop - start);
            batch_x.resize(b, d);
            batch_z.resize(b);
            batch_w.resize(b);
            for (Eigen::Index i = 0; i < b; ++i) {
                const PoolEntry& e = pool[order[start + static_cast<std::size_t>(i)]];
                batch_x.row(i) = e.block->inputs.row(e.row);
                batch_z(i) = e.block->targets(e.row);
                batch_w(i) = e.weight;
            }

            const Eigen::VectorXd y = forward_batch(model, batch_x, trace);
            const double scale = 2.0 * n_total / static_cast<double>(b);
            const Eigen::VectorXd upstream = scale * batch_w.cwiseProduct(y - batch_z);
            const ParamGradients g = backward_params(model, trace, upstream);

            for (std::size_t k = 0; k < layers; ++k) {
                if (cfg.momentum > 0.0) {
                    vel_w[k] = cfg.momentum * vel_w[k] + g.weights[k];
                    vel_b[k] = cfg.momentum * vel_b[k] + g.biases[k];
                    model.mutable_weights(k) -= lr * vel_w[k];
                    model.mutable_biases(k) -= lr * vel_b[k];
                } else {
                    model.mutable_weights(k) -= lr * g.weights[k];
                    model.mutable_biases(k) -= lr * g.biases[k];
                }
            }
        }

        if (!model.all_finite()) throw TrainingDivergedError(epoch, "non-finite parameter");
        const double loss = weighted_objective(model, base, mined, alpha);
        if (!std::isfinite(loss)) throw TrainingDivergedError(epoch, "non-finite training objective");
        result.history.push_back({epoch, lr, loss});

        if (epoch + 1 >= cfg.stop_window_epochs) {
            const int ref_epoch = epoch - cfg.stop_window_epochs;
            const double ref = ref_epoch >= 0 ? result.history[static_cast<std::size_t>(ref_epoch)].loss
                                              : result.initial_loss;
            const bool stalled = ref == 0.0 ? loss == 0.0 : std::abs(loss - ref) / ref < cfg.stop_tol;
            if (stalled) {
                result.stop_reason = StopReason::Converged;
                break;
            }
        }
    }
    return result;
}

TrainResult train(MlpModel& model, SampleView data, const TrainConfig& cfg, std::uint64_t seed) {
    static const Eigen::MatrixXd no_inputs;
    static const Eigen::VectorXd no_targets;
    return train(model, data, SampleView{no_inputs, no_targets}, 1.0, cfg, seed);
}

}  // namespace errmax
