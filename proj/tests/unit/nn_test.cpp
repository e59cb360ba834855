#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "errmax/nn.hpp"
#include "test_support.hpp"

namespace errmax {
namespace {

using testing::expect_error;
using testing::random_model;
using testing::rel_err;

// Plain loops over the documented layout, independent of the Eigen batch path.
double reference_forward(const MlpModel& m, const std::vector<double>& x) {
    std::vector<double> a = x;
    for (std::size_t k = 0; k < m.num_layers(); ++k) {
        const auto& w = m.weights(k);
        std::vector<double> z(static_cast<std::size_t>(w.cols()));
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            double s = m.biases(k)(j);
            for (Eigen::Index i = 0; i < w.rows(); ++i) s += a[static_cast<std::size_t>(i)] * w(i, j);
            z[static_cast<std::size_t>(j)] = (k + 1 < m.num_layers()) ? std::max(0.0, s) : s;
        }
        a = z;
    }
    return a[0];
}

TEST(MlpModel, RejectsBadDims) {
    expect_error(ErrorKind::InvalidSpec, [] { MlpModel({5}); });
    expect_error(ErrorKind::InvalidSpec, [] { MlpModel({5, 0, 1}); });
    expect_error(ErrorKind::InvalidSpec, [] { MlpModel({5, 4, 2}); });
}

TEST(MlpModel, ShapesAndParameterCount) {
    const MlpModel m({5, 8, 3, 1});
    EXPECT_EQ(m.num_layers(), 3u);
    EXPECT_EQ(m.weights(0).rows(), 5);
    EXPECT_EQ(m.weights(0).cols(), 8);
    EXPECT_EQ(m.biases(1).size(), 3);
    EXPECT_EQ(m.parameter_count(), 5u * 8 + 8 + 8 * 3 + 3 + 3 + 1);
}

TEST(MlpModel, MutableAccessBumpsGeneration) {
    MlpModel m({2, 1});
    const auto g0 = m.generation();
    m.mutable_weights(0)(0, 0) = 1.0;
    EXPECT_GT(m.generation(), g0);
    const auto g1 = m.generation();
    m.mutable_biases(0)(0) = 1.0;
    EXPECT_GT(m.generation(), g1);
}

TEST(InitMlp, DeterministicAndBounded) {
    const std::vector<int> dims{5, 16, 16, 1};
    const MlpModel a = init_mlp(dims, 7);
    const MlpModel b = init_mlp(dims, 7);
    const MlpModel c = init_mlp(dims, 8);
    EXPECT_TRUE(a == b);
    EXPECT_FALSE(a == c);
    for (std::size_t k = 0; k < a.num_layers(); ++k) {
        const double bound = std::sqrt(6.0 / dims[k]);
        EXPECT_LE(a.weights(k).cwiseAbs().maxCoeff(), bound);
        EXPECT_EQ(a.biases(k).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Forward, HandComputedTwoLayerNetwork) {
    MlpModel m({2, 2, 1});
    m.mutable_weights(0) << 1.0, -1.0, 2.0, 0.5;
    m.mutable_biases(0) << 0.0, -1.0;
    m.mutable_weights(1) << 3.0, 7.0;
    m.mutable_biases(1) << 0.5;
    // pre = [1*1 + 2*2, 1*(-1) + 2*0.5 - 1] = [5, -1]; relu -> [5, 0]; 3*5 + 0.5
    EXPECT_DOUBLE_EQ(forward(m, Eigen::Vector2d(1.0, 2.0)), 15.5);
}

TEST(Forward, MatchesReferenceLoopsAndBatch) {
    const MlpModel m = random_model({4, 9, 7, 1}, 11);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd x(20, 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
    const Eigen::VectorXd y = forward_batch(m, x);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const Eigen::VectorXd row = x.row(r).transpose();
        const std::vector<double> v(row.data(), row.data() + row.size());
        EXPECT_LT(rel_err(y(r), reference_forward(m, v)), 1e-12);
        EXPECT_LT(rel_err(forward(m, row), y(r)), 1e-12);
    }
}

TEST(Forward, LargeBatchIsChunkedConsistently) {
    const MlpModel m = random_model({3, 6, 1}, 5);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd x(9000, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
    const Eigen::VectorXd y = forward_batch(m, x);
    ASSERT_EQ(y.size(), 9000);
    for (Eigen::Index r : {0, 4095, 4096, 8191, 8192, 8999}) {
        EXPECT_LT(rel_err(y(r), forward(m, Eigen::VectorXd(x.row(r).transpose()))), 1e-12);
    }
}

TEST(Forward, ShapeMismatchThrows) {
    const MlpModel m({3, 1});
    expect_error(ErrorKind::Shape, [&] { (void)forward(m, Eigen::VectorXd::Zero(2)); });
    expect_error(ErrorKind::Shape, [&] { (void)forward_batch(m, Eigen::MatrixXd::Zero(4, 5)); });
}

TEST(Backward, SingleLinearUnitByHand) {
    MlpModel m({1, 1});
    m.mutable_weights(0)(0, 0) = 2.0;
    m.mutable_biases(0)(0) = 1.0;
    ForwardTrace trace;
    const Eigen::VectorXd y = forward_batch(m, Eigen::MatrixXd::Constant(1, 1, 1.0), trace);
    ASSERT_DOUBLE_EQ(y(0), 3.0);
    // L = (Y - 1)^2, dL/dY = 2 * (3 - 1) = 4, dL/dw = 4 * x = 4, dL/db = 4
    const ParamGradients g = backward_params(m, trace, Eigen::VectorXd::Constant(1, 4.0));
    EXPECT_DOUBLE_EQ(g.weights[0](0, 0), 4.0);
    EXPECT_DOUBLE_EQ(g.biases[0](0), 4.0);
}

TEST(Backward, StaleTraceIsRejected) {
    MlpModel m = random_model({2, 3, 1}, 1);
    ForwardTrace trace;
    (void)forward_batch(m, Eigen::MatrixXd::Ones(2, 2), trace);
    m.mutable_biases(0)(0) += 1.0;
    expect_error(ErrorKind::Contract, [&] { (void)backward_params(m, trace, Eigen::VectorXd::Ones(2)); });
}

TEST(Backward, UpstreamSizeMismatchThrows) {
    const MlpModel m = random_model({2, 3, 1}, 1);
    ForwardTrace trace;
    (void)forward_batch(m, Eigen::MatrixXd::Ones(2, 2), trace);
    expect_error(ErrorKind::Shape, [&] { (void)backward_params(m, trace, Eigen::VectorXd::Ones(3)); });
}

TEST(Backward, MatchesCentralDifferences) {
    const MlpModel base = random_model({3, 5, 4, 1}, 21);
    Eigen::MatrixXd x(4, 3);
    x << 0.1, -0.3, 0.7, 0.9, 0.2, -0.5, -0.4, 0.8, 0.3, 0.6, -0.1, 0.05;
    const Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(4, -1.0, 1.0);
    auto loss = [&](const MlpModel& m) { return (forward_batch(m, x) - z).squaredNorm(); };

    ForwardTrace trace;
    const Eigen::VectorXd y = forward_batch(base, x, trace);
    const ParamGradients g = backward_params(base, trace, 2.0 * (y - z));
    const double h = 1e-5;
    for (std::size_t k = 0; k < base.num_layers(); ++k) {
        for (Eigen::Index i = 0; i < base.weights(k).size(); ++i) {
            MlpModel p = base, q = base;
            p.mutable_weights(k).data()[i] += h;
            q.mutable_weights(k).data()[i] -= h;
            const double fd = (loss(p) - loss(q)) / (2 * h);
            EXPECT_LT(rel_err(g.weights[k].data()[i], fd), 1e-4) << "layer " << k << " weight " << i;
        }
        for (Eigen::Index i = 0; i < base.biases(k).size(); ++i) {
            MlpModel p = base, q = base;
            p.mutable_biases(k)(i) += h;
            q.mutable_biases(k)(i) -= h;
            const double fd = (loss(p) - loss(q)) / (2 * h);
            EXPECT_LT(rel_err(g.biases[k](i), fd), 1e-4) << "layer " << k << " bias " << i;
        }
    }
}

TEST(InputGradient, MatchesCentralDifferences) {
    const MlpModel m = random_model({4, 8, 6, 1}, 33);
    const Eigen::Vector4d x(0.2, -0.4, 0.9, 0.1);
    const Eigen::VectorXd g = input_gradient(m, x);
    ASSERT_EQ(g.size(), 4);
    const double h = 1e-5;
    for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd p = x, q = x;
        p(i) += h;
        q(i) -= h;
        EXPECT_LT(rel_err(g(i), (forward(m, p) - forward(m, q)) / (2 * h)), 1e-4);
    }
}

TEST(InputGradient, LinearModelIsItsWeights) {
    MlpModel m({3, 1});
    m.mutable_weights(0) << 1.5, -2.0, 0.25;
    const Eigen::VectorXd g = input_gradient(m, Eigen::Vector3d(9.0, 9.0, 9.0));
    EXPECT_DOUBLE_EQ(g(0), 1.5);
    EXPECT_DOUBLE_EQ(g(1), -2.0);
    EXPECT_DOUBLE_EQ(g(2), 0.25);
}

TEST(InputGradient, ReluKinkHasZeroDerivative) {
    // One hidden unit with pre-activation exactly 0 at x = 1.
    MlpModel m({1, 1, 1});
    m.mutable_weights(0)(0, 0) = 1.0;
    m.mutable_biases(0)(0) = -1.0;
    m.mutable_weights(1)(0, 0) = 3.0;
    EXPECT_EQ(input_gradient(m, Eigen::VectorXd::Constant(1, 1.0))(0), 0.0);
    EXPECT_EQ(input_gradient(m, Eigen::VectorXd::Constant(1, 1.5))(0), 3.0);
}

}  // namespace
}  // namespace errmax
