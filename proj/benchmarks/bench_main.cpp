#include <benchmark/benchmark.h>

#include "errmax/active_loop.hpp"
#include "errmax/barrier.hpp"
#include "errmax/dataset.hpp"
#include "errmax/miner.hpp"
#include "errmax/nn.hpp"
#include "errmax/oracle.hpp"

namespace {

using namespace errmax;

MlpModel five_layer_net(int width) { return init_mlp({5, width, width, width, width, width, 1}, 1); }

void BM_ForwardSingle(benchmark::State& state) {
    const MlpModel m = five_layer_net(static_cast<int>(state.range(0)));
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(5, 0.4);
    for (auto _ : state) benchmark::DoNotOptimize(forward(m, x));
}
BENCHMARK(BM_ForwardSingle)->Arg(128)->Arg(512);

void BM_ForwardBatch(benchmark::State& state) {
    const MlpModel m = five_layer_net(128);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(state.range(0), 5, 0.4);
    for (auto _ : state) benchmark::DoNotOptimize(forward_batch(m, x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBatch)->Arg(256)->Arg(4096);

void BM_InputGradient(benchmark::State& state) {
    const MlpModel m = five_layer_net(static_cast<int>(state.range(0)));
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(5, 0.4);
    for (auto _ : state) benchmark::DoNotOptimize(input_gradient(m, x));
}
BENCHMARK(BM_InputGradient)->Arg(128)->Arg(512);

void BM_BarrierPrice(benchmark::State& state) {
    const BarrierInputs p{1.3, 0.95, 0.5, 0.3, 0.03};
    for (auto _ : state) benchmark::DoNotOptimize(barrier_price(p));
}
BENCHMARK(BM_BarrierPrice);

void BM_FdGradient(benchmark::State& state) {
    const OracleSpec z = make_barrier_oracle();
    const Normalizer n = z.normalizer();
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(5, 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(fd_gradient(z, x, FdConfig{}, n));
}
BENCHMARK(BM_FdGradient);

void BM_Ascend(benchmark::State& state) {
    const OracleSpec z = make_barrier_oracle();
    const MlpModel m = five_layer_net(128);
    const Eigen::VectorXd seed = Eigen::VectorXd::Constant(5, 0.5);
    AscentConfig cfg;
    cfg.max_iters = 50;
    for (auto _ : state) benchmark::DoNotOptimize(ascend(m, z, seed, cfg, FdConfig{}));
}
BENCHMARK(BM_Ascend);

void BM_TrainEpoch(benchmark::State& state) {
    const OracleSpec z = make_barrier_oracle();
    const LabeledSet s = label(sample_uniform(z, 2000, 3), z, 1);
    TrainConfig cfg;
    cfg.max_epochs = 1;
    cfg.initial_lr = 0.003;
    for (auto _ : state) {
        MlpModel m = five_layer_net(128);
        benchmark::DoNotOptimize(train(m, s.view(), cfg, 1));
    }
    state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
