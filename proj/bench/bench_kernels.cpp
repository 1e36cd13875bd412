// Serial reference kernels against their OpenMP counterparts.

#include "bopt/acquisition.hpp"
#include "bopt/parallel_kernels.hpp"
#include "bopt/random.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace bopt;

namespace {

Matrix uniform(Index rows, Index cols, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    }
    return m;
}

GPHyperparameters hyper(Index d) {
    GPHyperparameters h;
    h.lengthscales = Vector::Constant(d, 0.3);
    return h;
}

template <Matrix (*Fn)(KernelKind, const GPHyperparameters&, const Matrix&, const Matrix&)>
void BM_CrossCovariance(benchmark::State& state) {
    const auto n = static_cast<Index>(state.range(0));
    const Matrix a = uniform(n, 6, 1);
    const Matrix b = uniform(n, 6, 2);
    const auto h = hyper(6);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(KernelKind::Matern52, h, a, b));
    state.SetItemsProcessed(state.iterations() * n * n);
}

template <McReduceOutput (*Fn)(const McReduceInput&, bool)>
void BM_McReduce(benchmark::State& state) {
    const auto samples = static_cast<int>(state.range(0));
    const Index q = 4;
    const Vector mean = uniform(q, 1, 3).col(0);
    Matrix lower = Matrix::Zero(q, q);
    lower.triangularView<Eigen::Lower>() = 0.1 * uniform(q, q, 4);
    lower.diagonal().array() += 0.5;
    const Matrix base = draw_base_samples(5, samples, q);
    const McReduceInput in{McReduction::UpperConfidenceBound, &mean, &lower, &base, 0.0, 2.5};
    for (auto _ : state) benchmark::DoNotOptimize(Fn(in, true));
    state.SetItemsProcessed(state.iterations() * samples);
}

template <std::vector<double> (*Fn)(const std::vector<Matrix>&)>
void BM_DesignScores(benchmark::State& state) {
    const auto n = static_cast<Index>(state.range(0));
    std::vector<Matrix> designs;
    for (std::uint64_t k = 0; k < 100; ++k) designs.push_back(uniform(n, 6, 10 + k));
    for (auto _ : state) benchmark::DoNotOptimize(Fn(designs));
    state.SetItemsProcessed(state.iterations() * 100);
}

}  // namespace

BENCHMARK(BM_CrossCovariance<serial::cross_covariance>)->Name("cross_covariance/serial")->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_CrossCovariance<omp::cross_covariance>)->Name("cross_covariance/omp")->Arg(64)->Arg(256)->Arg(1024)->UseRealTime();
BENCHMARK(BM_McReduce<serial::mc_reduce>)->Name("mc_reduce/serial")->Arg(128)->Arg(512)->Arg(32768);
BENCHMARK(BM_McReduce<omp::mc_reduce>)->Name("mc_reduce/omp")->Arg(128)->Arg(512)->Arg(32768)->UseRealTime();
BENCHMARK(BM_DesignScores<serial::design_scores>)->Name("design_scores/serial")->Arg(30)->Arg(100);
BENCHMARK(BM_DesignScores<omp::design_scores>)->Name("design_scores/omp")->Arg(30)->Arg(100)->UseRealTime();

BENCHMARK_MAIN();
