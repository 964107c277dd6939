#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "mlz/model.hpp"
#include "mlz/propagator.hpp"
#include "mlz/series.hpp"
#include "mlz/specfun.hpp"
#include "mlz/wengine.hpp"

namespace {

mlz::Model fig2_model() {
    Eigen::MatrixXd a(3, 3);
    a << 0, 1.0, 1.5, 1.0, 0, 1.8, 1.5, 1.8, 0;
    return mlz::Model({2.0, 0.0, -1.0}, a, 1.0, "fig2");
}

mlz::LambdaMatrix random_lambda(int n) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    mlz::LambdaMatrix lm;
    lm.n = n;
    lm.values = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k)
            lm.values(j, k) = lm.values(k, j) = d(rng);
    return lm;
}

void FresnelEval(benchmark::State& state) {
    double x = 0.0;
    for (auto _ : state) {
        x += 0.37;
        if (x > 20.0) x -= 20.0;
        benchmark::DoNotOptimize(mlz::fresnel_cs(x));
    }
}
BENCHMARK(FresnelEval);

void SeriesMatrix(benchmark::State& state) {
    const mlz::LambdaMatrix lam = random_lambda(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(mlz::series_matrix(lam));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(SeriesMatrix)->DenseRange(2, 6)->Complexity();

void QClosedForm(benchmark::State& state) {
    const mlz::QTriple t(-1.0, 3.0, 2.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mlz::q_closed_form(t));
    }
}
BENCHMARK(QClosedForm);

void QQuadrature(benchmark::State& state) {
    const mlz::QTriple t(-1.0, 3.0, 2.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mlz::q_quadrature(t, 1e-6));
    }
}
BENCHMARK(QQuadrature)->Unit(benchmark::kMillisecond);

void PropagateFig2(benchmark::State& state) {
    const mlz::Model m = fig2_model();
    const double t_final = static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(mlz::propagate(m, 0.3, t_final, 1e-8));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(PropagateFig2)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void W3Finite(benchmark::State& state) {
    const mlz::Model m = fig2_model();
    for (auto _ : state) {
        benchmark::DoNotOptimize(mlz::w_n_finite(m, 3, 10.0, 1e-8));
    }
}
BENCHMARK(W3Finite)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
