#include <benchmark/benchmark.h>

#include <vector>

#include "fraclap/fast_operator.hpp"
#include "fraclap/mesh.hpp"
#include "fraclap/soe.hpp"
#include "fraclap/solver.hpp"
#include "fraclap/study.hpp"

using namespace fraclap;

namespace {

std::vector<double> ramp(int n) {
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<size_t>(i)] = 0.25 + 0.5 * (i % 7);
    }
    return v;
}

void BM_ApplyFast(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const GradedMesh mesh = build_graded_mesh(0.0, 2.0, n, 1.0);
    const SoeApproximation soe = build_soe(1.5, 1e-6, mesh.h_min(), 2.0);
    const FastOperator op(mesh, 0.5, Scheme::original, soe);
    const std::vector<double> v = ramp(n - 1);
    std::vector<double> out(static_cast<size_t>(n - 1));
    for (auto _ : state) {
        op.apply(v, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_ApplyFast)->RangeMultiplier(2)->Range(1 << 10, 1 << 17)->Complexity();

void BM_SoeBuild(benchmark::State& state) {
    const double dx = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) {
        SoeApproximation soe = build_soe(1.5, 1e-8, dx, 2.0);
        benchmark::DoNotOptimize(soe.exponents.data());
    }
}
BENCHMARK(BM_SoeBuild)->Arg(1 << 8)->Arg(1 << 12)->Arg(1 << 16);

void BM_PreconditionedSolve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const GradedMesh mesh = build_graded_mesh(0.0, 2.0, n, 1.0);
    const SoeApproximation soe = build_soe(1.9, 1e-8, mesh.h_min(), 2.0);
    const FastOperator op(mesh, 0.9, Scheme::original, soe);
    const BandedPreconditioner p = BandedPreconditioner::build(mesh, 0.9, Scheme::original, 2);
    const LinearMap map = [&op](std::span<const double> v, std::span<double> out) {
        op.apply(v, out);
    };
    const std::vector<double> f(static_cast<size_t>(n - 1), 1.0);
    const std::vector<double> x0(static_cast<size_t>(n - 1), 0.0);
    for (auto _ : state) {
        SolveReport rep = bicgstab(map, f, x0, 1e-8, 10 * n, &p);
        benchmark::DoNotOptimize(rep.solution.data());
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_PreconditionedSolve)->RangeMultiplier(4)->Range(1 << 8, 1 << 12)->Complexity();

}  // namespace

BENCHMARK_MAIN();
