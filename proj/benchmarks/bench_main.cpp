#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "entpulse/fock_oracle.hpp"
#include "entpulse/gaussian.hpp"
#include "entpulse/protocol.hpp"

using namespace entpulse;
using cplx = std::complex<double>;

namespace {

double t_pi(double r) { return std::numbers::pi / std::sqrt(r * r - 1.0); }

void BM_EvolveToTpi(benchmark::State& state) {
    const cplx chi1{1.0, 0.0}, chi2{1.1, 0.0};
    const GaussianState v = vacuum(simultaneous_mode_labels());
    const LinearDynamics dyn = dynamics_from_couplings(chi1, chi2, 0.0, false);
    for (auto _ : state) benchmark::DoNotOptimize(evolve(v, dyn, t_pi(1.1)));
}
BENCHMARK(BM_EvolveToTpi);

void BM_EvolveLossy(benchmark::State& state) {
    const GaussianState v = vacuum(simultaneous_mode_labels());
    const LinearDynamics dyn = dynamics_from_couplings({1.0, 0.0}, {1.1, 0.0}, 0.05, true);
    for (auto _ : state) benchmark::DoNotOptimize(evolve(v, dyn, t_pi(1.1)));
}
BENCHMARK(BM_EvolveLossy);

void BM_OutputSignal(benchmark::State& state) {
    HomodyneSettings s;
    s.t_grid = default_fig3_grid();
    for (auto _ : state) benchmark::DoNotOptimize(output_signal(cplx{1.0, 0.0}, cplx{1.1, 0.0}, 1.0, s));
}
BENCHMARK(BM_OutputSignal);

void BM_Fig3Sweep(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(fig3_sweep(default_fig3_r_values(), 0.1, default_fig3_grid()));
    }
}
BENCHMARK(BM_Fig3Sweep)->Unit(benchmark::kMillisecond);

void BM_FockPropagation(benchmark::State& state) {
    const double r = static_cast<double>(state.range(0)) / 10.0;
    const cplx chi1{1.0, 0.0}, chi2{r, 0.0};
    const fock::Dims d = fock::suggested_dims(chi1, chi2);
    const fock::SparseHamiltonian h = fock::hamiltonian_matrix(chi1, chi2, d);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fock::propagate(fock::FockState::vacuum(d), h, t_pi(r)));
    }
    state.counters["dim"] = static_cast<double>(d.size());
}
BENCHMARK(BM_FockPropagation)->Arg(30)->Arg(25)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
