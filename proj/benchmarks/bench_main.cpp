#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "tbnls/harness.hpp"

using namespace tbnls;

namespace {

// Reference lattice, one setup per hbar shared across benchmarks.
const ReductionSetup& setup(double hbar) {
  static std::map<double, std::unique_ptr<ReductionSetup>> cache;
  auto& s = cache[hbar];
  if (!s) s = std::make_unique<ReductionSetup>(prepare_reduction(LatticeModel::build({}), hbar));
  return *s;
}

FieldState initial(const ReductionSetup& s) {
  return FieldState{0.0, synthesize(gaussian_amplitudes(s.basis.size(), 5), s.basis), s.basis.dx};
}

void BM_GpeStep(benchmark::State& state) {
  const ReductionSetup& s = setup(0.1);
  const SemiclassicalParams p = model1_params(0.1, 1.0, 1.0);
  PropagatorConfig cfg;
  cfg.scheme = static_cast<SplitScheme>(state.range(0));
  cfg.dt = cfg.scheme == SplitScheme::bloch_exact ? default_bloch_time_step(s.spectrum, p)
                                                  : default_time_step(s.model, p);
  const GpePropagator prop(s.model, p, cfg, &s.spectrum);
  FieldState psi = initial(s);
  for (auto _ : state) {
    prop.step(psi);
    benchmark::DoNotOptimize(psi.values.data());
  }
  state.SetLabel(to_string(cfg.scheme));
}
BENCHMARK(BM_GpeStep)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_DnlsRhs(benchmark::State& state) {
  const ReductionSetup& s = setup(0.1);
  const DnlsCoefficients c = DnlsCoefficients::from(s.coefficients, model1_params(0.1, 1.0, 1.0));
  const Eigen::VectorXcd g = gaussian_amplitudes(s.basis.size(), 5);
  for (auto _ : state) benchmark::DoNotOptimize(dnls_rhs(g, c));
}
BENCHMARK(BM_DnlsRhs);

void BM_ProjectAmplitudes(benchmark::State& state) {
  const ReductionSetup& s = setup(0.1);
  const FieldState psi = initial(s);
  for (auto _ : state)
    benchmark::DoNotOptimize(project_amplitudes(psi, s.basis, s.coefficients.lambda1, s.hbar));
}
BENCHMARK(BM_ProjectAmplitudes)->Unit(benchmark::kMicrosecond);

void BM_BandProjection(benchmark::State& state) {
  const ReductionSetup& s = setup(0.1);
  const FieldState psi = initial(s);
  for (auto _ : state) benchmark::DoNotOptimize(band_projection(psi.values, s.band));
}
BENCHMARK(BM_BandProjection)->Unit(benchmark::kMicrosecond);

void BM_PrepareReduction(benchmark::State& state) {
  const LatticeModel m = LatticeModel::build({});
  const double hbar = state.range(0) / 1000.0;
  for (auto _ : state) benchmark::DoNotOptimize(prepare_reduction(m, hbar).coefficients.beta);
}
BENCHMARK(BM_PrepareReduction)->Arg(140)->Arg(60)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
