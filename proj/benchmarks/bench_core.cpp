#include <benchmark/benchmark.h>

#include "specband/dirichlet.hpp"
#include "specband/flow.hpp"
#include "specband/kdv.hpp"
#include "specband/pencil_spectral.hpp"
#include "specband/weyl.hpp"

using namespace specband;

namespace {

OperatorData make_data(int m) {
  BandStructure bs({0.0, 1.0, 2.0});
  std::vector<std::vector<double>> placement(1);
  for (int r = 0; r < m; ++r) {
    placement[0].push_back(1.2 + 0.6 * static_cast<double>(r) / std::max(1, m - 1));
  }
  if (m == 1) placement[0] = {1.5};
  const MatrixPencil f = default_seed(bs, m, placement);
  return build_quadruple(f, extract_dirichlet(f, bs), bs);
}

void BM_SqrtR(benchmark::State& state) {
  BandStructure bs({0.0, 1.0, 2.0});
  cplx z(0.37, 0.83);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bs.eval_sqrt_r(z));
    z += cplx(1e-9, 0.0);
  }
}
BENCHMARK(BM_SqrtR);

void BM_DetRoots(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const OperatorData od = make_data(m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(det_roots(od.h));
  }
}
BENCHMARK(BM_DetRoots)->Arg(1)->Arg(2)->Arg(4);

void BM_BuildQuadruple(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  BandStructure bs({0.0, 1.0, 2.0});
  std::vector<std::vector<double>> placement(1);
  for (int r = 0; r < m; ++r) {
    placement[0].push_back(1.2 + 0.6 * static_cast<double>(r) / std::max(1, m - 1));
  }
  if (m == 1) placement[0] = {1.5};
  const MatrixPencil f = default_seed(bs, m, placement);
  const DirichletSet ds = extract_dirichlet(f, bs);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_quadruple(f, ds, bs));
  }
}
BENCHMARK(BM_BuildQuadruple)->Arg(1)->Arg(2)->Arg(4);

void BM_WeylFull(benchmark::State& state) {
  const WeylEvaluator ev(make_data(static_cast<int>(state.range(0))));
  cplx z(0.3, 0.9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ev.full(z));
    z += cplx(1e-9, 0.0);  // defeat the cache
  }
}
BENCHMARK(BM_WeylFull)->Arg(1)->Arg(2);

void BM_PropagateUnitInterval(benchmark::State& state) {
  const OperatorData od = make_data(static_cast<int>(state.range(0)));
  const FlowState s0 = state_from_operator_data(od, 0.0);
  PropagationConfig cfg;
  cfg.h = 1e-3;
  const std::vector<double> grid = {0.0, 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(propagate(s0, grid, od.bs, cfg));
  }
}
BENCHMARK(BM_PropagateUnitInterval)->Arg(1)->Arg(2)->Arg(4);

void BM_Factorize(benchmark::State& state) {
  const OperatorData od = make_data(static_cast<int>(state.range(0)));
  const FlowState s0 = state_from_operator_data(od, 0.0);
  const MatrixPencil h = s0.h_pencil();
  for (auto _ : state) {
    benchmark::DoNotOptimize(factorize(h));
  }
}
BENCHMARK(BM_Factorize)->Arg(1)->Arg(2)->Arg(4);

}  // namespace

int main(int argc, char** argv) {
  ::benchmark::Initialize(&argc, argv);
  if (::benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  ::benchmark::RunSpecifiedBenchmarks();
  ::benchmark::Shutdown();
  return 0;
}
