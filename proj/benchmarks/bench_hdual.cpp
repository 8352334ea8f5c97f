#include <hdual/certify.hpp>
#include <hdual/composite.hpp>
#include <hdual/continuous.hpp>
#include <hdual/method_lib.hpp>
#include <hdual/testbed.hpp>

#include <benchmark/benchmark.h>

using namespace hdual;

namespace {

void BM_BuildS(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto H = method_lib::ogm_H(n);
  const auto u = certify::ogm_weights(n);
  for (auto _ : state) benchmark::DoNotOptimize(certify::build_S(H, u));
  state.SetComplexityN(n);
}
BENCHMARK(BM_BuildS)->RangeMultiplier(2)->Range(8, 128)->Complexity();

void BM_BuildT(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto HA = method_lib::ogmg_H(n);
  const auto v = certify::reciprocal_reversed(certify::ogm_weights(n));
  for (auto _ : state) benchmark::DoNotOptimize(certify::build_T(HA, v));
  state.SetComplexityN(n);
}
BENCHMARK(BM_BuildT)->RangeMultiplier(2)->Range(8, 128)->Complexity();

void BM_Congruence(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto H = method_lib::obl_f_H(n);
  const auto u = certify::obl_weights(n);
  for (auto _ : state) benchmark::DoNotOptimize(certify::verify_congruence(H, u));
}
BENCHMARK(BM_Congruence)->Arg(10)->Arg(30)->Arg(60);

void BM_Jacobi(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  testbed::Rng rng(1);
  const Mat A = testbed::random_spd(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(certify::symmetric_eigenvalues(A));
}
BENCHMARK(BM_Jacobi)->Arg(10)->Arg(30)->Arg(60);

void BM_RunFsfom(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  testbed::Rng rng(2);
  const auto f = testbed::random_quadratic(50, rng);
  const Vec x0 = testbed::random_vec(50, rng);
  const auto H = method_lib::ogm_H(n);
  for (auto _ : state) benchmark::DoNotOptimize(method_lib::run_fsfom(H, *f, x0, f->lipschitz()));
}
BENCHMARK(BM_RunFsfom)->Arg(25)->Arg(100);

void BM_RunThreeTerm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  testbed::Rng rng(2);
  const auto f = testbed::random_quadratic(50, rng);
  const Vec x0 = testbed::random_vec(50, rng);
  const auto c = method_lib::gogm_coeffs(method_lib::ogm_tsequence(n));
  for (auto _ : state)
    benchmark::DoNotOptimize(method_lib::run_three_term(c, *f, x0, f->lipschitz()));
}
BENCHMARK(BM_RunThreeTerm)->Arg(25)->Arg(100);

void BM_SfgLasso(benchmark::State& state) {
  testbed::Rng rng(3);
  const auto F = testbed::random_lasso(100, 50, rng);
  const Vec y0 = testbed::random_vec(50, rng);
  const auto H = composite::sfg_H(100);
  for (auto _ : state) benchmark::DoNotOptimize(composite::run_composite(H, F, y0, 4.0));
}
BENCHMARK(BM_SfgLasso);

void BM_OdePrimal(benchmark::State& state) {
  testbed::Rng rng(4);
  const auto f = testbed::random_quadratic(8, rng);
  const Vec x0 = testbed::random_vec(8, rng);
  const continuous::PFamily pf{static_cast<double>(state.range(0)), 0.5, 10.0};
  for (auto _ : state) benchmark::DoNotOptimize(continuous::integrate_primal(pf, *f, x0));
}
BENCHMARK(BM_OdePrimal)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_OdeDual(benchmark::State& state) {
  testbed::Rng rng(4);
  const auto f = testbed::random_quadratic(8, rng);
  const Vec y0 = testbed::random_vec(8, rng);
  const continuous::PFamily pf{static_cast<double>(state.range(0)), 0.5, 10.0};
  for (auto _ : state) benchmark::DoNotOptimize(continuous::integrate_dual(pf, *f, y0));
}
BENCHMARK(BM_OdeDual)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
