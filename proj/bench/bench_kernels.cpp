#include <benchmark/benchmark.h>

#include <cmath>
#include <map>

#include "compton/full_solver.hpp"
#include "compton/parallel.hpp"
#include "compton/reduced_solver.hpp"

using namespace compton;

namespace {

const PhysicalParams kP{1, 1};
const TruncationParams kT = TruncationParams::make(0.5, 1.0, 0.7);

const RegularizedKernel& kernel(int n) {
  static std::map<int, RegularizedKernel> cache;
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, build_regularized_kernel(kP, kT, 20, Grid::log_spaced(0.04, 40.0, n))).first;
  return it->second;
}

void BM_CollisionSerial(benchmark::State& st) {
  const auto& k = kernel(static_cast<int>(st.range(0)));
  const auto g = planck_density(k.grid, -0.5);
  for (auto _ : st) benchmark::DoNotOptimize(collision_rhs_serial(k, g));
}
void BM_CollisionOpenMP(benchmark::State& st) {
  const auto& k = kernel(static_cast<int>(st.range(0)));
  const auto g = planck_density(k.grid, -0.5);
  for (auto _ : st) benchmark::DoNotOptimize(collision_rhs(k, g));
}

void BM_KernelTableSerial(benchmark::State& st) {
  const Grid g = Grid::log_spaced(0.04, 40.0, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(build_regularized_kernel_serial(kP, kT, 20, g));
}
void BM_KernelTableOpenMP(benchmark::State& st) {
  const Grid g = Grid::log_spaced(0.04, 40.0, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(build_regularized_kernel(kP, kT, 20, g));
}

std::vector<double> points(int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = 0.5 * std::pow(60.0, double(i) / (n - 1));
  return x;
}
void BM_RateMatrixSerial(benchmark::State& st) {
  const auto x = points(static_cast<int>(st.range(0)));
  const RateKernel k = RateKernel::physical(kP, kT);
  for (auto _ : st) benchmark::DoNotOptimize(rate_matrix_serial(k, x));
}
void BM_RateMatrixOpenMP(benchmark::State& st) {
  const auto x = points(static_cast<int>(st.range(0)));
  const RateKernel k = RateKernel::physical(kP, kT);
  for (auto _ : st) benchmark::DoNotOptimize(rate_matrix(k, x));
}

std::pair<std::vector<double>, std::vector<double>> picard_data(int n) {
  std::vector<double> RW(std::size_t(n) * n), u(n);
  for (int i = 0; i < n; ++i) {
    u[i] = 1.0 / (1 + i);
    for (int j = 0; j < n; ++j) RW[std::size_t(i) * n + j] = std::sin(0.01 * i - 0.02 * j);
  }
  return {RW, u};
}
void BM_PicardRatesSerial(benchmark::State& st) {
  const auto [RW, u] = picard_data(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(picard_rates_serial(RW, u));
}
void BM_PicardRatesOpenMP(benchmark::State& st) {
  const auto [RW, u] = picard_data(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(picard_rates(RW, u));
}

}  // namespace

BENCHMARK(BM_CollisionSerial)->Arg(256)->Arg(1024);
BENCHMARK(BM_CollisionOpenMP)->Arg(256)->Arg(1024);
BENCHMARK(BM_KernelTableSerial)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelTableOpenMP)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RateMatrixSerial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RateMatrixOpenMP)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PicardRatesSerial)->Arg(400)->Arg(1600);
BENCHMARK(BM_PicardRatesOpenMP)->Arg(400)->Arg(1600);

int main(int argc, char** argv) {
  configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
