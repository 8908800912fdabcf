// Propagation, derivative and sensitivity costs on the 10 N transfer.
#include <numbers>

#include <benchmark/benchmark.h>

#include "suffkit/second_order.hpp"
#include "suffkit/shooting.hpp"

namespace {

using namespace suffkit;

Dynamics Meoe10N() {
  return Dynamics(Chart::kMeoe,
                  EngineSpec::FromPhysical(10.0, 2000.0, 500.0, ScaleSet::Geo(1500.0)));
}

Vec7 X0() {
  Vec7 x;
  x << 11625.0 / kGeoSemilatusKm, 0.75, 0.0, 0.0612, 0.0, std::numbers::pi, 1.0;
  return x;
}

// Converged costate of the 18 pi transfer.
Vec7 P0() {
  Vec7 p;
  p << 47.952107095321907, 16.667794806855184, 0.5067795195120659, -9.2514885205735435,
      0.19778813207660612, -0.60135315311186788, -19.757817904576907;
  return p;
}

constexpr double kTf = 38.327952192430772;

void BM_HamiltonianDerivatives(benchmark::State& state) {
  const Dynamics dyn = Meoe10N();
  const Vec7 x = X0(), p = P0();
  for (auto _ : state) benchmark::DoNotOptimize(dyn.Derivatives(x, p, 1.0));
}
BENCHMARK(BM_HamiltonianDerivatives);

void BM_CanonicalField(benchmark::State& state) {
  const Dynamics dyn = Meoe10N();
  double z[14], zd[14];
  for (int i = 0; i < 7; ++i) {
    z[i] = X0()[i];
    z[7 + i] = P0()[i];
  }
  for (auto _ : state) {
    dyn.CanonicalField(z, 1.0, Branch::kBurn, zd);
    benchmark::DoNotOptimize(zd[0]);
  }
}
BENCHMARK(BM_CanonicalField);

void BM_PropagateTransfer(benchmark::State& state) {
  const Dynamics dyn = Meoe10N();
  FlowOptions o;
  o.store_dense = false;
  for (auto _ : state) benchmark::DoNotOptimize(Propagate(dyn, X0(), P0(), kTf, 1.0, o));
}
BENCHMARK(BM_PropagateTransfer)->Unit(benchmark::kMillisecond);

void BM_PropagateFamily(benchmark::State& state) {
  const Dynamics dyn = Meoe10N();
  const FamilyBasis E = BuildFamilyBasis(dyn, X0(), P0(), 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(PropagateFamily(dyn, X0(), P0(), kTf, 1.0, E, FlowOptions{}));
  }
}
BENCHMARK(BM_PropagateFamily)->Unit(benchmark::kMillisecond);

void BM_ShootingResidual(benchmark::State& state) {
  Meoe geo;
  geo.P = 1.0;
  const ShootingProblem pb{Meoe10N(), X0(), MeoeTarget(geo, 18.0 * std::numbers::pi),
                           FlowOptions{}};
  ShootingUnknowns u;
  u.p0 = P0();
  u.tf = kTf;
  for (auto _ : state) benchmark::DoNotOptimize(ShootingResidual(pb, u, 1.0));
}
BENCHMARK(BM_ShootingResidual)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
