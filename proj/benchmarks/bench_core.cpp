// Microbenchmarks for the hot paths: exact angular coefficients, sector
// enumeration, operator assembly, the master-equation right-hand side, and
// the onsite trap integral.

#include "fermidark/angular.hpp"
#include "fermidark/darkcensus.hpp"
#include "fermidark/dipolar.hpp"
#include "fermidark/fock.hpp"
#include "fermidark/liouvillian.hpp"
#include "fermidark/spectrum.hpp"

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

using namespace fermidark;

namespace {

HalfInt ht(int twice) { return HalfInt::from_twice(twice); }

LevelStructure big_square() { return LevelStructure::make(ht(9), ht(9)); }

InteractionTensor single_site_tensor(const LevelStructure&, double u) {
  SiteArray site;
  site.positions = {Eigen::Vector3d::Zero()};
  return interaction_tensor(site, TrapGeometry{}, TransitionSpec{}, u);
}

void bm_clebsch_gordan(benchmark::State& state) {
  const int tj = static_cast<int>(state.range(0));
  double sink = 0.0;
  for (auto _ : state) {
    for (int tm = -tj; tm <= tj; tm += 2)
      for (int q = -1; q <= 1; ++q)
        sink += clebsch_gordan(ht(tj), ht(tm), HalfInt::whole(1),
                               HalfInt::whole(q), ht(tj), ht(tm + 2 * q));
    benchmark::DoNotOptimize(sink);
  }
}
BENCHMARK(bm_clebsch_gordan)->Arg(9)->Arg(21);

void bm_sector_build(benchmark::State& state) {
  const auto ls = big_square();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const SectorBasis basis = SectorBasis::build(ls, n);
    benchmark::DoNotOptimize(basis.size());
  }
}
BENCHMARK(bm_sector_build)->Arg(2)->Arg(3);

void bm_build_h_eff(benchmark::State& state) {
  const auto ls = big_square();
  const SectorBasis basis = SectorBasis::build(ls, 2);
  const InteractionTensor tensor = single_site_tensor(ls, 1.5);
  for (auto _ : state) {
    const Eigen::MatrixXcd h = build_h_eff(basis, tensor);
    benchmark::DoNotOptimize(h.norm());
  }
}
BENCHMARK(bm_build_h_eff);

void bm_lindblad_rhs(benchmark::State& state) {
  const auto ls = big_square();
  const SectorBasis basis = SectorBasis::build(ls, 2);
  const InteractionTensor tensor = single_site_tensor(ls, 1.5);
  const GeneratorSet gens = make_generators(basis, tensor);
  Eigen::MatrixXcd rho =
      Eigen::MatrixXcd::Identity(basis.size(), basis.size());
  rho /= static_cast<double>(basis.size());
  for (auto _ : state) {
    const Eigen::MatrixXcd drho = lindblad_rhs(rho, gens);
    benchmark::DoNotOptimize(drho.norm());
  }
}
BENCHMARK(bm_lindblad_rhs);

void bm_census(benchmark::State& state) {
  const auto ls = LevelStructure::make(ht(3), ht(5));
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    int total = 0;
    for (int ne = 1; ne <= n; ++ne) total += census(ls, n, ne).total_darks();
    benchmark::DoNotOptimize(total);
  }
}
BENCHMARK(bm_census)->Arg(3)->Arg(4);

void bm_full_spectrum(benchmark::State& state) {
  const auto ls = LevelStructure::make(ht(3), ht(5));
  for (auto _ : state) {
    const SpectrumReport report = full_spectrum(ls, 3, 0.0);
    benchmark::DoNotOptimize(report.total_darks());
  }
}
BENCHMARK(bm_full_spectrum);

void bm_onsite_U(benchmark::State& state) {
  TrapGeometry geom;
  geom.ell_z = 0.1;
  geom.ell_perp = 0.166;
  for (auto _ : state) {
    benchmark::DoNotOptimize(onsite_U(geom, TransitionSpec{}));
  }
}
BENCHMARK(bm_onsite_U);

}  // namespace

BENCHMARK_MAIN();
