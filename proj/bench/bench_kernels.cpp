// Serial references against the OpenMP kernels.
//
//   ./strobe_bench --benchmark_filter=Apply

#include <benchmark/benchmark.h>

#include <random>

#include "strobe/lindblad.hpp"
#include "strobe/pauli_operator.hpp"
#include "strobe/spectra.hpp"

using namespace strobe;

namespace {

const SparseHamiltonian& hamiltonian(int L) {
  static const SparseHamiltonian h2 =
      build_hamiltonian(TorusLattice(2), {1.0, 1.0, 0.2, 0.05, ChiPairing::SequenceGenerated});
  static const SparseHamiltonian h3 =
      build_hamiltonian(TorusLattice(3), {1.0, 1.0, 0.2, 0.05, ChiPairing::SequenceGenerated});
  return L == 2 ? h2 : h3;
}

std::vector<cplx> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = cplx(g(rng), g(rng));
  return v;
}

void BM_Apply(benchmark::State& state) {
  const auto& h = hamiltonian(static_cast<int>(state.range(0)));
  const auto in = random_vector(h.dimension(), 1);
  std::vector<cplx> out(in.size());
  for (auto _ : state) {
    h.apply(in, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_ApplySerial(benchmark::State& state) {
  const auto& h = hamiltonian(static_cast<int>(state.range(0)));
  const auto in = random_vector(h.dimension(), 1);
  std::vector<cplx> out(in.size());
  for (auto _ : state) {
    h.apply_serial(in, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_ApplyBlock(benchmark::State& state) {
  const auto& h = hamiltonian(3);
  const auto cols = static_cast<std::size_t>(state.range(0));
  const auto in = random_vector(h.dimension() * cols, 2);
  std::vector<cplx> out(in.size());
  for (auto _ : state) {
    h.apply_block(in, out, cols);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cols));
}

template <bool Parallel>
void BM_ProjectOut(benchmark::State& state) {
  const std::size_t rows = std::size_t{1} << 18;
  const auto count = static_cast<std::size_t>(state.range(0));
  const auto basis = random_vector(rows * count, 3);
  const auto w0 = random_vector(rows, 4);
  for (auto _ : state) {
    auto w = w0;
    auto c = Parallel ? kernels::project_out(basis, rows, count, w)
                      : kernels::project_out_serial(basis, rows, count, w);
    benchmark::DoNotOptimize(c.data());
  }
}

template <bool Parallel>
void BM_Trajectories(benchmark::State& state) {
  const TorusLattice lat(2);
  const auto model = cooling_jump_set(lat, 1.0);
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(1 << lat.n_links());
  psi0(1) = 1.0;
  std::vector<std::pair<std::string, PauliSum>> obs{{"H0", toric_hamiltonian(lat).sum()}};
  TrajectoryOptions opts;
  opts.n_samples = static_cast<std::size_t>(state.range(0));
  opts.dt = 1e-2;
  const std::vector<double> times{0.0, 1.0};
  for (auto _ : state) {
    auto st = Parallel ? trajectories(model, psi0, times, obs, opts)
                       : trajectories_serial(model, psi0, times, obs, opts);
    benchmark::DoNotOptimize(st.mean.data());
  }
}

}  // namespace

BENCHMARK(BM_Apply)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplySerial)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyBlock)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_ProjectOut, true)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_ProjectOut, false)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Trajectories, true)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Trajectories, false)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
