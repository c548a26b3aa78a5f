#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracle.hpp"
#include "strobe/ancilla.hpp"
#include "strobe/linalg.hpp"
#include "strobe/lindblad.hpp"

using namespace strobe;

namespace {

// d rho/dt from the textbook formula on dense matrices.
oracle::Mat dense_generator(const oracle::Mat& h, const std::vector<std::pair<double, oracle::Mat>>& jumps,
                            const oracle::Mat& rho) {
  const oracle::cplx i(0.0, 1.0);
  oracle::Mat out = -i * (h * rho - rho * h);
  for (const auto& [rate, c] : jumps) {
    const oracle::Mat cdc = c.adjoint() * c;
    out += rate * (2.0 * c * rho * c.adjoint() - cdc * rho - rho * cdc);
  }
  return out;
}

oracle::Mat dense_of(const PauliSum& s) {
  oracle::Mat m = oracle::Mat::Zero(std::size_t{1} << s.n_qubits(), std::size_t{1} << s.n_qubits());
  for (const auto& [p, c] : s.terms()) {
    std::string letters;
    for (std::size_t q = 0; q < p.n_qubits(); ++q) letters.push_back(p.op_at(q));
    m += c * p.phase_factor() * oracle::pauli(letters);
  }
  return m;
}

oracle::Mat random_density(std::mt19937_64& rng, Eigen::Index dim) {
  const oracle::Mat a = oracle::random_hermitian(rng, dim);
  oracle::Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

LindbladModel random_model(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::pair<double, PauliString>> terms;
  for (int k = 0; k < 4; ++k) terms.emplace_back(u(rng), PauliString::parse(oracle::random_letters(rng, n)));
  LindbladModel m(SparseHamiltonian(n, terms), {});
  for (int k = 0; k < 3; ++k) {
    PauliSum op(n);
    op.add(PauliString::parse(oracle::random_letters(rng, n)), cplx(u(rng), u(rng)));
    op.add(PauliString::parse(oracle::random_letters(rng, n)), cplx(u(rng), u(rng)));
    m.add_jump({"j" + std::to_string(k), 0.3 + 0.5 * std::abs(u(rng)), op});
  }
  return m;
}

PauliSum lowering(std::size_t n, std::size_t q) {
  PauliSum s(PauliString::single(n, q, 'X'), 0.5);
  s.add(PauliString::single(n, q, 'Y'), cplx(0.0, 0.5));
  return s;
}

}  // namespace

TEST(Liouvillian, MatchesDenseOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto model = random_model(rng, 3);
    const Liouvillian gen(model);
    std::vector<std::pair<double, oracle::Mat>> jumps;
    for (const auto& j : model.jumps()) jumps.emplace_back(j.rate, dense_of(j.op));
    const oracle::Mat h = dense_of(model.hamiltonian().sum());
    const oracle::Mat rho = random_density(rng, 8);
    const MatrixXcd got = gen.apply(rho);
    EXPECT_LT((got - dense_generator(h, jumps, rho)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(std::abs(got.trace()), 1e-12);
  }
}

TEST(Liouvillian, BlockStructureOnTorus) {
  const TorusLattice lat(2);
  const Liouvillian gen(thermal_jump_set(lat, 0.1, 1.0, 1.0));
  EXPECT_EQ(gen.block_count() * gen.block_dimension(), gen.dimension());
  EXPECT_EQ(gen.block_dimension(), 64u);
  for (std::size_t b = 0; b < gen.block_count(); b += 97) {
    for (auto idx : gen.members(b)) EXPECT_EQ(gen.block_of(idx), b);
  }
}

TEST(PauliVector, RoundTrip) {
  std::mt19937_64 rng(3);
  const oracle::Mat rho = random_density(rng, 16);
  const auto r = to_pauli_vector(rho, 4);
  EXPECT_NEAR(r(0), 1.0, 1e-14);
  EXPECT_LT((from_pauli_vector(r, 4) - rho).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_TRUE(check_density_matrix(rho).ok());
}

TEST(Excitations, OperatorAlgebra) {
  const TorusLattice lat(2);
  const auto ops = excitation_ops(lat, 0, ExcitationType::Electric);
  const MatrixXcd e = to_dense(ops.annihilate), ed = to_dense(ops.create);
  EXPECT_LT((e.adjoint() - ed).cwiseAbs().maxCoeff(), 1e-14);
  const MatrixXcd h = to_dense(toric_hamiltonian(lat).sum());
  // Every reference ground state is annihilated by E and raised by 4 J by E^dagger.
  for (const auto& g : reference_ground_states(lat)) {
    EXPECT_LT((e * g).norm(), 1e-12);
    const Eigen::VectorXcd up = ed * g;
    EXPECT_NEAR(up.norm(), 1.0, 1e-12);
    EXPECT_LT((h * up - (-8.0 + 4.0) * up).norm(), 1e-12);
  }
  EXPECT_LT((ed * ed).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(excitation_ops(PauliString::parse("XII"), PauliString::parse("XXI"),
                              PauliString::parse("IZZ")),
               std::invalid_argument);
}

TEST(ThermalSet, RatesAndDetailedBalance) {
  const TorusLattice lat(2);
  for (double p : {0.1, 0.25, 0.5}) {
    const auto m = thermal_jump_set(lat, p, 1.0, 1.0);
    EXPECT_EQ(m.jumps().size(), 4u * 2u * lat.n_links());
    for (const auto& down : m.jumps()) {
      if (down.label.rfind("E_", 0) != 0) continue;
      for (const auto& up : m.jumps()) {
        if (up.label == "Edag_" + down.label.substr(2)) EXPECT_EQ(up.rate / down.rate, p / (1.0 - p));
      }
    }
  }
  EXPECT_THROW(thermal_jump_set(lat, 1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(thermal_jump_set(lat, 0.1, -1.0, 1.0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(detailed_balance_temperature(0.1, 4.0), 4.0 / std::log(9.0));
  EXPECT_DOUBLE_EQ(temperature_target(0.1, 4.0), -4.0 / std::log(0.1));
}

TEST(Stationary, ThermalSetReachesDetailedBalanceGibbs) {
  const TorusLattice lat(2);
  const auto model = thermal_jump_set(lat, 0.1, 1.0, 1.0);
  const Liouvillian gen(model);
  const auto rep = stationary_state(gen);
  EXPECT_EQ(rep.null_dimension, 1u);
  const auto h = toric_hamiltonian(lat);
  EXPECT_LT(trace_distance(rep.rho, gibbs_state(h, detailed_balance_temperature(0.1, 4.0))), 1e-9);
  EXPECT_LT(rep.residual, 1e-10);
  EXPECT_TRUE(check_density_matrix(rep.rho).ok(1e-9));
}

TEST(Stationary, LogicalSectorsWithoutExcitation) {
  const TorusLattice lat(2);
  const auto rep = stationary_state(Liouvillian(cooling_jump_set(lat, 1.0)));
  const std::vector<PauliString> loops{lat.logical_z(0), lat.logical_z(1)};
  EXPECT_EQ(rep.trace_block_null_dimension, 1u);
  EXPECT_EQ(sector_null_dimension(rep, lat.n_links(), loops), 4u);
  EXPECT_LT(excitation_density(lat, rep.rho), 1e-12);
}

TEST(Excitations, ConserveTheLoopsTheyDoNotCross) {
  // Electric ops flip X, so they commute with the X loops but not with every Z
  // loop; magnetic ops are the dual case.
  const TorusLattice lat(2);
  auto commutator_norm = [](const MatrixXcd& a, const MatrixXcd& b) { return (a * b - b * a).norm(); };
  double e_vs_z = 0.0, m_vs_x = 0.0;
  for (int link = 0; link < static_cast<int>(lat.n_links()); ++link) {
    const auto e = excitation_ops(lat, link, ExcitationType::Electric);
    const auto m = excitation_ops(lat, link, ExcitationType::Magnetic);
    for (int k = 0; k < 2; ++k) {
      const MatrixXcd lx = to_dense(PauliSum(lat.logical_x(k)));
      const MatrixXcd lz = to_dense(PauliSum(lat.logical_z(k)));
      for (const auto* op : {&e.create, &e.annihilate, &e.translate}) {
        EXPECT_LT(commutator_norm(to_dense(*op), lx), 1e-12);
        e_vs_z = std::max(e_vs_z, commutator_norm(to_dense(*op), lz));
      }
      for (const auto* op : {&m.create, &m.annihilate, &m.translate}) {
        EXPECT_LT(commutator_norm(to_dense(*op), lz), 1e-12);
        m_vs_x = std::max(m_vs_x, commutator_norm(to_dense(*op), lx));
      }
    }
  }
  EXPECT_GT(e_vs_z, 1.0);
  EXPECT_GT(m_vs_x, 1.0);
}

TEST(Cooling, GroundSpaceIsDarkAndPairsAnneal) {
  const TorusLattice lat(2);
  const auto model = cooling_jump_set(lat, 1.0);
  for (const auto& g : reference_ground_states(lat)) {
    for (const auto& j : model.jumps()) EXPECT_LT((to_dense(j.op) * g).norm(), 1e-12) << j.label;
  }
  const MatrixXcd e = to_dense(excitation_ops(lat, 0, ExcitationType::Electric).create);
  const MatrixXcd gs = gibbs_state(toric_hamiltonian(lat), 0.0);
  MatrixXcd rho0 = e * gs * e.adjoint();
  rho0 /= rho0.trace().real();
  EXPECT_NEAR(excitation_density(lat, rho0), 0.25, 1e-12);
  const auto ev = evolve(Liouvillian(model), rho0, {0.0, 5.0, 20.0});
  EXPECT_LT(excitation_density(lat, ev.states.back()), 1e-6);
  EXPECT_GT(ev.min_eigenvalue, -1e-10);
  EXPECT_LT(ev.max_trace_error, 1e-10);
}

TEST(Evolve, RejectsBadTimes) {
  std::mt19937_64 rng(1);
  const auto model = random_model(rng, 2);
  const Liouvillian gen(model);
  const MatrixXcd rho = MatrixXcd::Identity(4, 4) / 4.0;
  EXPECT_THROW(evolve(gen, rho, {1.0, 0.5}), std::invalid_argument);
  EXPECT_THROW(evolve(gen, rho, {-1.0}), std::invalid_argument);
}

TEST(Gibbs, ZeroTemperatureIsGroundProjector) {
  const TorusLattice lat(2);
  const auto h = toric_hamiltonian(lat);
  const MatrixXcd g0 = gibbs_state(h, 0.0);
  EXPECT_NEAR(g0.trace().real(), 1.0, 1e-12);
  EXPECT_NEAR((g0 * g0).trace().real(), 0.25, 1e-12);
  EXPECT_NEAR((to_dense(h.sum()) * g0).trace().real(), -8.0, 1e-12);
}

TEST(Trajectories, AgreeWithMasterEquation) {
  std::vector<std::pair<double, PauliString>> terms{{0.5, PauliString::parse("XI")},
                                                    {0.3, PauliString::parse("ZZ")}};
  LindbladModel model(SparseHamiltonian(2, terms), {});
  model.add_jump({"decay", 0.5, lowering(2, 0)});
  model.add_jump({"dephase", 0.2, PauliSum(PauliString::parse("IZ"))});
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(4);
  psi0(3) = 1.0;
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0};
  std::vector<std::pair<std::string, PauliSum>> obs{{"Z0", PauliSum(PauliString::parse("ZI"))},
                                                    {"X1", PauliSum(PauliString::parse("IX"))}};
  TrajectoryOptions opts;
  opts.n_samples = 2000;
  opts.seed = 7;
  const auto st = trajectories(model, psi0, times, obs, opts);
  const auto ev = evolve(Liouvillian(model), psi0 * psi0.adjoint(), times);
  for (std::size_t o = 0; o < obs.size(); ++o) {
    const PauliString p = obs[o].second.terms().begin()->first;
    for (std::size_t t = 0; t < times.size(); ++t) {
      const double exact = pauli_expectation(p, ev.states[t]);
      EXPECT_LE(std::abs(st.mean[o][t] - exact), 4.0 * st.stderr_[o][t] + 1e-9)
          << obs[o].first << " t=" << times[t];
    }
  }
  const auto serial = trajectories_serial(model, psi0, times, obs, opts);
  EXPECT_EQ(serial.mean, st.mean);
  EXPECT_EQ(serial.jump_counts, st.jump_counts);
  EXPECT_EQ(trajectory_csv(st).rfind("# schema: strobe.trajectory/1\n", 0), 0u);
}

TEST(Pump, ThermalDiagonalForEveryAngle) {
  for (double theta : {0.0, std::numbers::pi / 6, std::numbers::pi / 4, std::numbers::pi / 2}) {
    PumpProtocol pr;
    pr.theta = theta;
    const auto res = pump_ancilla(pr);
    EXPECT_NEAR(res.rho(0, 0).real(), std::pow(std::sin(theta), 2), 1e-4) << theta;
    EXPECT_NEAR(res.rho(1, 1).real(), std::pow(std::cos(theta), 2), 1e-4) << theta;
    EXPECT_LT(res.residual_excited, 1e-6);
    EXPECT_EQ(res.steps.size(), 5u);
  }
  EXPECT_EQ(pump_temperature(0.0, 4.0), 0.0);
  EXPECT_TRUE(std::isinf(pump_temperature(std::numbers::pi / 4, 4.0)));
  EXPECT_NEAR(pump_temperature(std::numbers::pi / 6, 4.0), 4.0 / (2.0 * std::log(std::sqrt(3.0))), 1e-12);
  PumpProtocol bad;
  bad.initial = {0.7, 0.7};
  EXPECT_THROW(pump_ancilla(bad), std::invalid_argument);
  bad.initial = {0.5, 0.5};
  bad.gamma20 = 0.0;
  EXPECT_THROW(pump_ancilla(bad), std::invalid_argument);
}

TEST(Elimination, RateIsQuadraticInCoupling) {
  const auto a = elimination_rate(0.01, 1.0);
  const auto b = elimination_rate(0.02, 1.0);
  EXPECT_TRUE(a.markovian);
  EXPECT_NEAR(std::log(b.rate / a.rate) / std::log(2.0), 2.0, 0.05);
  EXPECT_NEAR(b.rate, 4.0 * 0.02 * 0.02, 0.05 * b.rate);
  EXPECT_EQ(elimination_rate(0.0, 1.0).rate, 0.0);
}
