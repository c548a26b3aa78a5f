#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "oracle.hpp"
#include "strobe/sequence.hpp"

using namespace strobe;

namespace {

double max_diff(const MatrixXcd& a, const MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

MatrixXcd u_of(const char* letters, double angle) {
  return oracle::expi(oracle::pauli(letters), angle);
}

// Operator-form U_123 written straight from its nested definition.
MatrixXcd u123_oracle(double a, double b, double g) {
  const MatrixXcd u12 = u_of("IXYI", b) * u_of("ZYII", a) * u_of("IXYI", -b) * u_of("ZYII", -a);
  return u12 * u_of("IIXZ", g) * u12.adjoint() * u_of("IIXZ", -g);
}

double coeff(const PauliSum& s, const char* p) {
  return s.coefficient(PauliString::parse(p)).real();
}

}  // namespace

TEST(Sequence, U123StructureAndOrder) {
  const auto gens = vertex_generators();
  const auto zero = u123(0, 0, 0, gens);
  EXPECT_EQ(zero.size(), 10u);
  EXPECT_LT(max_diff(zero.unitary(), MatrixXcd::Identity(16, 16)), 1e-15);

  const auto s = u123(0.1, 0.1, 0.1, gens, 2.0);
  EXPECT_DOUBLE_EQ(s.total_duration(), 20.0);
  const MatrixXcd u = s.unitary();
  EXPECT_LT(unitarity_error(u), 1e-13);
  EXPECT_LT(max_diff(u, u123_oracle(0.1, 0.1, 0.1)), 1e-13);
  EXPECT_LT(max_diff(u123(0.13, -0.07, 0.2, gens).unitary(), u123_oracle(0.13, -0.07, 0.2)),
            1e-13);

  const auto e = echoed_u123(0.1, 0.1, 0.1, gens);
  EXPECT_EQ(e.size(), 20u);
  EXPECT_DOUBLE_EQ(e.total_duration(), 20.0);
  EXPECT_LT(max_diff(e.unitary(), u123_oracle(-0.1, 0.1, -0.1) * u123_oracle(0.1, 0.1, 0.1)),
            1e-13);
  EXPECT_LT(max_diff(echoed_u123(0, 0, 0, gens).unitary(), MatrixXcd::Identity(16, 16)), 1e-15);
}

TEST(Sequence, RejectsBadGates) {
  GateSequence s;
  EXPECT_THROW(s.push_back({PauliString::parse("+iX"), 0.1, 1.0}), std::invalid_argument);
  EXPECT_THROW(s.push_back({PauliString::parse("X"), NAN, 1.0}), std::invalid_argument);
  EXPECT_THROW(s.push_back({PauliString::parse("X"), 0.1, 0.0}), std::invalid_argument);
  s.push_back({PauliString::parse("X"), 0.1, 1.0});
  EXPECT_THROW(s.push_back({PauliString::parse("XX"), 0.1, 1.0}), std::invalid_argument);
  Generators bad{PauliString::parse("ZY"), PauliString::parse("IXY"), PauliString::parse("IIX")};
  EXPECT_THROW(u123(0.1, 0.1, 0.1, bad), std::invalid_argument);
}

TEST(Sequence, JsonRoundTrip) {
  const auto s = echoed_u123(0.1, -0.2, 0.3, plaquette_generators(), 0.5);
  const auto back = GateSequence::from_json(s.to_json());
  EXPECT_EQ(back.to_json(), s.to_json());
  EXPECT_EQ(back.unitary(), s.unitary());
}

TEST(Generators, CyclicPermutation) {
  const auto p = plaquette_generators();
  EXPECT_EQ(p[0], PauliString::parse("XZII"));
  EXPECT_EQ(p[1], PauliString::parse("IYZI"));
  EXPECT_EQ(p[2], PauliString::parse("IIYX"));
  EXPECT_EQ(cyclic_permute(cyclic_permute(p)), vertex_generators());
  const auto e = embed(vertex_generators(), 8, {7, 2, 0, 5});
  EXPECT_EQ(e[0], PauliString::from_factors(
                      8, std::vector<std::pair<std::size_t, char>>{{7, 'Z'}, {2, 'Y'}}));
  EXPECT_THROW(embed(vertex_generators(), 8, {1, 1, 2, 3}), std::invalid_argument);
}

TEST(EffectiveHamiltonian, Definitional) {
  GateSequence empty;
  EXPECT_TRUE(effective_hamiltonian(empty).h_eff.empty());

  GateSequence id;
  id.push_back({PauliString::parse("ZZ"), 0.0, 1.0});
  EXPECT_TRUE(effective_hamiltonian(id).h_eff.empty());

  GateSequence one;
  one.push_back({PauliString::parse("Z"), 0.3, 2.0});
  const auto rep = effective_hamiltonian(one);
  ASSERT_EQ(rep.h_eff.size(), 1u);
  EXPECT_NEAR(coeff(rep.h_eff, "Z"), 0.15, 1e-15);
  EXPECT_DOUBLE_EQ(rep.total_time, 2.0);
}

TEST(EffectiveHamiltonian, BranchCutIsAnError) {
  GateSequence s;
  s.push_back({PauliString::parse("X"), std::numbers::pi / 2, 1.0});
  s.push_back({PauliString::parse("X"), std::numbers::pi / 2, 1.0});
  EXPECT_THROW(effective_hamiltonian(s), BranchCutError);
}

TEST(EffectiveHamiltonian, ReexponentiationAndOracleLog) {
  const auto s = u123(0.3, -0.25, 0.2, vertex_generators());
  const auto rep = effective_hamiltonian(s);
  EXPECT_TRUE(rep.h_eff.is_hermitian());
  EXPECT_LT(rep.asymmetry, 1e-12);
  const MatrixXcd u = s.unitary();
  EXPECT_LT(max_diff(oracle::expi(to_dense(rep.h_eff), rep.total_time), u), 1e-10);
  const MatrixXcd want = (cplx(0, 1) / rep.total_time) * MatrixXcd(u.log());
  EXPECT_LT(max_diff(to_dense(rep.h_eff), want), 1e-12);
}

TEST(EffectiveHamiltonian, SingleSequenceTermsFollowPrediction) {
  // Mixed signs exercise the sign bookkeeping of every predicted term.
  for (const auto& [a, b, g] : {std::array{0.05, 0.05, 0.05}, std::array{0.05, -0.04, 0.06},
                                std::array{-0.06, 0.05, 0.04}}) {
    const auto gens = vertex_generators();
    const auto pred = predicted_terms(a, b, g, gens, false);
    const auto rep = effective_hamiltonian(u123(a, b, g, gens), pred);
    ASSERT_EQ(rep.target_coefficients.size(), 5u);
    for (const auto& t : rep.target_coefficients) {
      EXPECT_NEAR(t.measured / t.predicted, 1.0, 0.1) << t.term.str();
    }
  }
}

TEST(EffectiveHamiltonian, EchoRemovesFourthOrderTerms) {
  const double phi = 0.1;
  const auto gens = vertex_generators();
  const auto single = effective_hamiltonian(u123(phi, phi, phi, gens)).h_eff;
  const auto echoed = effective_hamiltonian(echoed_u123(phi, phi, phi, gens)).h_eff;
  for (const char* t : {"IXZZ", "ZZYI"}) {
    EXPECT_GT(std::abs(coeff(single, t)), 1e-5) << t;
    EXPECT_LT(std::abs(coeff(echoed, t)), 1e-3 * std::pow(phi, 4)) << t;
  }
  EXPECT_NEAR(coeff(echoed, "ZZZZ") / coeff(single, "ZZZZ"), 1.0, 0.05);
}

TEST(EffectiveHamiltonian, SignReversalFlipsFourthOrderTerms) {
  const auto gens = vertex_generators();
  const auto h1 = effective_hamiltonian(u123(0.08, 0.08, 0.08, gens)).h_eff;
  const auto h2 = effective_hamiltonian(u123(-0.08, 0.08, -0.08, gens)).h_eff;
  for (const char* t : {"IXZZ", "ZZYI"}) {
    EXPECT_NEAR(coeff(h2, t), -coeff(h1, t), 1e-2 * std::abs(coeff(h1, t))) << t;
  }
  EXPECT_NEAR(coeff(h2, "ZZZZ"), coeff(h1, "ZZZZ"), 1e-5 * std::pow(0.08, 3));
}

TEST(EffectiveHamiltonian, PlaquetteSequenceMirrorsVertex) {
  const double phi = 0.1;
  const auto v = effective_hamiltonian(echoed_u123(phi, phi, phi, vertex_generators())).h_eff;
  const auto p = effective_hamiltonian(echoed_u123(phi, phi, phi, plaquette_generators())).h_eff;
  EXPECT_EQ(four_body_term(plaquette_generators()), PauliString::parse("XXXX"));
  EXPECT_NEAR(coeff(p, "XXXX"), coeff(v, "ZZZZ"), 1e-14);
  EXPECT_NEAR(coeff(p, "IYZI"), coeff(v, "IXYI"), 1e-14);
  EXPECT_EQ(p.size(), v.size());
}

TEST(Bch, CommutingGatesAreExact) {
  GateSequence s;
  s.push_back({PauliString::parse("ZZ"), 0.3, 1.0});
  s.push_back({PauliString::parse("XX"), -0.2, 1.0});
  const auto b = bch_second_order(s);
  EXPECT_NEAR(coeff(b, "ZZ"), 0.15, 1e-15);
  EXPECT_NEAR(coeff(b, "XX"), -0.1, 1e-15);
  EXPECT_EQ(b.size(), 2u);
}

TEST(Bch, SecondOrderSignAndScaling) {
  const auto s1 = PauliString::parse("ZYII");
  const auto s2 = PauliString::parse("IXYI");
  std::vector<double> eps, err;
  for (double e : {0.01, 0.02, 0.04, 0.08}) {
    GateSequence s;
    s.push_back({s1, e, 1.0});
    s.push_back({s2, 1.3 * e, 1.0});
    const auto exact = effective_hamiltonian(s, PauliSum(), {1e-16}).h_eff;
    const auto approx = bch_second_order(s);
    // Second-order term (i a b / 2t)[S1, S2] = (a b / t) ZZYI.
    EXPECT_NEAR(coeff(approx, "ZZYI"), 1.3 * e * e / 2.0, 1e-15);
    EXPECT_NEAR(coeff(exact, "ZZYI") / coeff(approx, "ZZYI"), 1.0, 0.01);
    eps.push_back(e);
    err.push_back((exact - approx).max_abs_coefficient());
  }
  const auto fit = fit_log_log(eps, err, 1e-16);
  EXPECT_GE(fit.slope, 2.9);
}

TEST(OrderScan, SingleSequenceSlopes) {
  const std::vector<double> phis{0.05, 0.08, 0.12, 0.2};
  const auto gens = vertex_generators();
  const std::vector<PauliString> targets{PauliString::parse("ZZZZ")};
  const auto res = order_scan([&](double p) { return u123(p, p, p, gens); }, phis, targets);
  const auto* zzzz = res.find(PauliString::parse("ZZZZ"));
  ASSERT_NE(zzzz, nullptr);
  EXPECT_TRUE(zzzz->is_target);
  EXPECT_NEAR(zzzz->slope, 3.0, 0.1);
  for (const char* t : {"IXZZ", "ZZYI"}) {
    const auto* f = res.find(PauliString::parse(t));
    ASSERT_NE(f, nullptr);
    EXPECT_NEAR(f->slope, 4.0, 0.3) << t;
  }
  EXPECT_THROW(order_scan([&](double p) { return u123(p, p, p, gens); },
                          std::vector<double>{0.1, 0.11, 0.12, 0.13}, targets),
               std::invalid_argument);
}

TEST(OrderScan, FitFlagsUnderflow) {
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  const std::vector<double> y{1e-20, 1e-19, 0.0, 1e-18};
  EXPECT_TRUE(fit_log_log(x, y, 1e-15).degenerate);
  const std::vector<double> cube{1e-3, 8e-3, 27e-3, 64e-3};
  const auto f = fit_log_log(x, cube, 1e-15);
  EXPECT_FALSE(f.degenerate);
  EXPECT_NEAR(f.slope, 3.0, 1e-12);
}

TEST(SerialCompose, DisjointSupportsAreExact) {
  const auto v = echoed_u123(0.1, 0.1, 0.1, embed(vertex_generators(), 8, {0, 1, 2, 3}));
  const auto p = echoed_u123(0.1, 0.1, 0.1, embed(plaquette_generators(), 8, {4, 5, 6, 7}));
  const auto c = serial_compose(v, p);
  EXPECT_TRUE(c.report.commuting);
  EXPECT_EQ(c.report.error, 0.0);
  EXPECT_EQ(c.sequence.size(), 40u);
}

TEST(SerialCompose, CommutingIdealPartsComposeExactly) {
  GateSequence v, p;
  v.push_back({PauliString::parse("ZZZZ"), 0.01, 1.0});
  p.push_back({PauliString::parse("XXXX"), 0.02, 1.0});
  EXPECT_LT(serial_compose(v, p).report.error, 1e-12);
}

TEST(SerialCompose, SharedSupportErrorIsHighOrder) {
  std::vector<double> phis, errs;
  for (double phi : {0.05, 0.08, 0.12, 0.2}) {
    const auto c = serial_compose(echoed_u123(phi, phi, phi, vertex_generators()),
                                  echoed_u123(phi, phi, phi, plaquette_generators()));
    EXPECT_FALSE(c.report.commuting);
    phis.push_back(phi);
    errs.push_back(c.report.error);
  }
  EXPECT_GE(fit_log_log(phis, errs, 1e-15).slope, 6.5);
}

TEST(CycleTime, Counting) {
  const TorusLattice l3(3);
  EXPECT_NEAR(estimate_cycle_time(l3, 500e-9), 720e-6, 1e-15);
  EXPECT_EQ(estimate_cycle_time(l3, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(estimate_cycle_time(l3, 500e-9, 4, 2.0), 360e-6);
  EXPECT_THROW(estimate_cycle_time(l3, 500e-9, 0), std::invalid_argument);
}
