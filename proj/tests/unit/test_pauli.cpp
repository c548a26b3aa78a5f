#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "strobe/pauli.hpp"
#include "strobe/pauli_operator.hpp"

using namespace strobe;

namespace {

double max_diff(const MatrixXcd& a, const MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

MatrixXcd oracle_of(const PauliString& p) {
  std::string letters;
  for (std::size_t q = 0; q < p.n_qubits(); ++q) letters.push_back(p.op_at(q));
  return oracle::pauli(letters, oracle::quarter(p.phase_quarter()));
}

}  // namespace

TEST(PauliString, SingleQubitProducts) {
  const auto xi = PauliString::parse("XI");
  const auto yi = PauliString::parse("YI");
  const auto p = xi * yi;
  EXPECT_EQ(p, PauliString::parse("+iZI"));
  for (const char* s : {"X", "Y", "Z", "XYZI", "YYZZX"}) {
    const auto q = PauliString::parse(s);
    EXPECT_EQ(q * q, PauliString(q.n_qubits()));
  }
}

TEST(PauliString, GeneratorProductMatchesDense) {
  const auto a = PauliString::parse("ZYII");
  const auto b = PauliString::parse("IXYI");
  EXPECT_LT(max_diff(to_dense(a * b), oracle::pauli("ZYII") * oracle::pauli("IXYI")), 1e-15);
}

TEST(PauliString, TextRoundTrip) {
  for (const char* s : {"+XZIY", "-iZZ", "+iYI", "-XX"}) {
    EXPECT_EQ(PauliString::parse(s).str(), s);
  }
  EXPECT_EQ(PauliString::parse("+i^3 XY"), PauliString::parse("-iXY"));
  EXPECT_THROW(PauliString::parse("XQ"), std::invalid_argument);
}

TEST(PauliString, SizeMismatchThrows) {
  EXPECT_THROW(PauliString::parse("XX") * PauliString::parse("X"), std::invalid_argument);
  EXPECT_THROW(commutator(PauliString::parse("XX"), PauliString::parse("X")),
               std::invalid_argument);
}

TEST(PauliString, Commutators) {
  const auto s1 = PauliString::parse("ZYII");
  const auto s2 = PauliString::parse("IXYI");
  const auto s3 = PauliString::parse("IIXZ");
  EXPECT_TRUE(commutator(s1, s1).empty());

  const auto c12 = commutator(s1, s2);
  const MatrixXcd d12 = oracle::pauli("ZYII") * oracle::pauli("IXYI") -
                        oracle::pauli("IXYI") * oracle::pauli("ZYII");
  EXPECT_LT(max_diff(to_dense(c12), d12), 1e-15);
  EXPECT_LT(max_diff(to_dense(c12), oracle::pauli("ZZYI", cplx(0, -2))), 1e-15);

  const auto nested = commutator(c12, PauliSum(s3));
  const MatrixXcd dn = d12 * oracle::pauli("IIXZ") - oracle::pauli("IIXZ") * d12;
  EXPECT_LT(max_diff(to_dense(nested), dn), 1e-15);
  ASSERT_EQ(nested.size(), 1u);
  EXPECT_EQ(nested.coefficient(PauliString::parse("ZZZZ")), cplx(-4.0, 0.0));
}

TEST(PauliString, DenseForms) {
  EXPECT_LT(max_diff(to_dense(PauliString(2)), MatrixXcd::Identity(4, 4)), 0.0 + 1e-300);
  MatrixXcd z(2, 2);
  z << 1, 0, 0, -1;
  EXPECT_EQ(to_dense(PauliString::parse("Z")), z);
  const MatrixXcd m = to_dense(PauliString::parse("ZYII"));
  EXPECT_LT(max_diff(m * m.adjoint(), MatrixXcd::Identity(16, 16)), 1e-15);
  EXPECT_LT(max_diff(m, m.adjoint()), 1e-15);
  EXPECT_LT(std::abs(m.trace()), 1e-15);
  EXPECT_THROW(to_dense(PauliString(13)), DenseCapError);
  EXPECT_NO_THROW(to_dense(PauliString(13), 13));
}

TEST(PauliSum, Decompose) {
  EXPECT_TRUE(decompose(MatrixXcd::Zero(4, 4), 2).empty());
  MatrixXcd z(2, 2);
  z << 1, 0, 0, -1;
  const auto s = decompose(z, 1);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.coefficient(PauliString::parse("Z")), cplx(1.0, 0.0));
  EXPECT_THROW(decompose(MatrixXcd::Zero(3, 3), 2), std::invalid_argument);

  std::mt19937_64 rng(7);
  const MatrixXcd h = oracle::random_hermitian(rng, 16);
  EXPECT_LT(max_diff(to_dense(decompose(h, 4)), h), 1e-12);
}

TEST(PauliSum, DecomposeInvertsToDense) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  PauliSum s(3);
  for (int k = 0; k < 12; ++k) {
    s.add(PauliString::parse(oracle::random_letters(rng, 3)), g(rng));
  }
  const auto back = decompose(to_dense(s), 3);
  EXPECT_LT((back - s).max_abs_coefficient(), 1e-12);
}

TEST(PauliSum, AlgebraAndJson) {
  PauliSum a(PauliString::parse("XI"), 0.5);
  a.add(PauliString::parse("+iZZ"), 1.0);  // stored as i * ZZ
  EXPECT_EQ(a.coefficient(PauliString::parse("ZZ")), cplx(0.0, 1.0));
  EXPECT_FALSE(a.is_hermitian());
  EXPECT_TRUE(a.hermitian_part().is_hermitian());
  const auto prod = a * a;
  EXPECT_LT(max_diff(to_dense(prod), to_dense(a) * to_dense(a)), 1e-14);
  const auto j = a.to_json();
  EXPECT_EQ(PauliSum::from_json(j, 2).str(), a.str());
  PauliSum tiny(PauliString::parse("X"), 1e-14);
  EXPECT_TRUE(tiny.empty());
}

TEST(PauliState, ApplyToState) {
  std::vector<cplx> psi(8);
  psi[0] = 1.0;
  const auto out = apply_to_state(PauliString::parse("XII"), psi);
  EXPECT_EQ(out[1], cplx(1.0));
  EXPECT_EQ(apply_to_state(PauliString(3), psi), psi);
  EXPECT_THROW(apply_to_state(PauliString(2), psi), std::invalid_argument);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(1 << 10);
  for (auto& c : v) c = cplx(g(rng), g(rng));
  const auto p = PauliString::parse(oracle::random_letters(rng, 10)).with_phase(3);
  std::vector<cplx> in(v.data(), v.data() + v.size());
  const auto got = apply_to_state(p, in);
  const Eigen::VectorXcd want = oracle_of(p) * v;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) worst = std::max(worst, std::abs(got[k] - want(k)));
  EXPECT_LT(worst, 1e-13);
}

TEST(PauliProperty, RandomPairsAgreeWithOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nd(1, 4), ph(0, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = nd(rng);
    const auto a = PauliString::parse(oracle::random_letters(rng, n)).with_phase(ph(rng));
    const auto b = PauliString::parse(oracle::random_letters(rng, n)).with_phase(ph(rng));
    const MatrixXcd da = oracle_of(a);
    const MatrixXcd db = oracle_of(b);
    ASSERT_EQ(to_dense(a * b), da * db) << a.str() << " " << b.str();
    const MatrixXcd comm = da * db - db * da;
    ASSERT_EQ(to_dense(commutator(a, b)), comm);
    ASSERT_EQ(a.commutes_with(b), commutator(a, b).empty());
    const std::uint64_t basis = rng() & ((std::uint64_t{1} << n) - 1);
    const auto img = a.act(basis);
    ASSERT_EQ(img.amplitude, da(static_cast<Eigen::Index>(img.target),
                                static_cast<Eigen::Index>(basis)));
  }
}

TEST(PauliOperator, GatherMatchesSerialAndDense) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  PauliSum h(6);
  for (int k = 0; k < 20; ++k) h.add(PauliString::parse(oracle::random_letters(rng, 6)), g(rng));
  const PauliOperator op(h);
  std::vector<cplx> v(64), a(64), b(64);
  for (auto& c : v) c = cplx(g(rng), g(rng));
  op.apply(v, a);
  op.apply_serial(v, b);
  const Eigen::VectorXcd want = to_dense(h) * Eigen::Map<Eigen::VectorXcd>(v.data(), 64);
  for (int k = 0; k < 64; ++k) {
    EXPECT_LT(std::abs(a[k] - want(k)), 1e-12);
    EXPECT_LT(std::abs(b[k] - want(k)), 1e-12);
  }
}

TEST(Kernels, ProjectOutMatchesSerial) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  const std::size_t rows = 300, count = 5;
  std::vector<cplx> basis(rows * count), w(rows);
  for (auto& c : basis) c = cplx(g(rng), g(rng));
  for (auto& c : w) c = cplx(g(rng), g(rng));
  auto w2 = w;
  const auto c1 = kernels::project_out(basis, rows, count, w);
  const auto c2 = kernels::project_out_serial(basis, rows, count, w2);
  for (std::size_t j = 0; j < count; ++j) EXPECT_LT(std::abs(c1[j] - c2[j]), 1e-10);
  for (std::size_t i = 0; i < rows; ++i) EXPECT_LT(std::abs(w[i] - w2[i]), 1e-10);
}
