#pragma once

// Dense reference constructions used only by the tests. They are written from
// the textbook definitions (Kronecker products of 2x2 matrices) and share no
// code with the library's bit-level algebra.

#include <complex>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline Mat single(char op) {
  Mat m(2, 2);
  const cplx i(0.0, 1.0);
  switch (op) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m << 1, 0, 0, 1; break;
  }
  return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return out;
}

/// Letters as written (leftmost = qubit 0 = least-significant index bit), so
/// the matrix is P_{n-1} (x) ... (x) P_0.
inline Mat pauli(const std::string& letters, cplx scale = 1.0) {
  Mat m = Mat::Identity(1, 1);
  for (char c : letters) m = kron(single(c), m);
  return scale * m;
}

inline std::string random_letters(std::mt19937_64& rng, std::size_t n) {
  static const char kOps[] = {'I', 'X', 'Y', 'Z'};
  std::uniform_int_distribution<int> d(0, 3);
  std::string s;
  for (std::size_t q = 0; q < n; ++q) s.push_back(kOps[d(rng)]);
  return s;
}

inline cplx quarter(int k) {
  static const cplx kI[] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
  return kI[((k % 4) + 4) % 4];
}

inline Mat random_hermitian(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> g;
  Mat a(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) a(r, c) = cplx(g(rng), g(rng));
  }
  return 0.5 * (a + a.adjoint());
}

/// Matrix exponential exp(-i a H) for Hermitian H by eigendecomposition.
inline Mat expi(const Mat& h, double a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Eigen::VectorXcd d(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) d(k) = std::polar(1.0, -a * es.eigenvalues()(k));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace oracle
