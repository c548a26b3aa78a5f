#include "strobe/linalg.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace strobe {

MatrixXcd principal_log_unitary(const MatrixXcd& u, double branch_tolerance) {
  Eigen::ComplexSchur<MatrixXcd> schur(u);
  if (schur.info() != Eigen::Success) {
    throw std::runtime_error("principal_log_unitary: Schur decomposition failed");
  }
  const MatrixXcd& t = schur.matrixT();
  const MatrixXcd& q = schur.matrixU();
  const Eigen::Index n = t.rows();
  // A normal matrix has a diagonal Schur form; the strictly upper part is
  // rounding noise for unitary input.
  Eigen::VectorXcd log_diag(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double phase = std::arg(t(k, k));
    if (std::numbers::pi - std::abs(phase) < branch_tolerance) {
      throw BranchCutError("principal_log_unitary: eigenphase " +
                               std::to_string(phase) + " is within " +
                               std::to_string(branch_tolerance) + " of the branch cut",
                           phase);
    }
    log_diag(k) = cplx(std::log(std::abs(t(k, k))), phase);
  }
  return q * log_diag.asDiagonal() * q.adjoint();
}

MatrixXcd expm_hermitian(const MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitize(h));
  const Eigen::VectorXd& w = es.eigenvalues();
  Eigen::VectorXcd phases(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) phases(k) = std::polar(1.0, -w(k) * t);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double unitarity_error(const MatrixXcd& u) {
  const MatrixXcd d = u.adjoint() * u - MatrixXcd::Identity(u.rows(), u.cols());
  return d.cwiseAbs().maxCoeff();
}

MatrixXcd hermitize(const MatrixXcd& a) { return 0.5 * (a + a.adjoint()); }

double trace_distance(const MatrixXcd& a, const MatrixXcd& b) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitize(a - b), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double von_neumann_entropy(const MatrixXcd& rho, double floor) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitize(rho), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double p = es.eigenvalues()(k);
    // Eigenvalues within `floor` of 0 or 1 contribute at most ~floor.
    if (p > floor && p < 1.0 - floor) s -= p * std::log(p);
  }
  return s;
}

}  // namespace strobe
