#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "strobe/pauli.hpp"

namespace strobe {

/// Raised when a unitary has an eigenphase within tolerance of +/-pi, where
/// the principal logarithm is discontinuous.
class BranchCutError : public std::runtime_error {
 public:
  BranchCutError(const std::string& what, double eigenphase)
      : std::runtime_error(what), eigenphase_(eigenphase) {}
  double eigenphase() const { return eigenphase_; }

 private:
  double eigenphase_;
};

inline constexpr double kBranchTolerance = 1e-6;

/// Principal logarithm of a unitary via its (diagonal) Schur form.
MatrixXcd principal_log_unitary(const MatrixXcd& u,
                                double branch_tolerance = kBranchTolerance);

/// exp(-i h t) for Hermitian h.
MatrixXcd expm_hermitian(const MatrixXcd& h, double t);

/// max |(U^dagger U - 1)_{ij}|.
double unitarity_error(const MatrixXcd& u);

/// Hermitian part (A + A^dagger)/2.
MatrixXcd hermitize(const MatrixXcd& a);

/// 1/2 ||a - b||_1 for Hermitian arguments.
double trace_distance(const MatrixXcd& a, const MatrixXcd& b);

/// -Tr(rho ln rho) using natural logs; eigenvalues below `floor` count as 0.
double von_neumann_entropy(const MatrixXcd& rho, double floor = 1e-14);

}  // namespace strobe
