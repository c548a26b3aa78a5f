#pragma once

// Matrix-free exact diagonalization of the perturbed toric code
//   H = -J_e sum_v A_v - J_m sum_p B_p - h_z sum_i Z_i + chi sum_<ij> X_i Y_j
// with energies in units of J_e = J_m.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "strobe/lattice.hpp"
#include "strobe/pauli.hpp"
#include "strobe/pauli_operator.hpp"

namespace strobe {

enum class ChiPairing {
  /// X on the second and Y on the third link of every vertex and plaquette
  /// neighbourhood: the surviving two-body term of the echoed sequence.
  SequenceGenerated,
  /// X_i Y_j for every ordered medial-lattice edge (i < j).
  AllNearestNeighbor,
};

const char* to_string(ChiPairing p);
ChiPairing parse_pairing(const std::string& s);

/// Ordered (X-link, Y-link) pairs of the chi perturbation.
std::vector<std::pair<int, int>> chi_pairs(const TorusLattice& lat, ChiPairing pairing);

struct HamiltonianParams {
  double j_e = 1.0;
  double j_m = 1.0;
  double chi = 0.0;
  double h_z = 0.0;
  ChiPairing pairing = ChiPairing::SequenceGenerated;
};

class SparseHamiltonian {
 public:
  SparseHamiltonian() = default;
  /// Throws std::invalid_argument for a non-Hermitian string or a size mismatch.
  SparseHamiltonian(std::size_t n_qubits, std::vector<std::pair<double, PauliString>> terms);

  std::size_t n_qubits() const { return n_; }
  std::uint64_t dimension() const { return std::uint64_t{1} << n_; }
  const std::vector<std::pair<double, PauliString>>& terms() const { return terms_; }
  const PauliSum& sum() const { return sum_; }
  const PauliOperator& op() const { return op_; }

  void apply(std::span<const cplx> in, std::span<cplx> out) const { op_.apply(in, out); }
  void apply_block(std::span<const cplx> in, std::span<cplx> out, std::size_t cols) const {
    op_.apply_block(in, out, cols);
  }
  void apply_serial(std::span<const cplx> in, std::span<cplx> out) const {
    op_.apply_serial(in, out);
  }
  double energy(std::span<const cplx> psi) const { return op_.expectation(psi).real(); }
  MatrixXcd to_dense(std::size_t dense_cap = 10) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::pair<double, PauliString>> terms_;
  PauliSum sum_;
  PauliOperator op_;
};

SparseHamiltonian build_hamiltonian(const TorusLattice& lat, const HamiltonianParams& params);

// -- eigensolver ---------------------------------------------------------------

struct EigenOptions {
  int block_size = 6;
  int max_basis = 96;
  double tolerance = 1e-8;  ///< on ||H v - lambda v|| per pair
  int max_iterations = 3000;
  std::uint64_t seed = 20240531;
};

struct SpectrumResult {
  std::vector<double> eigenvalues;        ///< ascending
  std::vector<Eigen::VectorXcd> eigenvectors;
  std::vector<double> residuals;
  int iterations = 0;
  int matvecs = 0;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// Applies H to one or more column-major vectors; the column count is
/// in.size() / dim.
using MatVec = std::function<void(std::span<const cplx>, std::span<cplx>)>;

/// Thick-restart block Lanczos with full reorthogonalization (two block
/// Gram-Schmidt passes). The block size is raised to k + 2 when smaller.
/// Deterministic for a fixed seed and thread count.
SpectrumResult block_krylov_lowest(const MatVec& apply, std::uint64_t dim, int k,
                                   const EigenOptions& opts = {});

SpectrumResult lowest_eigenpairs(const SparseHamiltonian& h, int k,
                                 const EigenOptions& opts = {});

// -- ground-state fidelity -----------------------------------------------------

/// The four ground states of the unperturbed model as joint eigenstates of
/// the two logical Z loops: the plaquette projector applied to |0...0> and to
/// its images under the two logical X loops and their product.
std::vector<Eigen::VectorXcd> reference_ground_states(const TorusLattice& lat);

struct FidelityResult {
  Eigen::MatrixXcd overlaps;             ///< M_mn = <ref_m | psi_n>
  std::vector<double> per_state;         ///< |M_{m, pi(m)}| for the best assignment pi
  std::vector<int> assignment;
  double subspace = 0.0;                 ///< mean singular value of M
  bool manifold_ok = true;               ///< false unless both manifolds hold 4 states
};

FidelityResult ground_fidelity(std::span<const Eigen::VectorXcd> reference,
                               std::span<const Eigen::VectorXcd> perturbed);

struct FidelityPoint {
  double chi = 0.0;
  double subspace_fidelity = 0.0;
  std::vector<double> per_state;
  std::vector<double> eigenvalues;
  std::vector<double> residuals;
  double manifold_spread = 0.0;  ///< E_3 - E_0
  double gap = 0.0;              ///< E_4 - E_3
  std::optional<std::string> error;
};

struct FidelityScan {
  double h_z = 0.0;
  ChiPairing pairing = ChiPairing::SequenceGenerated;
  std::vector<FidelityPoint> points;
};

struct ScanOptions {
  ChiPairing pairing = ChiPairing::SequenceGenerated;
  int n_eigenvalues = 6;
  EigenOptions eigen;
};

/// A failing grid point records its error and the scan continues.
FidelityScan fidelity_scan(const TorusLattice& lat, std::span<const double> chis, double h_z,
                           const ScanOptions& opts = {});

/// "# schema: strobe.spectrum/1" then chi,h_z,index,eigenvalue,residual.
std::string spectrum_csv(const FidelityScan& scan);
/// "# schema: strobe.fidelity/1" then chi,subspace_fidelity,f1..f4,spread,gap,status.
std::string fidelity_csv(const FidelityScan& scan);

}  // namespace strobe
