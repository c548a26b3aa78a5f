#pragma once

// Exact n-qubit Pauli algebra in the symplectic (x, z) bit representation.
//
// Conventions used throughout the project:
//   * qubit q corresponds to bit q of a computational-basis index, so qubit 0
//     is the least-significant bit;
//   * in text form the leftmost letter is qubit 0, matching the way
//     neighbourhood operators such as "Z Y I I" are written (first spin of the
//     vertex or plaquette first);
//   * (x_q, z_q) = (1, 1) denotes Y itself, so a string with phase 0 is
//     Hermitian and the overall operator is i^phase_quarter * (P_0 x P_1 ...).

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace strobe {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

inline constexpr std::size_t kMaxQubits = 64;
inline constexpr std::size_t kDefaultDenseCap = 12;
inline constexpr double kDefaultPruneTolerance = 1e-12;

/// i^k for k taken mod 4.
cplx i_pow(int k);

class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::size_t n_qubits);
  PauliString(std::size_t n_qubits, std::uint64_t x_mask, std::uint64_t z_mask,
              int phase_quarter = 0);

  /// Parses "XZIY", "-iZZ", "+i^3 XY" (spaces and '·' separators ignored).
  static PauliString parse(std::string_view text);
  /// Single-qubit operator `op` ('I','X','Y','Z') on `qubit`.
  static PauliString single(std::size_t n_qubits, std::size_t qubit, char op);
  /// Tensor product of (qubit, op) factors.
  static PauliString from_factors(
      std::size_t n_qubits,
      std::span<const std::pair<std::size_t, char>> factors);

  std::size_t n_qubits() const { return n_; }
  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }
  int phase_quarter() const { return phase_; }
  cplx phase_factor() const { return i_pow(phase_); }

  char op_at(std::size_t qubit) const;
  std::size_t weight() const;
  std::uint64_t support() const { return x_ | z_; }
  bool is_identity() const { return x_ == 0 && z_ == 0; }
  bool is_hermitian() const { return phase_ % 2 == 0; }

  /// Same masks with phase 0.
  PauliString normalized() const { return {n_, x_, z_, 0}; }
  PauliString adjoint() const;
  PauliString with_phase(int phase_quarter) const {
    return {n_, x_, z_, phase_quarter};
  }

  /// Symplectic commutation test; true iff ab == ba.
  bool commutes_with(const PauliString& other) const;

  /// Action on a computational basis state: P|b> = amplitude * |target>.
  struct BasisImage {
    std::uint64_t target;
    cplx amplitude;
  };
  BasisImage act(std::uint64_t basis) const;

  /// Quarter-phase exponent of P|b>, i.e. amplitude == i^act_quarter(b).
  int act_quarter(std::uint64_t basis) const;

  std::string str() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;
  friend auto operator<=>(const PauliString&, const PauliString&) = default;

 private:
  std::size_t n_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
  int phase_ = 0;
};

/// a * b with the exact quarter phase. Throws std::invalid_argument on a size
/// mismatch.
PauliString multiply(const PauliString& a, const PauliString& b);
inline PauliString operator*(const PauliString& a, const PauliString& b) {
  return multiply(a, b);
}

/// Sum of phase-normalized Pauli strings with complex coefficients.
/// Coefficients whose magnitude falls below the pruning tolerance are dropped.
class PauliSum {
 public:
  using TermMap = std::map<PauliString, cplx>;

  explicit PauliSum(std::size_t n_qubits = 0,
                    double prune_tolerance = kDefaultPruneTolerance);
  PauliSum(const PauliString& p, cplx coeff = 1.0,
           double prune_tolerance = kDefaultPruneTolerance);

  /// Identity times `coeff`.
  static PauliSum identity(std::size_t n_qubits, cplx coeff = 1.0);

  std::size_t n_qubits() const { return n_; }
  double prune_tolerance() const { return tol_; }
  void set_prune_tolerance(double tol);
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const TermMap& terms() const { return terms_; }

  /// Adds coeff * p; the phase of p is folded into the coefficient.
  void add(const PauliString& p, cplx coeff = 1.0);
  void add(const PauliSum& other, cplx scale = 1.0);
  /// Coefficient of the phase-normalized string (0 if absent).
  cplx coefficient(const PauliString& p) const;
  void erase(const PauliString& p);

  PauliSum adjoint() const;
  bool is_hermitian(double tol = 1e-12) const;
  /// Largest |coefficient| of (this - adjoint).
  double anti_hermitian_norm() const;
  /// (S + S^dagger) / 2.
  PauliSum hermitian_part() const;
  double max_abs_coefficient() const;
  /// Sqrt of the sum of |c|^2 over the terms.
  double coefficient_norm() const;
  PauliSum pruned(double tol) const;

  PauliSum& operator+=(const PauliSum& other);
  PauliSum& operator-=(const PauliSum& other);
  PauliSum& operator*=(cplx scale);
  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
  friend PauliSum operator-(PauliSum a, const PauliSum& b) { return a -= b; }
  friend PauliSum operator*(PauliSum a, cplx s) { return a *= s; }
  friend PauliSum operator*(cplx s, PauliSum a) { return a *= s; }
  friend PauliSum operator*(const PauliSum& a, const PauliSum& b);

  std::string str() const;
  /// JSON list of [string, re, im] triples.
  nlohmann::json to_json() const;
  static PauliSum from_json(const nlohmann::json& j, std::size_t n_qubits);

 private:
  std::size_t n_ = 0;
  double tol_ = kDefaultPruneTolerance;
  TermMap terms_;
};

/// ab - ba; empty when the strings commute.
PauliSum commutator(const PauliString& a, const PauliString& b);
PauliSum commutator(const PauliSum& a, const PauliSum& b);

class DenseCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MatrixXcd to_dense(const PauliString& p,
                   std::size_t dense_cap = kDefaultDenseCap);
MatrixXcd to_dense(const PauliSum& s,
                   std::size_t dense_cap = kDefaultDenseCap);

/// Coefficients c_P = Tr(P^dagger M) / 2^n over all 4^n strings.
/// Throws std::invalid_argument unless M is 2^n x 2^n.
PauliSum decompose(const MatrixXcd& m, std::size_t n_qubits,
                   double prune_tolerance = kDefaultPruneTolerance);

/// Sparse action of a string on a state vector without materializing a
/// matrix.
void apply_to_state(const PauliString& p, std::span<const cplx> in,
                    std::span<cplx> out);
std::vector<cplx> apply_to_state(const PauliString& p,
                                 std::span<const cplx> in);

}  // namespace strobe
