#pragma once

// Stroboscopic gate sequences and their effective Hamiltonians.
//
// Units: hbar = 1 and, unless a caller passes otherwise, every gate lasts one
// time unit tau. Only estimate_cycle_time() deals in physical seconds.

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "strobe/lattice.hpp"
#include "strobe/linalg.hpp"
#include "strobe/pauli.hpp"

namespace strobe {

/// exp(-i * angle * generator), lasting `duration`.
struct Gate {
  PauliString generator;
  double angle = 0.0;
  double duration = 1.0;

  MatrixXcd unitary(std::size_t dense_cap = kDefaultDenseCap) const;
};

class GateSequence {
 public:
  GateSequence() = default;
  explicit GateSequence(std::string label) : label_(std::move(label)) {}

  /// Throws std::invalid_argument for a non-Hermitian generator, a non-finite
  /// angle, a non-positive duration or a qubit-count mismatch.
  void push_back(Gate gate);
  void append(const GateSequence& other);

  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }
  std::size_t n_qubits() const;
  double total_duration() const;
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  /// U_n ... U_2 U_1, where gates_[0] is applied first.
  MatrixXcd unitary(std::size_t dense_cap = kDefaultDenseCap) const;

  nlohmann::json to_json() const;
  static GateSequence from_json(const nlohmann::json& j);

 private:
  std::string label_;
  std::vector<Gate> gates_;
};

/// The three two-body generators of the 4-body construction.
using Generators = std::array<PauliString, 3>;

/// Sigma_1 = Z Y I I, Sigma_2 = I X Y I, Sigma_3 = I I X Z.
Generators vertex_generators();
/// Cyclic relabelling X -> Y -> Z -> X of the vertex generators; the echoed
/// sequence built from them produces X X X X.
Generators plaquette_generators();
PauliString cyclic_permute(const PauliString& p);
Generators cyclic_permute(const Generators& g);
/// Places 4-qubit local generators on `sites` (local qubit k -> sites[k]) of an
/// n-qubit register.
Generators embed(const Generators& local, std::size_t n_qubits,
                 const std::array<int, 4>& sites);

/// U_123 = U_12(a,b) U_3(g) U_12(a,b)^dagger U_3(g)^dagger with
/// U_12 = U_2(b) U_1(a) U_2(b)^dagger U_1(a)^dagger; ten gates of length tau.
GateSequence u123(double alpha, double beta, double gamma, const Generators& gens,
                  double tau = 1.0);
/// u123(a, b, g) followed by u123(-a, b, -g); twenty gates.
GateSequence echoed_u123(double alpha, double beta, double gamma,
                         const Generators& gens, double tau = 1.0);

struct SequenceCoefficients {
  double chi = 0.0;  ///< a^2 b g^2 * 2 / (5 tau)
  double j_e = 0.0;  ///< chi (1 - 3 phi^2) / (a g), phi^2 = mean square angle
};
SequenceCoefficients predicted_coefficients(double alpha, double beta,
                                            double gamma, double tau = 1.0);

/// Leading-order effective terms of u123 (or the echoed sequence), written in
/// the sign convention of H_eff = (i/t) ln U:
///   Sigma1 Sigma2 Sigma3 string: -J_e   (the H_0 = -J_e ZZZZ vertex form)
///   Sigma2:                      +chi
///   Sigma3:                      -2 b chi / g           (single sequence only)
///   Sigma1 Sigma2 string:        +chi / a               (single sequence only)
///   Sigma2 Sigma3 string:        -chi / g               (single sequence only)
PauliSum predicted_terms(double alpha, double beta, double gamma,
                         const Generators& gens, bool echoed, double tau = 1.0);

/// The Sigma1 Sigma2 Sigma3 (four-body) and Sigma2 strings for `gens`.
PauliString four_body_term(const Generators& gens);

struct TermComparison {
  PauliString term;
  double measured = 0.0;
  double predicted = 0.0;
};

struct EffectiveHamiltonianReport {
  PauliSum h_eff;
  double total_time = 0.0;
  /// h_eff with every target string removed.
  PauliSum residual;
  std::vector<TermComparison> target_coefficients;
  /// Largest anti-Hermitian coefficient removed by symmetrization.
  double asymmetry = 0.0;
};

struct EffectiveHamiltonianOptions {
  double prune_tolerance = kDefaultPruneTolerance;
  std::size_t dense_cap = kDefaultDenseCap;
  double branch_tolerance = kBranchTolerance;
};

/// h_eff = (i / t) ln(U_n ... U_1) decomposed into Pauli strings. `targets`
/// holds predicted coefficients (real parts) for the terms of interest.
/// Throws BranchCutError when an eigenphase sits at the branch cut.
EffectiveHamiltonianReport effective_hamiltonian(
    const GateSequence& seq, const PauliSum& targets = PauliSum(),
    const EffectiveHamiltonianOptions& opts = {});

/// sum_j (theta_j / t) Sigma_j + sum_{j<k} (i theta_j theta_k / 2t)[Sigma_j, Sigma_k],
/// built with Pauli algebra only.
PauliSum bch_second_order(const GateSequence& seq);

// -- perturbation-order scans ------------------------------------------------

struct OrderScanOptions {
  /// Decomposition floor; smaller than the default pruning so tiny-phi
  /// coefficients survive.
  double prune_floor = 1e-15;
  /// Points whose |coefficient| is below drop_factor * prune_floor are dropped.
  double drop_factor = 10.0;
  std::size_t min_points = 3;
};

struct TermFit {
  PauliString term;
  bool is_target = false;
  std::vector<double> phis;
  std::vector<double> coefficients;  ///< signed real coefficients
  double slope = 0.0;
  double intercept = 0.0;
  bool degenerate = false;  ///< too few usable points to fit
};

struct OrderScanResult {
  std::vector<double> phis;
  std::vector<TermFit> terms;
  /// Coefficient norm of all non-target terms per phi, and its fitted slope.
  std::vector<double> residual_norms;
  double residual_slope = 0.0;
  bool residual_degenerate = false;

  const TermFit* find(const PauliString& term) const;
};

/// Weighted least-squares slope of log|c| against log(phi). Weights grow with
/// the distance of |c| from the floor: w = 1 / (1e-6 + (floor / |c|)^2).
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t used_points = 0;
  bool degenerate = true;
};
LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y,
                      double floor, double drop_factor = 10.0,
                      std::size_t min_points = 3);

/// Evaluates effective_hamiltonian(factory(phi)) for each phi and fits every
/// Pauli term. Requires at least four positive phi values with max/min >= 2.
OrderScanResult order_scan(const std::function<GateSequence(double)>& factory,
                           std::span<const double> phis,
                           std::span<const PauliString> target_terms,
                           const OrderScanOptions& opts = {});

// -- serial vertex/plaquette composition -------------------------------------

struct CompositionReport {
  /// max |coefficient| of (i/T)[ln(U_p U_v) - ln U_p - ln U_v], T = total time.
  double error = 0.0;
  PauliSum difference;
  /// Set when every vertex gate commutes with every plaquette gate; the error
  /// is then exactly zero and no logarithm is taken.
  bool commuting = false;
};

struct SerialComposition {
  GateSequence sequence;
  CompositionReport report;
};

SerialComposition serial_compose(const GateSequence& vertex_seq,
                                 const GateSequence& plaquette_seq,
                                 const EffectiveHamiltonianOptions& opts = {});

// -- timing ------------------------------------------------------------------

/// U operations per vertex or plaquette term in the echoed sequence.
inline constexpr int kUOperationsPerTerm = 20;
/// Elementary-gate multiplier per U that reproduces the 720 us serial cycle for
/// the 3x3 torus at tau = 500 ns.
inline constexpr int kSerialGatesPerU = 4;

/// (#vertices + #plaquettes) * 20 * gates_per_u * tau / parallel_factor.
/// parallel_factor = 1 is the completely serial schedule.
double estimate_cycle_time(const TorusLattice& lattice, double tau_seconds,
                           int gates_per_u = kSerialGatesPerU,
                           double parallel_factor = 1.0);

}  // namespace strobe
