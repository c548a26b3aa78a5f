#pragma once

// Engineered dissipation for stabilizer Hamiltonians.
//
// The master equation is
//   d rho / dt = -i [H, rho] + sum_c (2 c rho c^dagger - c^dagger c rho - rho c^dagger c)
// with every jump operator c = sqrt(rate) * op and op a PauliSum.
//
// Density matrices on n <= 8 qubits are handled in the Hermitian Pauli basis
// rho = 2^-n sum_P r_P P with real r_P. Every superoperator term A rho B moves
// a basis string P to A P B, so the generator is block diagonal over the
// cosets of the group generated by the masks of A B. For stabilizer models
// those blocks are tiny (64 x 64 on the L = 2 torus).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "strobe/lattice.hpp"
#include "strobe/pauli.hpp"
#include "strobe/spectra.hpp"

namespace strobe {

inline constexpr std::size_t kMaxDensityQubits = 8;

// -- excitation operators -------------------------------------------------------

struct ExcitationOps {
  int link = -1;
  ExcitationType type = ExcitationType::Electric;
  std::array<int, 2> neighborhoods{};  ///< N, N' (vertex or plaquette indices)
  PauliSum create;                     ///< E^dagger
  PauliSum annihilate;                 ///< E
  PauliSum translate;                  ///< T: moves an excitation from N to N'
  PauliSum translate_adjoint;          ///< T^dagger
};

/// E^dagger = flip (1 + h)(1 + h') / 4 and T = flip (1 - h)(1 + h') / 4.
ExcitationOps excitation_ops(const PauliString& flip, const PauliString& h,
                             const PauliString& h_prime);

/// Toric specialization: flip X on `link` between its two vertices for
/// electric excitations, Z between its two plaquettes for magnetic ones.
ExcitationOps excitation_ops(const TorusLattice& lat, int link, ExcitationType type);

/// Toric code H0 = -J sum A_v - J sum B_p.
SparseHamiltonian toric_hamiltonian(const TorusLattice& lat, double j = 1.0);

// -- models ------------------------------------------------------------------------

struct JumpOperator {
  std::string label;
  double rate = 0.0;  ///< c = sqrt(rate) * op
  PauliSum op;
};

class LindbladModel {
 public:
  LindbladModel() = default;
  /// Throws std::invalid_argument for negative or non-finite rates or
  /// operators on the wrong register.
  LindbladModel(SparseHamiltonian hamiltonian, std::vector<JumpOperator> jumps);

  std::size_t n_qubits() const { return hamiltonian_.n_qubits(); }
  const SparseHamiltonian& hamiltonian() const { return hamiltonian_; }
  const std::vector<JumpOperator>& jumps() const { return jumps_; }
  void add_jump(JumpOperator jump);

  std::optional<double> temperature_target;
  std::optional<double> p;
  std::optional<double> gap;

  nlohmann::json to_json() const;

 private:
  SparseHamiltonian hamiltonian_;
  std::vector<JumpOperator> jumps_;
};

/// The bath temperature assigned to p: -gap / ln p, and 0 at p = 0.
double temperature_target(double p, double gap);
/// The temperature at which the constructed up/down rates obey detailed
/// balance, gap / ln((1 - p) / p).
double detailed_balance_temperature(double p, double gap);

/// Thermalizing set over every (link, type): sqrt((1-p) lambda/2) E,
/// sqrt(p lambda/2) E^dagger, sqrt(gamma/4) T, sqrt(gamma/4) T^dagger.
/// Throws std::invalid_argument unless 0 <= p < 1 and the rates are >= 0.
LindbladModel thermal_jump_set(const TorusLattice& lat, double p, double lambda_star,
                               double gamma_star, double j = 1.0);

/// Zero-temperature set sqrt(lambda)(E + T), sqrt(lambda)(E + T^dagger).
LindbladModel cooling_jump_set(const TorusLattice& lat, double lambda_star, double j = 1.0);

/// Depolarizing noise as jumps sqrt(rate/6) P, P in {X, Y, Z}, on every
/// qubit, so each qubit suffers a uniformly random Pauli error at `rate` per
/// unit time.
void add_depolarizing(LindbladModel& model, double rate);

// -- Pauli-basis vectors -------------------------------------------------------------

/// r_P = Tr(P rho) indexed by x_mask | z_mask << n.
Eigen::VectorXd to_pauli_vector(const MatrixXcd& rho, std::size_t n_qubits);
MatrixXcd from_pauli_vector(const Eigen::VectorXd& r, std::size_t n_qubits);

/// Hermiticity, trace and positivity diagnostics.
struct DensityCheck {
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  bool ok(double tol = 1e-10) const {
    return trace_error <= tol && hermiticity_error <= tol && min_eigenvalue >= -tol;
  }
};
DensityCheck check_density_matrix(const MatrixXcd& rho);

/// exp(-H / T) / Z; T = 0 gives the normalized ground-space projector.
MatrixXcd gibbs_state(const SparseHamiltonian& h, double temperature, double degeneracy_tol = 1e-9);

// -- generator -------------------------------------------------------------------------

class Liouvillian {
 public:
  /// Throws DenseCapError above kMaxDensityQubits.
  explicit Liouvillian(const LindbladModel& model);

  std::size_t n_qubits() const { return n_; }
  std::size_t dimension() const { return std::size_t{1} << (2 * n_); }
  std::size_t block_count() const { return reps_.size(); }
  /// Rank of the group generated by the superoperator terms.
  std::size_t group_rank() const { return group_rank_; }
  std::size_t block_dimension() const { return std::size_t{1} << group_rank_; }
  /// Coset representative of block b (pivot bits of the group cleared).
  std::uint64_t block_representative(std::size_t b) const { return reps_[b]; }
  /// Pauli-basis indices of the members of block b.
  const std::vector<std::uint32_t>& members(std::size_t b) const { return members_[b]; }
  const Eigen::MatrixXd& block(std::size_t b) const { return blocks_[b]; }
  std::size_t block_of(std::uint64_t index) const { return block_of_[index]; }

  void apply(std::span<const double> in, std::span<double> out) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const;
  MatrixXcd apply(const MatrixXcd& rho) const;

 private:
  std::size_t n_ = 0;
  std::size_t group_rank_ = 0;
  std::vector<std::uint64_t> reps_;
  std::vector<std::vector<std::uint32_t>> members_;
  std::vector<std::uint32_t> block_of_;
  std::vector<std::uint32_t> position_;
  std::vector<Eigen::MatrixXd> blocks_;
};

// -- evolution --------------------------------------------------------------------------

struct EvolveOptions {
  double abs_tol = 1e-11;
  double rel_tol = 1e-11;
  double initial_dt = 1e-3;
  double min_dt = 1e-14;
};

struct Evolution {
  std::vector<double> times;
  std::vector<MatrixXcd> states;
  double max_trace_error = 0.0;
  double min_eigenvalue = 0.0;
  std::size_t steps = 0;
};

/// Integrates the master equation with an adaptive Dormand-Prince 5(4) step
/// controller (error per step below abs_tol + rel_tol |r|) and records the
/// state at every requested time (ascending, >= 0). Throws std::runtime_error
/// when the step size falls below min_dt.
Evolution evolve(const Liouvillian& gen, const MatrixXcd& rho0, const std::vector<double>& times,
                 const EvolveOptions& opts = {});

// -- stationary states ----------------------------------------------------------------------

struct StationaryReport {
  MatrixXcd rho;                         ///< trace-one null vector of the identity block
  std::size_t null_dimension = 0;        ///< over the whole generator
  std::size_t trace_block_null_dimension = 0;
  std::vector<std::pair<std::uint64_t, std::size_t>> null_blocks;  ///< (representative, dim)
  double residual = 0.0;                 ///< ||L rho||_F
};

/// Null space of every block from its singular values (relative tolerance
/// `tol`). Throws std::runtime_error when the identity block has no null
/// vector.
StationaryReport stationary_state(const Liouvillian& gen, double tol = 1e-10);

/// Null dimension restricted to blocks whose strings commute with every
/// operator in `sector` (e.g. the logical Z loops).
std::size_t sector_null_dimension(const StationaryReport& rep, std::size_t n_qubits,
                                  std::span<const PauliString> sector);

/// ||L rho||_F.
double generator_residual(const Liouvillian& gen, const MatrixXcd& rho);

/// Tr(P rho).
double pauli_expectation(const PauliString& p, const MatrixXcd& rho);

/// Mean of (1 - <h>) / 2 over the vertex and plaquette stabilizers.
double excitation_density(const TorusLattice& lat, const MatrixXcd& rho);

// -- trajectories ------------------------------------------------------------------------------

struct TrajectoryOptions {
  double dt = 1e-3;
  std::uint64_t seed = 1;
  std::size_t n_samples = 1000;
};

struct TrajectoryStats {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> mean;    ///< [observable][time]
  std::vector<std::vector<double>> stderr_; ///< [observable][time]
  std::vector<std::size_t> jump_counts;     ///< per sample
};

/// Monte Carlo wave-function unraveling (waiting-time algorithm with RK4
/// propagation of the no-jump evolution). Samples run in parallel; each has its
/// own generator seeded from (seed, sample index), so results do not depend on
/// the thread count.
TrajectoryStats trajectories(const LindbladModel& model, const Eigen::VectorXcd& psi0,
                             const std::vector<double>& times,
                             const std::vector<std::pair<std::string, PauliSum>>& observables,
                             const TrajectoryOptions& opts);
/// Same algorithm on one thread; reference for tests and benchmarks.
TrajectoryStats trajectories_serial(const LindbladModel& model, const Eigen::VectorXcd& psi0,
                                    const std::vector<double>& times,
                                    const std::vector<std::pair<std::string, PauliSum>>& observables,
                                    const TrajectoryOptions& opts);

std::string trajectory_csv(const TrajectoryStats& stats);

}  // namespace strobe
