#pragma once

// Scenario runner: configuration, noise, run records and figure data.
//
// A scenario is described by one INI file. Every field is validated before
// any computation starts, every emitted file is written atomically, and the
// metric stream of a run depends only on the configuration.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "strobe/lattice.hpp"
#include "strobe/lindblad.hpp"
#include "strobe/sequence.hpp"
#include "strobe/spectra.hpp"

namespace strobe {

enum class ScenarioKind {
  SequenceScan,
  Spectrum,
  FidelityScan,
  Thermalize,
  Cool,
  Pump,
  Eliminate,
  Entropy,
};

const char* to_string(ScenarioKind k);
/// Accepts the CLI names: sequence-scan (or sequence-order-scan), spectrum,
/// fidelity-scan, thermalize, cool (or cool-with-noise), pump, eliminate,
/// entropy.
ScenarioKind parse_scenario(const std::string& s);

/// Depolarizing error on the support of every elementary gate.
struct NoiseModel {
  double epg = 0.0;
  std::string channel = "depolarizing";
  /// Empty when valid.
  std::vector<std::string> problems() const;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::FidelityScan;
  std::uint64_t seed = 1;
  std::string output_dir = "strobe-out";

  int L = 2;

  // gate angles; phi (when set) overrides alpha, beta and gamma
  double alpha = 0.1;
  double beta = 0.1;
  double gamma = 0.1;
  std::optional<double> phi;
  std::vector<double> phi_grid{0.05, 0.08, 0.12, 0.2};
  double tau = 1.0;
  double tau_seconds = 500e-9;
  int gates_per_u = kSerialGatesPerU;

  // perturbed Hamiltonian
  double j = 1.0;
  double h_z = 0.05;
  std::vector<double> chi_grid{0.0, 0.1, 0.2, 0.3};
  int n_eigenvalues = 6;
  ChiPairing pairing = ChiPairing::SequenceGenerated;
  double eigen_tolerance = 1e-8;
  int block_size = 6;
  int max_basis = 96;

  // dissipation
  double p = 0.1;
  double lambda_star = 1.0;
  double gamma_star = 1.0;
  double t_final = 20.0;
  int n_times = 21;
  std::vector<double> ratio_grid{10.0, 30.0, 100.0, 300.0};  ///< Gamma_c / Gamma_e

  // ancilla pump
  double theta = 0.7853981633974483;
  double gamma20 = 1.0;
  double rabi = 1000.0;

  // adiabatic elimination
  std::vector<double> g_grid{0.01, 0.02, 0.04};
  std::vector<double> lambda_grid{1.0, 2.0, 4.0};
  double gamma_mixed = 1.0;

  NoiseModel noise;
  std::vector<double> epg_grid{1e-4, 3e-4, 1e-3};

  double abs_tol = 1e-11;
  double rel_tol = 1e-11;

  std::size_t samples = 0;  ///< trajectory samples for thermalize; 0 disables
  double trajectory_dt = 1e-3;

  /// Every problem with the configuration, one line each. Empty when valid.
  std::vector<std::string> problems() const;
  /// Throws ConfigError listing problems() when non-empty.
  void validate() const;

  /// Canonical INI text with every field, in a fixed order.
  std::string to_ini() const;
  nlohmann::json to_json() const;
  /// FNV-1a of to_ini().
  std::uint64_t hash() const;

  /// Unknown sections or keys and unparsable values are ConfigErrors.
  static ScenarioConfig from_ini_string(const std::string& text);
  static ScenarioConfig from_ini_file(const std::filesystem::path& path);

  /// Sets one field by its "section.key" name.
  void set(const std::string& name, const std::string& value);

  /// STROBE_OUTPUT_DIR overrides output_dir when set and non-empty.
  std::filesystem::path resolved_output_dir() const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::vector<std::string>& problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Every configurable field as "section.key" with a one-line description.
struct ConfigField {
  std::string name;
  std::string help;
};
const std::vector<ConfigField>& config_fields();

// -- records ------------------------------------------------------------------------

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// One row of the metric stream: a step label and named values.
struct MetricRow {
  std::string step;
  std::vector<std::pair<std::string, double>> values;
};

struct RunRecord {
  std::string scenario;
  std::uint64_t config_hash = 0;
  std::string version;
  double wall_time = 0.0;                 ///< seconds; not part of the metric stream
  std::string omega_definition;
  std::vector<MetricRow> metrics;
  std::vector<Assertion> assertions;
  std::vector<std::filesystem::path> outputs;
  nlohmann::json summary;

  bool passed() const;
  /// "# schema: strobe.metrics/1" then step,name,value; byte-stable.
  std::string metrics_csv() const;
  nlohmann::json to_json() const;
};

const char* library_version();

/// Gates per unit time of a schedule that applies its elementary gates one
/// after another, each lasting tau.
double gate_frequency(double tau);
extern const char* const kOmegaDefinition;

/// Validates, dispatches and writes <output>/<scenario>_*.csv plus
/// <scenario>_record.json. Throws ConfigError before any work when invalid.
RunRecord run(const ScenarioConfig& config);

// -- scenario kernels ---------------------------------------------------------------

struct CoolingPoint {
  double ratio = 0.0;         ///< Gamma_c / Gamma_e
  double gamma_e = 0.0;
  double energy = 0.0;        ///< Tr(H0 rho_ss)
  double excitation_density = 0.0;
  double temperature = 0.0;   ///< 2 J / ln((1 - n) / n); inf when n >= 1/2
  double residual = 0.0;      ///< ||L rho_ss||
  double drift = 0.0;         ///< ||L rho_ss|| / ||L||-scale; flagged when above tolerance
};

struct CoolingReport {
  std::vector<CoolingPoint> points;
  double noiseless_density = 0.0;  ///< stationary excitation density with no noise
  /// Least-squares fit of T = a * gap / ln(ratio) + b.
  double fit_scale = 0.0;
  double fit_offset = 0.0;
  double fit_rms = 0.0;
  double rank_correlation = 0.0;   ///< Spearman between ratio and -T
  bool steady = true;
  nlohmann::json to_json() const;
};

/// Temperature of a stabilizer population with flip energy 2 J.
double effective_temperature(double excitation_density, double j = 1.0);

/// Stationary states of the cooling set plus depolarizing noise at
/// Gamma_e = lambda_star / ratio, for every ratio of the config.
CoolingReport cool_with_noise(const ScenarioConfig& config);

struct EntropyPoint {
  double epg = 0.0;
  double delta_s = 0.0;
};

struct EntropyReport {
  std::vector<EntropyPoint> points;
  double exponent = 0.0;   ///< slope of ln dS against ln EPG over positive EPG
  double prefactor = 0.0;
  std::size_t gates = 0;   ///< gates in one cycle
  nlohmann::json to_json() const;
};

/// Runs one echoed stroboscopic cycle on the four-qubit vertex register from
/// |0000>, applying the noise channel after each gate, and reports the von
/// Neumann entropy of the final state.
double cycle_entropy(const GateSequence& cycle, const NoiseModel& noise);
EntropyReport entropy_per_gate(const ScenarioConfig& config);

/// Depolarizing channel with probability epg on the qubits in `support`:
/// rho -> (1 - epg) rho + epg / (4^w - 1) sum_{P != I} P rho P.
MatrixXcd depolarize(const MatrixXcd& rho, std::uint64_t support, std::size_t n_qubits,
                     double epg);

// -- figure data ---------------------------------------------------------------------

enum class FigureKind { Spectrum, Fidelity };

class SchemaMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes the CSV for `kind` to `path`. When `path` already exists with a
/// different schema line, throws SchemaMismatch and leaves it untouched.
void emit_figure_data(FigureKind kind, const FidelityScan& scan, const std::filesystem::path& path);

}  // namespace strobe
