#pragma once

// Ancilla preparation and the system-reservoir toy model.
//
// The thermal ancilla is a Lambda system: levels |0> and |1> carry the
// pseudospin and |2> decays quickly to |0>. A pulse of area a on the |j> <-> |k>
// transition is H = Omega (|j><k| + |k><j|) for a time a / Omega, so area
// pi/2 moves the population completely and area theta leaves cos(theta) of
// the amplitude behind.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace strobe {

struct PumpProtocol {
  double theta = 0.0;
  double gamma20 = 1.0;      ///< decay rate |2> -> |0>
  double rabi = 1000.0;      ///< pulse Rabi rate Omega
  double wait_factor = 20.0; ///< waits last wait_factor / gamma20
  double gap = 4.0;          ///< pair-creation energy used for T_eff
  std::array<double, 2> initial{0.5, 0.5};  ///< populations of |0>, |1>
  /// Stop after steps i-ii (the zero-temperature shortcut).
  bool ground_only = false;
};

struct PumpStep {
  std::string name;
  double duration = 0.0;
  std::array<double, 3> populations{};
};

struct PumpResult {
  Eigen::Matrix2cd rho;        ///< reduced state on {|0>, |1>}
  double residual_excited = 0.0;
  double t_eff = 0.0;          ///< gap / (2 ln cot theta); 0 for pure, inf at theta = pi/4
  std::vector<PumpStep> steps;
  std::vector<std::string> warnings;
  nlohmann::json to_json() const;
};

/// Runs steps i-v as three-level master-equation segments (exact
/// exponentials of the 9 x 9 generator). Throws std::invalid_argument for
/// non-positive rates or initial populations that are not a distribution.
PumpResult pump_ancilla(const PumpProtocol& protocol);

double pump_temperature(double theta, double gap);

// -- adiabatic elimination -----------------------------------------------------------

struct EliminationOptions {
  std::vector<double> g_grid{0.01, 0.02, 0.04};
  std::vector<double> lambda_grid{1.0, 2.0, 4.0};
  double gamma = 1.0;            ///< rate of the maximally mixed ancilla
  double max_ratio = 0.1;        ///< largest accepted g / lambda
  double fit_tolerance = 2e-2;   ///< rms of ln P residuals for a Markovian decay
};

struct EliminationPoint {
  double g = 0.0;
  double lambda = 0.0;
  double rate = 0.0;     ///< fitted pair-annihilation rate of the reduced dynamics
  double fit_rms = 0.0;
  bool markovian = true;
};

struct EliminationResult {
  std::vector<EliminationPoint> points;
  double g_exponent = 0.0;
  double lambda_exponent = 0.0;
  double log_prefactor = 0.0;
  double rms_free = 0.0;
  /// rms of ln(rate) fits with the lambda exponent pinned to +1 and -1.
  double rms_lambda = 0.0;
  double rms_inverse_lambda = 0.0;
  double prefactor_inverse_lambda = 0.0;  ///< mean of rate * lambda / g^2
  std::string preferred;                  ///< "lambda" or "1/lambda"
  nlohmann::json to_json() const;
};

/// Toy model: system spins 0-2 with neighbourhoods Z0 Z1 and Z1 Z2 around
/// spin 1, a thermal ancilla (3) and a maximally mixed ancilla (4), coupled by
/// H_sr = g (E^dagger s-_T + T s-_M + h.c.) in the frame where the ancilla
/// splitting matches the pair gap. The thermal ancilla decays with
/// sqrt(lambda/2) s-, the mixed one with sqrt(gamma/4) s+-. Starting from an
/// excited pair, the decay of the pair population is fitted per grid point.
EliminationPoint elimination_rate(double g, double lambda, const EliminationOptions& opts = {});
EliminationResult adiabatic_elimination_probe(const EliminationOptions& opts = {});

}  // namespace strobe
