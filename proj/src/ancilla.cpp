#include "strobe/ancilla.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "strobe/lindblad.hpp"

namespace strobe {

namespace {

using Matrix3c = Eigen::Matrix3cd;
using Matrix9c = Eigen::Matrix<cplx, 9, 9>;
using Vector9c = Eigen::Matrix<cplx, 9, 1>;

Matrix3c ket_bra(int a, int b) {
  Matrix3c m = Matrix3c::Zero();
  m(a, b) = 1.0;
  return m;
}

// Column-stacking vectorization: vec(A rho B) = (B^T kron A) vec(rho).
Matrix9c kron3(const Matrix3c& a, const Matrix3c& b) {
  Matrix9c out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
  }
  return out;
}

Matrix9c generator(const Matrix3c& h, const Matrix3c& c) {
  const Matrix3c id = Matrix3c::Identity();
  const Matrix3c cdc = c.adjoint() * c;
  return cplx(0, -1) * (kron3(id, h) - kron3(h.transpose(), id)) + 2.0 * kron3(c.conjugate(), c) -
         kron3(id, cdc) - kron3(cdc.transpose(), id);
}

}  // namespace

double pump_temperature(double theta, double gap) {
  const double s = std::sin(theta), c = std::cos(theta);
  if (std::abs(s) < 1e-12 || std::abs(c) < 1e-12) return 0.0;
  const double l = std::log(std::abs(c / s));
  if (std::abs(l) < 1e-12) return std::numeric_limits<double>::infinity();
  return gap / (2.0 * l);
}

PumpResult pump_ancilla(const PumpProtocol& pr) {
  if (!(pr.gamma20 > 0.0) || !(pr.rabi > 0.0) || !(pr.wait_factor > 0.0)) {
    throw std::invalid_argument("pump_ancilla: gamma20, rabi and wait_factor must be > 0");
  }
  if (pr.initial[0] < 0.0 || pr.initial[1] < 0.0 ||
      std::abs(pr.initial[0] + pr.initial[1] - 1.0) > 1e-12) {
    throw std::invalid_argument("pump_ancilla: initial populations must form a distribution");
  }
  if (!std::isfinite(pr.theta)) throw std::invalid_argument("pump_ancilla: theta must be finite");

  PumpResult res;
  if (pr.rabi < 100.0 * pr.gamma20) {
    res.warnings.push_back("insufficient time-scale separation: rabi / gamma20 = " +
                           std::to_string(pr.rabi / pr.gamma20) + " < 100");
  }
  const Matrix3c decay = std::sqrt(pr.gamma20 / 2.0) * ket_bra(0, 2);
  Matrix3c rho = Matrix3c::Zero();
  rho(0, 0) = pr.initial[0];
  rho(1, 1) = pr.initial[1];

  auto run = [&](const std::string& name, const Matrix3c& h, double t) {
    const Matrix9c gen = generator(h, decay) * t;
    const Matrix9c prop = gen.exp();
    Vector9c v = Eigen::Map<const Vector9c>(rho.data());
    v = prop * v;
    rho = Eigen::Map<const Matrix3c>(v.data());
    rho = 0.5 * (rho + rho.adjoint()).eval();
    res.steps.push_back({name, t, {rho(0, 0).real(), rho(1, 1).real(), rho(2, 2).real()}});
  };
  auto pulse = [&](const std::string& name, int a, int b, double area) {
    run(name, pr.rabi * (ket_bra(a, b) + ket_bra(b, a)), std::abs(area) / pr.rabi);
  };
  const double wait = pr.wait_factor / pr.gamma20;
  const double half_pi = std::numbers::pi / 2.0;

  pulse("i: pi pulse 1->2", 1, 2, half_pi);
  run("ii: wait", Matrix3c::Zero(), wait);
  if (!pr.ground_only) {
    pulse("iii: pi pulse 0->1", 0, 1, half_pi);
    pulse("iv: theta pulse 1->2", 1, 2, pr.theta);
    run("v: wait", Matrix3c::Zero(), wait);
  }
  res.residual_excited = rho(2, 2).real();
  if (res.residual_excited > 1e-8) {
    res.warnings.push_back("residual |2> population " + std::to_string(res.residual_excited));
  }
  res.rho = rho.topLeftCorner<2, 2>();
  res.t_eff = pr.ground_only ? 0.0 : pump_temperature(pr.theta, pr.gap);
  return res;
}

nlohmann::json PumpResult::to_json() const {
  nlohmann::json j;
  j["rho"] = {{rho(0, 0).real(), rho(0, 1).real(), rho(0, 1).imag()}, {rho(1, 1).real()}};
  j["populations"] = {rho(0, 0).real(), rho(1, 1).real()};
  j["residual_excited"] = residual_excited;
  j["t_eff"] = std::isinf(t_eff) ? nlohmann::json("inf") : nlohmann::json(t_eff);
  j["steps"] = nlohmann::json::array();
  for (const auto& s : steps) {
    j["steps"].push_back({{"name", s.name}, {"duration", s.duration}, {"populations", s.populations}});
  }
  j["warnings"] = warnings;
  return j;
}

// -- adiabatic elimination -----------------------------------------------------------

namespace {

constexpr std::size_t kToyQubits = 5;
constexpr std::size_t kThermal = 3;
constexpr std::size_t kMixed = 4;

PauliSum lowering(std::size_t q) {
  PauliSum s(PauliString::single(kToyQubits, q, 'X'), 0.5);
  s.add(PauliString::single(kToyQubits, q, 'Y'), cplx(0.0, 0.5));
  return s;
}

PauliString zz(std::size_t a, std::size_t b) {
  const std::pair<std::size_t, char> f[] = {{a, 'Z'}, {b, 'Z'}};
  return PauliString::from_factors(kToyQubits, f);
}

}  // namespace

EliminationPoint elimination_rate(double g, double lambda, const EliminationOptions& opts) {
  if (!(g >= 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("elimination_rate: need g >= 0 and lambda > 0");
  }
  if (g / lambda > opts.max_ratio) {
    throw std::invalid_argument("elimination_rate: g / lambda exceeds " +
                                std::to_string(opts.max_ratio));
  }
  EliminationPoint pt{g, lambda, 0.0, 0.0, true};
  const auto ops = excitation_ops(PauliString::single(kToyQubits, 1, 'X'), zz(0, 1), zz(1, 2));
  const PauliSum sm_t = lowering(kThermal), sm_m = lowering(kMixed);
  const PauliSum coupling = ops.create * sm_t + ops.translate * sm_m;
  const PauliSum h_sr = (coupling + coupling.adjoint()) * cplx(g, 0.0);
  std::vector<std::pair<double, PauliString>> terms;
  for (const auto& [p, c] : h_sr.terms()) terms.emplace_back(c.real(), p);
  LindbladModel model(SparseHamiltonian(kToyQubits, terms), {});
  model.add_jump({"thermal-", lambda / 2.0, sm_t});
  model.add_jump({"mixed+", opts.gamma / 4.0, sm_m.adjoint()});
  model.add_jump({"mixed-", opts.gamma / 4.0, sm_m});
  const Liouvillian gen(model);

  // Excited pair |010>, thermal ancilla in |0>, mixed ancilla maximally mixed.
  const Eigen::Index dim = 1 << kToyQubits;
  MatrixXcd rho = MatrixXcd::Zero(dim, dim);
  rho(2, 2) = 0.5;
  rho(2 + 16, 2 + 16) = 0.5;
  const PauliSum pair = PauliSum(ops.annihilate.adjoint() * ops.annihilate);  // projector onto the pair
  auto pair_population = [&](const MatrixXcd& r) {
    double acc = 0.0;
    for (const auto& [p, c] : pair.terms()) acc += (c * pauli_expectation(p, r)).real();
    return acc;
  };

  std::vector<double> ts, logs;
  const double settle = 10.0 / lambda;
  double t = 0.0;
  double chunk = settle;
  for (int round = 0; round < 60; ++round) {
    std::vector<double> grid;
    for (int k = 1; k <= 8; ++k) grid.push_back(chunk * k / 8.0);
    const auto ev = evolve(gen, rho, grid, {1e-12, 1e-10, 1e-3 / lambda, 1e-14});
    double last = 1.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      last = pair_population(ev.states[k]);
      const double tk = t + grid[k];
      if (tk >= settle && last <= 0.95 && last >= 0.2) {
        ts.push_back(tk);
        logs.push_back(std::log(last));
      }
    }
    rho = ev.states.back();
    t += chunk;
    if (last < 0.2 || (g == 0.0 && round >= 2)) break;
    chunk *= 2.0;
  }
  if (g == 0.0) return pt;
  if (ts.size() < 3) {
    pt.markovian = false;
    return pt;
  }
  // ln P = a - rate t
  const Eigen::Index m = static_cast<Eigen::Index>(ts.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = -ts[i];
    y(i) = logs[i];
  }
  const Eigen::Vector2d sol = a.colPivHouseholderQr().solve(y);
  pt.rate = sol(1);
  pt.fit_rms = std::sqrt((a * sol - y).squaredNorm() / static_cast<double>(m));
  pt.markovian = pt.fit_rms <= opts.fit_tolerance;
  return pt;
}

namespace {

// Least squares of y on the columns of x; returns coefficients and rms.
std::pair<Eigen::VectorXd, double> lsq(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::VectorXd c = x.colPivHouseholderQr().solve(y);
  return {c, std::sqrt((x * c - y).squaredNorm() / static_cast<double>(y.size()))};
}

}  // namespace

EliminationResult adiabatic_elimination_probe(const EliminationOptions& opts) {
  EliminationResult res;
  for (double g : opts.g_grid) {
    for (double l : opts.lambda_grid) res.points.push_back(elimination_rate(g, l, opts));
  }
  std::vector<const EliminationPoint*> usable;
  for (const auto& p : res.points) {
    if (p.g > 0.0 && p.rate > 0.0 && p.markovian) usable.push_back(&p);
  }
  if (usable.size() < 3) {
    throw std::runtime_error("adiabatic_elimination_probe: fewer than three usable grid points");
  }
  const auto m = static_cast<Eigen::Index>(usable.size());
  Eigen::MatrixXd x(m, 3);
  Eigen::VectorXd y(m), lg(m), ll(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    lg(i) = std::log(usable[i]->g);
    ll(i) = std::log(usable[i]->lambda);
    x.row(i) << 1.0, lg(i), ll(i);
    y(i) = std::log(usable[i]->rate);
  }
  const auto [free, rms_free] = lsq(x, y);
  res.log_prefactor = free(0);
  res.g_exponent = free(1);
  res.lambda_exponent = free(2);
  res.rms_free = rms_free;
  res.rms_lambda = lsq(x.leftCols(2), y - ll).second;
  res.rms_inverse_lambda = lsq(x.leftCols(2), y + ll).second;
  double pref = 0.0;
  for (const auto* p : usable) pref += p->rate * p->lambda / (p->g * p->g);
  res.prefactor_inverse_lambda = pref / static_cast<double>(usable.size());
  res.preferred = res.rms_inverse_lambda < res.rms_lambda ? "1/lambda" : "lambda";
  return res;
}

nlohmann::json EliminationResult::to_json() const {
  nlohmann::json j;
  j["points"] = nlohmann::json::array();
  for (const auto& p : points) {
    j["points"].push_back({{"g", p.g}, {"lambda", p.lambda}, {"rate", p.rate},
                           {"fit_rms", p.fit_rms}, {"markovian", p.markovian}});
  }
  j["g_exponent"] = g_exponent;
  j["lambda_exponent"] = lambda_exponent;
  j["log_prefactor"] = log_prefactor;
  j["rms_free"] = rms_free;
  j["rms_lambda"] = rms_lambda;
  j["rms_inverse_lambda"] = rms_inverse_lambda;
  j["prefactor_inverse_lambda"] = prefactor_inverse_lambda;
  j["preferred"] = preferred;
  return j;
}

}  // namespace strobe
