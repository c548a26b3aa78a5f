#include "strobe/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace strobe {

MatrixXcd Gate::unitary(std::size_t dense_cap) const {
  const MatrixXcd p = to_dense(generator, dense_cap);
  const MatrixXcd id = MatrixXcd::Identity(p.rows(), p.cols());
  // P^2 = 1 for a Hermitian Pauli string.
  return std::cos(angle) * id - cplx(0.0, std::sin(angle)) * p;
}

void GateSequence::push_back(Gate gate) {
  if (!gate.generator.is_hermitian()) {
    throw std::invalid_argument("GateSequence: generator " + gate.generator.str() +
                                " is not Hermitian");
  }
  if (!std::isfinite(gate.angle)) {
    throw std::invalid_argument("GateSequence: gate angle must be finite");
  }
  if (!(gate.duration > 0.0) || !std::isfinite(gate.duration)) {
    throw std::invalid_argument("GateSequence: gate duration must be positive");
  }
  if (!gates_.empty() && gate.generator.n_qubits() != n_qubits()) {
    throw std::invalid_argument("GateSequence: qubit-count mismatch");
  }
  gates_.push_back(std::move(gate));
}

void GateSequence::append(const GateSequence& other) {
  for (const Gate& g : other.gates()) push_back(g);
}

std::size_t GateSequence::n_qubits() const {
  return gates_.empty() ? 0 : gates_.front().generator.n_qubits();
}

double GateSequence::total_duration() const {
  double t = 0.0;
  for (const Gate& g : gates_) t += g.duration;
  return t;
}

MatrixXcd GateSequence::unitary(std::size_t dense_cap) const {
  if (gates_.empty()) return MatrixXcd::Identity(1, 1);
  const Eigen::Index dim = Eigen::Index{1} << n_qubits();
  if (n_qubits() > dense_cap) {
    throw DenseCapError("GateSequence::unitary: " + std::to_string(n_qubits()) +
                        " qubits exceed the dense cap");
  }
  MatrixXcd u = MatrixXcd::Identity(dim, dim);
  for (const Gate& g : gates_) {
    const double c = std::cos(g.angle);
    const cplx s(0.0, -std::sin(g.angle));
    // u <- (c - i s P) u, with P u computed row by row from the basis action.
    MatrixXcd pu(dim, dim);
    for (Eigen::Index b = 0; b < dim; ++b) {
      const auto img = g.generator.act(static_cast<std::uint64_t>(b));
      pu.row(static_cast<Eigen::Index>(img.target)) = img.amplitude * u.row(b);
    }
    u = c * u + s * pu;
  }
  return u;
}

nlohmann::json GateSequence::to_json() const {
  nlohmann::json gates = nlohmann::json::array();
  for (const Gate& g : gates_) {
    gates.push_back({{"generator", g.generator.str()},
                     {"angle", g.angle},
                     {"duration", g.duration}});
  }
  return {{"label", label_}, {"n_qubits", n_qubits()}, {"gates", gates}};
}

GateSequence GateSequence::from_json(const nlohmann::json& j) {
  GateSequence seq(j.value("label", std::string{}));
  for (const auto& g : j.at("gates")) {
    seq.push_back({PauliString::parse(g.at("generator").get<std::string>()),
                   g.at("angle").get<double>(), g.value("duration", 1.0)});
  }
  return seq;
}

Generators vertex_generators() {
  return {PauliString::parse("ZYII"), PauliString::parse("IXYI"),
          PauliString::parse("IIXZ")};
}

Generators plaquette_generators() { return cyclic_permute(vertex_generators()); }

PauliString cyclic_permute(const PauliString& p) {
  return {p.n_qubits(), p.x_mask() ^ p.z_mask(), p.x_mask(), p.phase_quarter()};
}

Generators cyclic_permute(const Generators& g) {
  return {cyclic_permute(g[0]), cyclic_permute(g[1]), cyclic_permute(g[2])};
}

Generators embed(const Generators& local, std::size_t n_qubits,
                 const std::array<int, 4>& sites) {
  for (std::size_t a = 0; a < 4; ++a) {
    if (sites[a] < 0 || static_cast<std::size_t>(sites[a]) >= n_qubits) {
      throw std::invalid_argument("embed: site out of range");
    }
    for (std::size_t b = a + 1; b < 4; ++b) {
      if (sites[a] == sites[b]) throw std::invalid_argument("embed: repeated site");
    }
  }
  Generators out;
  for (std::size_t k = 0; k < 3; ++k) {
    if (local[k].n_qubits() != 4) {
      throw std::invalid_argument("embed: local generators must act on 4 qubits");
    }
    std::vector<std::pair<std::size_t, char>> factors;
    for (std::size_t q = 0; q < 4; ++q) {
      factors.emplace_back(static_cast<std::size_t>(sites[q]), local[k].op_at(q));
    }
    out[k] = PauliString::from_factors(n_qubits, factors).with_phase(local[k].phase_quarter());
  }
  return out;
}

namespace {

void check_generators(const Generators& g) {
  for (const auto& s : g) {
    if (s.n_qubits() != g[0].n_qubits()) {
      throw std::invalid_argument("u123: generators must act on the same register");
    }
  }
}

// Operator U_123 = U_2(b)U_1(a)U_2(-b)U_1(-a) U_3(g) U_1(a)U_2(b)U_1(-a)U_2(-b) U_3(-g);
// gates are listed in application order, i.e. right to left.
void push_u123(GateSequence& seq, double a, double b, double g, const Generators& s,
               double tau) {
  const Gate gates[] = {{s[2], -g, tau}, {s[1], -b, tau}, {s[0], -a, tau}, {s[1], b, tau},
                        {s[0], a, tau},  {s[2], g, tau},  {s[0], -a, tau}, {s[1], -b, tau},
                        {s[0], a, tau},  {s[1], b, tau}};
  for (const Gate& gate : gates) seq.push_back(gate);
}

}  // namespace

GateSequence u123(double alpha, double beta, double gamma, const Generators& gens,
                  double tau) {
  check_generators(gens);
  GateSequence seq("u123");
  push_u123(seq, alpha, beta, gamma, gens, tau);
  return seq;
}

GateSequence echoed_u123(double alpha, double beta, double gamma,
                         const Generators& gens, double tau) {
  check_generators(gens);
  GateSequence seq("echoed_u123");
  push_u123(seq, alpha, beta, gamma, gens, tau);
  push_u123(seq, -alpha, beta, -gamma, gens, tau);
  return seq;
}

SequenceCoefficients predicted_coefficients(double alpha, double beta, double gamma,
                                            double tau) {
  const double phi2 = (alpha * alpha + beta * beta + gamma * gamma) / 3.0;
  const double scale = 2.0 / (5.0 * tau);
  SequenceCoefficients c;
  c.chi = alpha * alpha * beta * gamma * gamma * scale;
  c.j_e = alpha * beta * gamma * scale * (1.0 - 3.0 * phi2);
  return c;
}

PauliString four_body_term(const Generators& gens) {
  return (gens[0] * gens[1] * gens[2]).normalized();
}

PauliSum predicted_terms(double alpha, double beta, double gamma, const Generators& gens,
                         bool echoed, double tau) {
  const auto c = predicted_coefficients(alpha, beta, gamma, tau);
  const double scale = 2.0 / (5.0 * tau);
  PauliSum out(gens[0].n_qubits(), 0.0);
  out.add(four_body_term(gens), -c.j_e);
  out.add(gens[1], c.chi);
  if (!echoed) {
    out.add(gens[2], -2.0 * alpha * alpha * beta * beta * gamma * scale);
    out.add((gens[0] * gens[1]).normalized(), alpha * beta * gamma * gamma * scale);
    out.add((gens[1] * gens[2]).normalized(), -alpha * alpha * beta * gamma * scale);
  }
  return out;
}

EffectiveHamiltonianReport effective_hamiltonian(const GateSequence& seq,
                                                 const PauliSum& targets,
                                                 const EffectiveHamiltonianOptions& opts) {
  EffectiveHamiltonianReport rep;
  rep.total_time = seq.total_duration();
  const std::size_t n = seq.n_qubits();
  if (seq.empty()) {
    rep.h_eff = PauliSum(0, opts.prune_tolerance);
    rep.residual = rep.h_eff;
    return rep;
  }
  const MatrixXcd u = seq.unitary(opts.dense_cap);
  const MatrixXcd h = cplx(0.0, 1.0 / rep.total_time) *
                      principal_log_unitary(u, opts.branch_tolerance);
  const PauliSum raw = decompose(h, n, opts.prune_tolerance);
  for (const auto& [p, c] : raw.terms()) rep.asymmetry = std::max(rep.asymmetry, std::abs(c.imag()));
  rep.h_eff = raw.hermitian_part();
  rep.residual = rep.h_eff;
  for (const auto& [p, c] : targets.terms()) {
    rep.target_coefficients.push_back({p, rep.h_eff.coefficient(p).real(), c.real()});
    rep.residual.erase(p);
  }
  return rep;
}

PauliSum bch_second_order(const GateSequence& seq) {
  const std::size_t n = seq.n_qubits();
  const double t = seq.total_duration();
  PauliSum out(n, 0.0);
  if (seq.empty()) return out;
  const auto& gates = seq.gates();
  for (const Gate& g : gates) out.add(g.generator, g.angle / t);
  for (std::size_t j = 0; j < gates.size(); ++j) {
    for (std::size_t k = j + 1; k < gates.size(); ++k) {
      if (gates[j].generator.commutes_with(gates[k].generator)) continue;
      out.add(commutator(gates[j].generator, gates[k].generator),
              cplx(0.0, gates[j].angle * gates[k].angle / (2.0 * t)));
    }
  }
  out.set_prune_tolerance(kDefaultPruneTolerance);
  return out;
}

const TermFit* OrderScanResult::find(const PauliString& term) const {
  for (const auto& f : terms) {
    if (f.term == term) return &f;
  }
  return nullptr;
}

LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y, double floor,
                      double drop_factor, std::size_t min_points) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_log_log: size mismatch");
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  LogLogFit fit;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double ay = std::abs(y[k]);
    if (!(x[k] > 0.0) || !(ay > drop_factor * floor)) continue;
    const double r = floor / ay;
    const double w = 1.0 / (1e-6 + r * r);
    const double lx = std::log(x[k]);
    const double ly = std::log(ay);
    sw += w;
    sx += w * lx;
    sy += w * ly;
    sxx += w * lx * lx;
    sxy += w * lx * ly;
    ++fit.used_points;
  }
  const double det = sw * sxx - sx * sx;
  if (fit.used_points < std::max<std::size_t>(min_points, 2) || !(std::abs(det) > 0.0)) {
    return fit;
  }
  fit.slope = (sw * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / sw;
  fit.degenerate = false;
  return fit;
}

OrderScanResult order_scan(const std::function<GateSequence(double)>& factory,
                           std::span<const double> phis,
                           std::span<const PauliString> target_terms,
                           const OrderScanOptions& opts) {
  if (phis.size() < 4) throw std::invalid_argument("order_scan: need at least 4 phi values");
  const auto [lo, hi] = std::minmax_element(phis.begin(), phis.end());
  if (!(*lo > 0.0) || *hi / *lo < 2.0) {
    throw std::invalid_argument("order_scan: phi values must be positive with max/min >= 2");
  }
  OrderScanResult res;
  res.phis.assign(phis.begin(), phis.end());
  const std::set<PauliString> targets(target_terms.begin(), target_terms.end());

  EffectiveHamiltonianOptions eopts;
  eopts.prune_tolerance = opts.prune_floor;
  std::vector<PauliSum> reports;
  std::set<PauliString> seen(targets);
  for (double phi : phis) {
    reports.push_back(effective_hamiltonian(factory(phi), PauliSum(), eopts).h_eff);
    for (const auto& [p, c] : reports.back().terms()) {
      if (!p.is_identity()) seen.insert(p);
    }
  }

  for (const PauliString& p : seen) {
    TermFit f;
    f.term = p;
    f.is_target = targets.contains(p);
    f.phis = res.phis;
    for (const auto& h : reports) f.coefficients.push_back(h.coefficient(p).real());
    const auto fit = fit_log_log(f.phis, f.coefficients, opts.prune_floor, opts.drop_factor,
                                 opts.min_points);
    f.slope = fit.slope;
    f.intercept = fit.intercept;
    f.degenerate = fit.degenerate;
    res.terms.push_back(std::move(f));
  }

  for (const auto& h : reports) {
    double s = 0.0;
    for (const auto& [p, c] : h.terms()) {
      if (!p.is_identity() && !targets.contains(p)) s += std::norm(c);
    }
    res.residual_norms.push_back(std::sqrt(s));
  }
  const auto fit = fit_log_log(res.phis, res.residual_norms, opts.prune_floor,
                               opts.drop_factor, opts.min_points);
  res.residual_slope = fit.slope;
  res.residual_degenerate = fit.degenerate;
  return res;
}

SerialComposition serial_compose(const GateSequence& vertex_seq,
                                 const GateSequence& plaquette_seq,
                                 const EffectiveHamiltonianOptions& opts) {
  if (!vertex_seq.empty() && !plaquette_seq.empty() &&
      vertex_seq.n_qubits() != plaquette_seq.n_qubits()) {
    throw std::invalid_argument("serial_compose: sequences act on different registers");
  }
  SerialComposition out;
  out.sequence = GateSequence(vertex_seq.label() + "+" + plaquette_seq.label());
  out.sequence.append(vertex_seq);
  out.sequence.append(plaquette_seq);

  const std::size_t n = out.sequence.n_qubits();
  bool commuting = true;
  for (const Gate& a : vertex_seq.gates()) {
    for (const Gate& b : plaquette_seq.gates()) {
      commuting = commuting && a.generator.commutes_with(b.generator);
    }
  }
  if (commuting) {
    out.report.commuting = true;
    out.report.difference = PauliSum(n, opts.prune_tolerance);
    return out;
  }

  const double t = out.sequence.total_duration();
  const MatrixXcd uv = vertex_seq.unitary(opts.dense_cap);
  const MatrixXcd up = plaquette_seq.unitary(opts.dense_cap);
  const MatrixXcd diff = principal_log_unitary(up * uv, opts.branch_tolerance) -
                         principal_log_unitary(up, opts.branch_tolerance) -
                         principal_log_unitary(uv, opts.branch_tolerance);
  out.report.difference =
      decompose(cplx(0.0, 1.0 / t) * diff, n, opts.prune_tolerance).hermitian_part();
  out.report.error = out.report.difference.max_abs_coefficient();
  return out;
}

double estimate_cycle_time(const TorusLattice& lattice, double tau_seconds, int gates_per_u,
                           double parallel_factor) {
  if (gates_per_u < 1) throw std::invalid_argument("estimate_cycle_time: gates_per_u >= 1");
  if (!(parallel_factor >= 1.0)) {
    throw std::invalid_argument("estimate_cycle_time: parallel factor must be >= 1");
  }
  const double terms = static_cast<double>(lattice.n_vertices() + lattice.n_plaquettes());
  return terms * kUOperationsPerTerm * gates_per_u * tau_seconds / parallel_factor;
}

}  // namespace strobe
