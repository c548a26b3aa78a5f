#include "strobe/lindblad.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/numeric/odeint.hpp>

#include "strobe/io.hpp"
#include "strobe/linalg.hpp"

namespace strobe {

namespace {

PauliSum projector(const PauliString& h, double sign) {
  PauliSum out = PauliSum::identity(h.n_qubits(), 0.5);
  out.add(h, 0.5 * sign);
  return out;
}

std::uint64_t pauli_index(const PauliString& p) {
  return p.x_mask() | (p.z_mask() << p.n_qubits());
}

PauliString pauli_from_index(std::uint64_t index, std::size_t n) {
  const std::uint64_t low = (std::uint64_t{1} << n) - 1;
  return PauliString(n, index & low, (index >> n) & low, 0);
}

// Product of two Hermitian canonical strings given by index; returns the
// index of the product and the quarter phase.
struct Product {
  std::uint64_t index;
  int quarter;
};
inline Product multiply_indices(std::uint64_t a, std::uint64_t b, std::size_t n) {
  const std::uint64_t low = (std::uint64_t{1} << n) - 1;
  const std::uint64_t xa = a & low, za = a >> n, xb = b & low, zb = b >> n;
  const std::uint64_t x = xa ^ xb, z = za ^ zb;
  const int q = std::popcount(xa & za) + std::popcount(xb & zb) + 2 * std::popcount(za & xb) -
                std::popcount(x & z);
  return {x | (z << n), ((q % 4) + 4) % 4};
}

constexpr double kQuarterRe[4] = {1, 0, -1, 0};
constexpr double kQuarterIm[4] = {0, 1, 0, -1};

}  // namespace

// -- excitation operators -------------------------------------------------------

ExcitationOps excitation_ops(const PauliString& flip, const PauliString& h,
                             const PauliString& h_prime) {
  if (flip.commutes_with(h) || flip.commutes_with(h_prime)) {
    throw std::invalid_argument("excitation_ops: the flip must anticommute with both neighbourhoods");
  }
  if (!h.commutes_with(h_prime)) {
    throw std::invalid_argument("excitation_ops: neighbourhood operators must commute");
  }
  ExcitationOps out;
  const PauliSum f(flip);
  out.create = f * projector(h, 1.0) * projector(h_prime, 1.0);
  out.annihilate = out.create.adjoint();
  out.translate = f * projector(h, -1.0) * projector(h_prime, 1.0);
  out.translate_adjoint = out.translate.adjoint();
  return out;
}

ExcitationOps excitation_ops(const TorusLattice& lat, int link, ExcitationType type) {
  if (link < 0 || link >= static_cast<int>(lat.n_links())) {
    throw std::invalid_argument("excitation_ops: link " + std::to_string(link) + " out of range");
  }
  const std::size_t n = lat.n_links();
  ExcitationOps out;
  if (type == ExcitationType::Electric) {
    const auto v = lat.link_vertices(link);
    out = excitation_ops(PauliString::single(n, link, 'X'), lat.vertex_stabilizer(v[0]),
                         lat.vertex_stabilizer(v[1]));
    out.neighborhoods = v;
  } else {
    const auto p = lat.link_plaquettes(link);
    out = excitation_ops(PauliString::single(n, link, 'Z'), lat.plaquette_stabilizer(p[0]),
                         lat.plaquette_stabilizer(p[1]));
    out.neighborhoods = p;
  }
  out.link = link;
  out.type = type;
  return out;
}

SparseHamiltonian toric_hamiltonian(const TorusLattice& lat, double j) {
  return build_hamiltonian(lat, {j, j, 0.0, 0.0});
}

// -- models ------------------------------------------------------------------------

LindbladModel::LindbladModel(SparseHamiltonian hamiltonian, std::vector<JumpOperator> jumps)
    : hamiltonian_(std::move(hamiltonian)) {
  for (auto& j : jumps) add_jump(std::move(j));
}

void LindbladModel::add_jump(JumpOperator jump) {
  if (!std::isfinite(jump.rate) || jump.rate < 0.0) {
    throw std::invalid_argument("LindbladModel: jump '" + jump.label + "' has invalid rate");
  }
  if (jump.op.n_qubits() != n_qubits()) {
    throw std::invalid_argument("LindbladModel: jump '" + jump.label +
                                "' acts outside the system register");
  }
  jumps_.push_back(std::move(jump));
}

nlohmann::json LindbladModel::to_json() const {
  nlohmann::json j;
  j["n_qubits"] = n_qubits();
  j["hamiltonian"] = hamiltonian_.sum().to_json();
  j["jumps"] = nlohmann::json::array();
  for (const auto& c : jumps_) {
    j["jumps"].push_back({{"label", c.label}, {"rate", c.rate}, {"op", c.op.to_json()}});
  }
  if (p) j["p"] = *p;
  if (gap) j["gap"] = *gap;
  if (temperature_target) j["temperature_target"] = *temperature_target;
  return j;
}

double temperature_target(double p, double gap) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("temperature_target: p outside [0, 1)");
  return p == 0.0 ? 0.0 : -gap / std::log(p);
}

double detailed_balance_temperature(double p, double gap) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::invalid_argument("detailed_balance_temperature: p outside [0, 1)");
  }
  if (p == 0.0) return 0.0;
  return gap / std::log((1.0 - p) / p);
}

namespace {

void check_rate(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw std::invalid_argument(std::string("jump set: ") + name + " must be finite and >= 0");
  }
}

const char* type_tag(ExcitationType t) { return t == ExcitationType::Electric ? "e" : "m"; }

}  // namespace

LindbladModel thermal_jump_set(const TorusLattice& lat, double p, double lambda_star,
                               double gamma_star, double j) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("thermal_jump_set: p outside [0, 1)");
  check_rate(lambda_star, "lambda*");
  check_rate(gamma_star, "gamma*");
  LindbladModel model(toric_hamiltonian(lat, j), {});
  const double half = lambda_star / 2.0;
  const double quarter = gamma_star / 4.0;
  for (ExcitationType t : {ExcitationType::Electric, ExcitationType::Magnetic}) {
    for (int l = 0; l < static_cast<int>(lat.n_links()); ++l) {
      auto ops = excitation_ops(lat, l, t);
      const std::string tag = std::string(type_tag(t)) + std::to_string(l);
      if ((1.0 - p) * half > 0.0) model.add_jump({"E_" + tag, (1.0 - p) * half, ops.annihilate});
      if (p * half > 0.0) model.add_jump({"Edag_" + tag, p * half, ops.create});
      if (quarter > 0.0) {
        model.add_jump({"T_" + tag, quarter, ops.translate});
        model.add_jump({"Tdag_" + tag, quarter, ops.translate_adjoint});
      }
    }
  }
  model.p = p;
  model.gap = 4.0 * j;
  model.temperature_target = temperature_target(p, 4.0 * j);
  return model;
}

LindbladModel cooling_jump_set(const TorusLattice& lat, double lambda_star, double j) {
  if (!(std::isfinite(lambda_star) && lambda_star > 0.0)) {
    throw std::invalid_argument("cooling_jump_set: lambda* must be > 0");
  }
  LindbladModel model(toric_hamiltonian(lat, j), {});
  for (ExcitationType t : {ExcitationType::Electric, ExcitationType::Magnetic}) {
    for (int l = 0; l < static_cast<int>(lat.n_links()); ++l) {
      auto ops = excitation_ops(lat, l, t);
      const std::string tag = std::string(type_tag(t)) + std::to_string(l);
      model.add_jump({"E+T_" + tag, lambda_star, ops.annihilate + ops.translate});
      model.add_jump({"E+Tdag_" + tag, lambda_star, ops.annihilate + ops.translate_adjoint});
    }
  }
  model.p = 0.0;
  model.gap = 4.0 * j;
  model.temperature_target = 0.0;
  return model;
}

void add_depolarizing(LindbladModel& model, double rate) {
  check_rate(rate, "depolarizing rate");
  if (rate == 0.0) return;
  const std::size_t n = model.n_qubits();
  for (std::size_t q = 0; q < n; ++q) {
    for (char op : {'X', 'Y', 'Z'}) {
      model.add_jump({std::string("noise_") + op + std::to_string(q), rate / 6.0,
                      PauliSum(PauliString::single(n, q, op))});
    }
  }
}

// -- Pauli-basis vectors -------------------------------------------------------------

namespace {

void check_density_size(std::size_t n) {
  if (n > kMaxDensityQubits) {
    throw DenseCapError("density matrices are limited to " + std::to_string(kMaxDensityQubits) +
                        " qubits, got " + std::to_string(n));
  }
}

}  // namespace

double pauli_expectation(const PauliString& p, const MatrixXcd& rho) {
  const std::uint64_t dim = std::uint64_t{1} << p.n_qubits();
  if (static_cast<std::uint64_t>(rho.rows()) != dim || rho.cols() != rho.rows()) {
    throw std::invalid_argument("pauli_expectation: size mismatch");
  }
  const PauliString h = p.normalized();
  cplx acc = 0.0;
  for (std::uint64_t d = 0; d < dim; ++d) {
    const auto img = h.act(d);
    acc += img.amplitude * rho(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(img.target));
  }
  return (acc * p.phase_factor()).real();
}

Eigen::VectorXd to_pauli_vector(const MatrixXcd& rho, std::size_t n) {
  check_density_size(n);
  const std::uint64_t dim = std::uint64_t{1} << n;
  if (static_cast<std::uint64_t>(rho.rows()) != dim || rho.cols() != rho.rows()) {
    throw std::invalid_argument("to_pauli_vector: size mismatch");
  }
  Eigen::VectorXd r(static_cast<Eigen::Index>(dim * dim));
  for (std::uint64_t idx = 0; idx < dim * dim; ++idx) {
    r(static_cast<Eigen::Index>(idx)) = pauli_expectation(pauli_from_index(idx, n), rho);
  }
  return r;
}

MatrixXcd from_pauli_vector(const Eigen::VectorXd& r, std::size_t n) {
  check_density_size(n);
  const std::uint64_t dim = std::uint64_t{1} << n;
  if (static_cast<std::uint64_t>(r.size()) != dim * dim) {
    throw std::invalid_argument("from_pauli_vector: size mismatch");
  }
  MatrixXcd rho = MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const double norm = 1.0 / static_cast<double>(dim);
  for (std::uint64_t idx = 0; idx < dim * dim; ++idx) {
    const double c = r(static_cast<Eigen::Index>(idx));
    if (c == 0.0) continue;
    const PauliString p = pauli_from_index(idx, n);
    for (std::uint64_t d = 0; d < dim; ++d) {
      const auto img = p.act(d);
      rho(static_cast<Eigen::Index>(img.target), static_cast<Eigen::Index>(d)) +=
          c * norm * img.amplitude;
    }
  }
  return rho;
}

DensityCheck check_density_matrix(const MatrixXcd& rho) {
  DensityCheck c;
  c.trace_error = std::abs(rho.trace() - 1.0);
  c.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitize(rho), Eigen::EigenvaluesOnly);
  c.min_eigenvalue = es.eigenvalues().minCoeff();
  return c;
}

MatrixXcd gibbs_state(const SparseHamiltonian& h, double temperature, double degeneracy_tol) {
  if (!(temperature >= 0.0)) throw std::invalid_argument("gibbs_state: negative temperature");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h.to_dense());
  const Eigen::VectorXd& e = es.eigenvalues();
  Eigen::VectorXd w(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double de = e(i) - e(0);
    if (temperature == 0.0) {
      w(i) = de <= degeneracy_tol ? 1.0 : 0.0;
    } else {
      w(i) = std::exp(-de / temperature);
    }
  }
  w /= w.sum();
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

// -- generator -------------------------------------------------------------------------

Liouvillian::Liouvillian(const LindbladModel& model) : n_(model.n_qubits()) {
  check_density_size(n_);
  const std::size_t n = n_;
  // Superoperator terms w * A rho B keyed by (A, B) indices.
  std::map<std::pair<std::uint64_t, std::uint64_t>, cplx> terms;
  auto add_term = [&](std::uint64_t a, std::uint64_t b, cplx w) { terms[{a, b}] += w; };
  for (const auto& [p, c] : model.hamiltonian().sum().terms()) {
    const cplx coeff = c * p.phase_factor();
    add_term(pauli_index(p), 0, cplx(0, -1) * coeff);
    add_term(0, pauli_index(p), cplx(0, 1) * coeff);
  }
  for (const auto& jump : model.jumps()) {
    if (jump.rate == 0.0) continue;
    std::vector<std::pair<std::uint64_t, cplx>> strings;
    for (const auto& [p, c] : jump.op.terms()) strings.emplace_back(pauli_index(p), c * p.phase_factor());
    for (const auto& [a, ca] : strings) {
      for (const auto& [b, cb] : strings) add_term(a, b, 2.0 * jump.rate * ca * std::conj(cb));
    }
    const PauliSum k = jump.op.adjoint() * jump.op;
    for (const auto& [p, c] : k.terms()) {
      const cplx coeff = -jump.rate * c * p.phase_factor();
      add_term(pauli_index(p), 0, coeff);
      add_term(0, pauli_index(p), coeff);
    }
  }

  // Reduced echelon basis of the group generated by the masks of A B.
  std::vector<std::uint64_t> basis;
  std::vector<int> pivots;
  for (const auto& [key, w] : terms) {
    std::uint64_t v = key.first ^ key.second;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if ((v >> pivots[i]) & 1) v ^= basis[i];
    }
    if (v == 0) continue;
    const int pivot = 63 - std::countl_zero(v);
    for (auto& g : basis) {
      if ((g >> pivot) & 1) g ^= v;
    }
    basis.push_back(v);
    pivots.push_back(pivot);
  }
  group_rank_ = basis.size();
  std::uint64_t pivot_mask = 0;
  for (int p : pivots) pivot_mask |= std::uint64_t{1} << p;

  const std::uint64_t total = std::uint64_t{1} << (2 * n);
  const std::size_t bdim = std::size_t{1} << group_rank_;
  block_of_.assign(total, 0);
  position_.assign(total, 0);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    if (idx & pivot_mask) continue;
    const auto b = static_cast<std::uint32_t>(reps_.size());
    reps_.push_back(idx);
    std::vector<std::uint32_t> mem(bdim);
    for (std::size_t j = 0; j < bdim; ++j) {
      std::uint64_t m = idx;
      for (std::size_t i = 0; i < group_rank_; ++i) {
        if ((j >> i) & 1) m ^= basis[i];
      }
      mem[j] = static_cast<std::uint32_t>(m);
      block_of_[m] = b;
      position_[m] = static_cast<std::uint32_t>(j);
    }
    members_.push_back(std::move(mem));
  }

  std::vector<std::tuple<std::uint64_t, std::uint64_t, cplx>> flat;
  flat.reserve(terms.size());
  for (const auto& [key, w] : terms) {
    if (std::abs(w) > 0.0) flat.emplace_back(key.first, key.second, w);
  }
  blocks_.assign(reps_.size(), Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(bdim),
                                                     static_cast<Eigen::Index>(bdim)));
  for (std::size_t b = 0; b < reps_.size(); ++b) {
    Eigen::MatrixXd& m = blocks_[b];
    for (std::size_t j = 0; j < bdim; ++j) {
      const std::uint64_t p = members_[b][j];
      for (const auto& [a, bb, w] : flat) {
        const Product ap = multiply_indices(a, p, n);
        const Product apb = multiply_indices(ap.index, bb, n);
        const int q = (ap.quarter + apb.quarter) % 4;
        const double re = w.real() * kQuarterRe[q] - w.imag() * kQuarterIm[q];
        m(position_[apb.index], static_cast<Eigen::Index>(j)) += re;
      }
    }
  }
}

void Liouvillian::apply(std::span<const double> in, std::span<double> out) const {
  if (in.size() != dimension() || out.size() != dimension()) {
    throw std::invalid_argument("Liouvillian: vector size mismatch");
  }
  const auto bdim = static_cast<Eigen::Index>(block_dimension());
  Eigen::VectorXd x(bdim), y(bdim);
  for (std::size_t b = 0; b < reps_.size(); ++b) {
    const auto& mem = members_[b];
    bool zero = true;
    for (Eigen::Index j = 0; j < bdim; ++j) {
      x(j) = in[mem[j]];
      zero = zero && x(j) == 0.0;
    }
    if (zero) {
      for (Eigen::Index j = 0; j < bdim; ++j) out[mem[j]] = 0.0;
      continue;
    }
    y.noalias() = blocks_[b] * x;
    for (Eigen::Index j = 0; j < bdim; ++j) out[mem[j]] = y(j);
  }
}

Eigen::VectorXd Liouvillian::apply(const Eigen::VectorXd& r) const {
  Eigen::VectorXd out(r.size());
  apply({r.data(), static_cast<std::size_t>(r.size())},
        {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

MatrixXcd Liouvillian::apply(const MatrixXcd& rho) const {
  return from_pauli_vector(apply(to_pauli_vector(rho, n_)), n_);
}

// -- evolution --------------------------------------------------------------------------

Evolution evolve(const Liouvillian& gen, const MatrixXcd& rho0, const std::vector<double>& times,
                 const EvolveOptions& opts) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0)) {
    throw std::invalid_argument("evolve: times must be ascending and non-negative");
  }
  const std::size_t n = gen.n_qubits();
  const Eigen::VectorXd r0 = to_pauli_vector(rho0, n);
  State x(r0.data(), r0.data() + r0.size());
  auto system = [&gen](const State& in, State& out, double) {
    out.resize(in.size());
    gen.apply(in, out);
  };
  auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol,
                                         odeint::runge_kutta_dopri5<State>());

  Evolution ev;
  ev.min_eigenvalue = 1.0;
  double t = 0.0;
  double dt = opts.initial_dt;
  for (double target : times) {
    while (target - t > 1e-14 * std::max(1.0, target)) {
      double h = std::min(dt, target - t);
      const bool clipped = h < dt;
      if (stepper.try_step(system, x, t, h) == odeint::success) {
        ++ev.steps;
        if (!clipped || h > dt) dt = h;
      } else {
        dt = h;
        if (dt < opts.min_dt) {
          throw std::runtime_error("evolve: step size underflow at t = " + format_number(t));
        }
      }
    }
    t = target;
    const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    MatrixXcd rho = from_pauli_vector(r, n);
    const auto check = check_density_matrix(rho);
    ev.max_trace_error = std::max(ev.max_trace_error, check.trace_error);
    ev.min_eigenvalue = std::min(ev.min_eigenvalue, check.min_eigenvalue);
    ev.times.push_back(target);
    ev.states.push_back(std::move(rho));
  }
  return ev;
}

// -- stationary states ----------------------------------------------------------------------

StationaryReport stationary_state(const Liouvillian& gen, double tol) {
  StationaryReport rep;
  const std::size_t n = gen.n_qubits();
  const std::size_t trace_block = gen.block_of(0);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gen.dimension()));
  for (std::size_t b = 0; b < gen.block_count(); ++b) {
    const Eigen::MatrixXd& m = gen.block(b);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, b == trace_block ? Eigen::ComputeFullV : 0);
    const Eigen::VectorXd& s = svd.singularValues();
    const double scale = std::max(1.0, s.size() > 0 ? s(0) : 0.0);
    std::size_t null = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) null += s(i) <= tol * scale ? 1 : 0;
    if (null > 0) {
      rep.null_blocks.emplace_back(gen.block_representative(b), null);
      rep.null_dimension += null;
    }
    if (b == trace_block) {
      rep.trace_block_null_dimension = null;
      if (null == 0) {
        throw std::runtime_error("stationary_state: the trace-carrying block has no null vector");
      }
      const Eigen::VectorXd v = svd.matrixV().col(s.size() - 1);
      const auto& mem = gen.members(b);
      const auto pos0 = std::find(mem.begin(), mem.end(), 0u) - mem.begin();
      const double r_identity = v(pos0);
      if (std::abs(r_identity) < 1e-300) {
        throw std::runtime_error("stationary_state: null vector is traceless");
      }
      for (std::size_t j = 0; j < mem.size(); ++j) r(mem[j]) = v(static_cast<Eigen::Index>(j)) / r_identity;
    }
  }
  rep.rho = hermitize(from_pauli_vector(r, n));
  rep.residual = generator_residual(gen, rep.rho);
  return rep;
}

std::size_t sector_null_dimension(const StationaryReport& rep, std::size_t n,
                                  std::span<const PauliString> sector) {
  std::size_t total = 0;
  for (const auto& [rep_index, dim] : rep.null_blocks) {
    const PauliString p = pauli_from_index(rep_index, n);
    bool inside = true;
    for (const auto& s : sector) inside = inside && p.commutes_with(s);
    if (inside) total += dim;
  }
  return total;
}

double generator_residual(const Liouvillian& gen, const MatrixXcd& rho) {
  const Eigen::VectorXd lr = gen.apply(to_pauli_vector(rho, gen.n_qubits()));
  return lr.norm() / std::sqrt(static_cast<double>(std::uint64_t{1} << gen.n_qubits()));
}

double excitation_density(const TorusLattice& lat, const MatrixXcd& rho) {
  double acc = 0.0;
  std::size_t count = 0;
  for (const auto& s : lat.vertex_stabilizers()) {
    acc += 0.5 * (1.0 - pauli_expectation(s, rho));
    ++count;
  }
  for (const auto& s : lat.plaquette_stabilizers()) {
    acc += 0.5 * (1.0 - pauli_expectation(s, rho));
    ++count;
  }
  return acc / static_cast<double>(count);
}

}  // namespace strobe
