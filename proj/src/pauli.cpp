#include "strobe/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace strobe {

namespace {

constexpr int mod4(int k) { return ((k % 4) + 4) % 4; }

int popcount(std::uint64_t v) { return std::popcount(v); }

std::uint64_t mask_for(std::size_t n) {
  return n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
}

void check_size(std::size_t n) {
  if (n == 0 || n > kMaxQubits) {
    throw std::invalid_argument("PauliString: qubit count must be in [1, 64], got " +
                                std::to_string(n));
  }
}

void check_same_size(const PauliString& a, const PauliString& b) {
  if (a.n_qubits() != b.n_qubits()) {
    throw std::invalid_argument("Pauli size mismatch: " +
                                std::to_string(a.n_qubits()) + " vs " +
                                std::to_string(b.n_qubits()));
  }
}

}  // namespace

cplx i_pow(int k) {
  switch (mod4(k)) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

PauliString::PauliString(std::size_t n_qubits) : n_(n_qubits) {
  check_size(n_qubits);
}

PauliString::PauliString(std::size_t n_qubits, std::uint64_t x_mask,
                         std::uint64_t z_mask, int phase_quarter)
    : n_(n_qubits), x_(x_mask), z_(z_mask), phase_(mod4(phase_quarter)) {
  check_size(n_qubits);
  if ((x_mask | z_mask) & ~mask_for(n_qubits)) {
    throw std::invalid_argument("PauliString: mask has bits beyond n_qubits");
  }
}

PauliString PauliString::parse(std::string_view text) {
  int phase = 0;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() &&
           (text[pos] == ' ' || text[pos] == '*' || text[pos] == '.')) {
      ++pos;
    }
    // UTF-8 middle dot
    while (pos + 1 < text.size() && static_cast<unsigned char>(text[pos]) == 0xC2 &&
           static_cast<unsigned char>(text[pos + 1]) == 0xB7) {
      pos += 2;
      while (pos < text.size() && text[pos] == ' ') ++pos;
    }
  };
  skip();
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    if (text[pos] == '-') phase += 2;
    ++pos;
  }
  skip();
  if (pos < text.size() && text[pos] == 'i') {
    ++pos;
    int k = 1;
    if (pos < text.size() && text[pos] == '^') {
      ++pos;
      if (pos >= text.size() || text[pos] < '0' || text[pos] > '9') {
        throw std::invalid_argument("PauliString::parse: bad exponent in '" +
                                    std::string(text) + "'");
      }
      k = text[pos] - '0';
      ++pos;
    }
    phase += k;
  }
  skip();
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  std::size_t q = 0;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == ' ') continue;
    if (q >= kMaxQubits) {
      throw std::invalid_argument("PauliString::parse: more than 64 qubits");
    }
    const std::uint64_t bit = std::uint64_t{1} << q;
    switch (c) {
      case 'I': break;
      case 'X': x |= bit; break;
      case 'Y': x |= bit; z |= bit; break;
      case 'Z': z |= bit; break;
      default:
        throw std::invalid_argument("PauliString::parse: unexpected '" +
                                    std::string(1, c) + "' in '" +
                                    std::string(text) + "'");
    }
    ++q;
  }
  return {q, x, z, phase};
}

PauliString PauliString::single(std::size_t n_qubits, std::size_t qubit,
                                char op) {
  const std::pair<std::size_t, char> f{qubit, op};
  return from_factors(n_qubits, std::span(&f, 1));
}

PauliString PauliString::from_factors(
    std::size_t n_qubits,
    std::span<const std::pair<std::size_t, char>> factors) {
  PauliString p(n_qubits);
  for (const auto& [q, op] : factors) {
    if (q >= n_qubits) {
      throw std::out_of_range("PauliString: qubit " + std::to_string(q) +
                              " out of range");
    }
    const std::uint64_t bit = std::uint64_t{1} << q;
    std::uint64_t fx = 0;
    std::uint64_t fz = 0;
    switch (op) {
      case 'I': break;
      case 'X': fx = bit; break;
      case 'Y': fx = bit; fz = bit; break;
      case 'Z': fz = bit; break;
      default:
        throw std::invalid_argument("PauliString: unknown operator '" +
                                    std::string(1, op) + "'");
    }
    p = p * PauliString(n_qubits, fx, fz);
  }
  return p;
}

char PauliString::op_at(std::size_t qubit) const {
  const bool xb = (x_ >> qubit) & 1U;
  const bool zb = (z_ >> qubit) & 1U;
  if (xb && zb) return 'Y';
  if (xb) return 'X';
  if (zb) return 'Z';
  return 'I';
}

std::size_t PauliString::weight() const {
  return static_cast<std::size_t>(popcount(x_ | z_));
}

PauliString PauliString::adjoint() const { return {n_, x_, z_, -phase_}; }

bool PauliString::commutes_with(const PauliString& other) const {
  check_same_size(*this, other);
  return popcount((x_ & other.z_) ^ (z_ & other.x_)) % 2 == 0;
}

int PauliString::act_quarter(std::uint64_t basis) const {
  // P = i^phase * i^{|x&z|} X^x Z^z and Z^z|b> = (-1)^{|z&b|}|b>.
  return mod4(phase_ + popcount(x_ & z_) + 2 * popcount(z_ & basis));
}

PauliString::BasisImage PauliString::act(std::uint64_t basis) const {
  return {basis ^ x_, i_pow(act_quarter(basis))};
}

std::string PauliString::str() const {
  static constexpr const char* kPrefix[4] = {"+", "+i", "-", "-i"};
  std::string s = kPrefix[phase_];
  for (std::size_t q = 0; q < n_; ++q) s.push_back(op_at(q));
  return s;
}

PauliString multiply(const PauliString& a, const PauliString& b) {
  check_same_size(a, b);
  // Write each factor as i^{|x&z|} X^x Z^z, reorder Z^{z_a} X^{x_b} at the cost
  // of (-1)^{|z_a & x_b|}, then convert X^x Z^z of the product back.
  const std::uint64_t x = a.x_mask() ^ b.x_mask();
  const std::uint64_t z = a.z_mask() ^ b.z_mask();
  const int k = a.phase_quarter() + b.phase_quarter() +
                popcount(a.x_mask() & a.z_mask()) +
                popcount(b.x_mask() & b.z_mask()) +
                2 * popcount(a.z_mask() & b.x_mask()) - popcount(x & z);
  return {a.n_qubits(), x, z, k};
}

// ---------------------------------------------------------------------------

PauliSum::PauliSum(std::size_t n_qubits, double prune_tolerance)
    : n_(n_qubits), tol_(prune_tolerance) {}

PauliSum::PauliSum(const PauliString& p, cplx coeff, double prune_tolerance)
    : n_(p.n_qubits()), tol_(prune_tolerance) {
  add(p, coeff);
}

PauliSum PauliSum::identity(std::size_t n_qubits, cplx coeff) {
  return PauliSum(PauliString(n_qubits), coeff);
}

void PauliSum::set_prune_tolerance(double tol) {
  tol_ = tol;
  std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) < tol; });
}

void PauliSum::add(const PauliString& p, cplx coeff) {
  if (n_ == 0) n_ = p.n_qubits();
  if (p.n_qubits() != n_) {
    throw std::invalid_argument("PauliSum::add: size mismatch");
  }
  const cplx c = coeff * p.phase_factor();
  if (c == cplx{}) return;
  const PauliString key = p.normalized();
  auto [it, inserted] = terms_.try_emplace(key, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < tol_) terms_.erase(it);
}

void PauliSum::add(const PauliSum& other, cplx scale) {
  for (const auto& [p, c] : other.terms_) add(p, c * scale);
}

cplx PauliSum::coefficient(const PauliString& p) const {
  const auto it = terms_.find(p.normalized());
  return it == terms_.end() ? cplx{} : it->second * std::conj(p.phase_factor());
}

void PauliSum::erase(const PauliString& p) { terms_.erase(p.normalized()); }

PauliSum PauliSum::adjoint() const {
  PauliSum out(n_, tol_);
  for (const auto& [p, c] : terms_) out.terms_.emplace(p, std::conj(c));
  return out;
}

double PauliSum::anti_hermitian_norm() const {
  double worst = 0.0;
  for (const auto& [p, c] : terms_) worst = std::max(worst, std::abs(c.imag()));
  return 2.0 * worst;
}

bool PauliSum::is_hermitian(double tol) const {
  return anti_hermitian_norm() <= tol;
}

PauliSum PauliSum::hermitian_part() const {
  PauliSum out(n_, tol_);
  for (const auto& [p, c] : terms_) out.add(p, cplx(c.real(), 0.0));
  return out;
}

double PauliSum::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [p, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

double PauliSum::coefficient_norm() const {
  double s = 0.0;
  for (const auto& [p, c] : terms_) s += std::norm(c);
  return std::sqrt(s);
}

PauliSum PauliSum::pruned(double tol) const {
  PauliSum out(*this);
  out.set_prune_tolerance(tol);
  return out;
}

PauliSum& PauliSum::operator+=(const PauliSum& other) {
  add(other, 1.0);
  return *this;
}

PauliSum& PauliSum::operator-=(const PauliSum& other) {
  add(other, -1.0);
  return *this;
}

PauliSum& PauliSum::operator*=(cplx scale) {
  if (scale == cplx{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [p, c] : terms_) c *= scale;
  std::erase_if(terms_, [this](const auto& kv) { return std::abs(kv.second) < tol_; });
  return *this;
}

PauliSum operator*(const PauliSum& a, const PauliSum& b) {
  const std::size_t n = a.n_qubits() != 0 ? a.n_qubits() : b.n_qubits();
  PauliSum out(n, std::min(a.prune_tolerance(), b.prune_tolerance()));
  for (const auto& [pa, ca] : a.terms()) {
    for (const auto& [pb, cb] : b.terms()) out.add(pa * pb, ca * cb);
  }
  return out;
}

std::string PauliSum::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (const auto& [p, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.real();
    if (c.imag() != 0.0) os << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i";
    os << ")" << p.str().substr(1);
  }
  return os.str();
}

nlohmann::json PauliSum::to_json() const {
  auto j = nlohmann::json::array();
  for (const auto& [p, c] : terms_) j.push_back({p.str(), c.real(), c.imag()});
  return j;
}

PauliSum PauliSum::from_json(const nlohmann::json& j, std::size_t n_qubits) {
  PauliSum out(n_qubits);
  for (const auto& t : j) {
    const auto p = PauliString::parse(t.at(0).get<std::string>());
    if (p.n_qubits() != n_qubits) {
      throw std::invalid_argument("PauliSum::from_json: size mismatch");
    }
    out.add(p, cplx(t.at(1).get<double>(), t.at(2).get<double>()));
  }
  return out;
}

PauliSum commutator(const PauliString& a, const PauliString& b) {
  check_same_size(a, b);
  PauliSum out(a.n_qubits());
  if (a.commutes_with(b)) return out;
  // Anticommuting strings: ab - ba = 2ab.
  out.add(a * b, 2.0);
  return out;
}

PauliSum commutator(const PauliSum& a, const PauliSum& b) {
  PauliSum out(a.n_qubits(), std::min(a.prune_tolerance(), b.prune_tolerance()));
  for (const auto& [pa, ca] : a.terms()) {
    for (const auto& [pb, cb] : b.terms()) {
      if (!pa.commutes_with(pb)) out.add(pa * pb, 2.0 * ca * cb);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_dense_cap(std::size_t n, std::size_t cap) {
  if (n > cap) {
    throw DenseCapError("dense form of " + std::to_string(n) +
                        " qubits exceeds the cap of " + std::to_string(cap));
  }
}

}  // namespace

MatrixXcd to_dense(const PauliString& p, std::size_t dense_cap) {
  check_dense_cap(p.n_qubits(), dense_cap);
  const std::uint64_t dim = std::uint64_t{1} << p.n_qubits();
  MatrixXcd m = MatrixXcd::Zero(dim, dim);
  for (std::uint64_t b = 0; b < dim; ++b) {
    const auto img = p.act(b);
    m(img.target, b) = img.amplitude;
  }
  return m;
}

MatrixXcd to_dense(const PauliSum& s, std::size_t dense_cap) {
  check_dense_cap(s.n_qubits(), dense_cap);
  const std::uint64_t dim = std::uint64_t{1} << s.n_qubits();
  MatrixXcd m = MatrixXcd::Zero(dim, dim);
  for (const auto& [p, c] : s.terms()) {
    for (std::uint64_t b = 0; b < dim; ++b) {
      const auto img = p.act(b);
      m(img.target, b) += c * img.amplitude;
    }
  }
  return m;
}

PauliSum decompose(const MatrixXcd& m, std::size_t n_qubits,
                   double prune_tolerance) {
  if (n_qubits == 0 || n_qubits > 20 || m.rows() != m.cols() ||
      static_cast<std::uint64_t>(m.rows()) != (std::uint64_t{1} << n_qubits)) {
    throw std::invalid_argument("decompose: matrix is not 2^n x 2^n for n = " +
                                std::to_string(n_qubits));
  }
  const std::uint64_t dim = std::uint64_t{1} << n_qubits;
  PauliSum out(n_qubits, prune_tolerance);
  // Each string has one nonzero per column: P_{b^x, b} = amp(b), so
  // Tr(P^dagger M) = sum_b conj(amp(b)) M_{b^x, b}.
  for (std::uint64_t x = 0; x < dim; ++x) {
    for (std::uint64_t z = 0; z < dim; ++z) {
      const PauliString p(n_qubits, x, z);
      cplx acc = 0.0;
      for (std::uint64_t b = 0; b < dim; ++b) {
        acc += std::conj(i_pow(p.act_quarter(b))) * m(b ^ x, b);
      }
      out.add(p, acc / static_cast<double>(dim));
    }
  }
  return out;
}

void apply_to_state(const PauliString& p, std::span<const cplx> in,
                    std::span<cplx> out) {
  const std::uint64_t dim = std::uint64_t{1} << p.n_qubits();
  if (p.n_qubits() >= 63 || in.size() != dim || out.size() != dim) {
    throw std::invalid_argument("apply_to_state: state dimension mismatch");
  }
  const std::uint64_t x = p.x_mask();
  const std::uint64_t z = p.z_mask();
  const cplx base = i_pow(p.phase_quarter() + popcount(x & z));
  for (std::uint64_t b = 0; b < dim; ++b) {
    out[b ^ x] = (popcount(z & b) & 1) ? -base * in[b] : base * in[b];
  }
}

std::vector<cplx> apply_to_state(const PauliString& p,
                                 std::span<const cplx> in) {
  std::vector<cplx> out(in.size());
  apply_to_state(p, in, out);
  return out;
}

}  // namespace strobe
