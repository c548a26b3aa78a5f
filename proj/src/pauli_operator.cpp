#include "strobe/pauli_operator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace strobe {

namespace {

// 2^n amplitudes are indexed with signed loops for OpenMP.
using index_t = std::int64_t;

inline bool odd_parity(std::uint64_t v) { return std::popcount(v) & 1; }

}  // namespace

PauliOperator::PauliOperator(const PauliSum& sum) : n_(sum.n_qubits()) {
  if (n_ >= 40) {
    throw std::invalid_argument("PauliOperator: state vectors of " +
                                std::to_string(n_) + " qubits are not supported");
  }
  std::map<std::uint64_t, std::vector<Term>> by_x;
  for (const auto& [p, c] : sum.terms()) {
    const cplx coeff =
        c * i_pow(p.phase_quarter() + std::popcount(p.x_mask() & p.z_mask()));
    by_x[p.x_mask()].push_back({p.z_mask(), coeff});
  }
  groups_.reserve(by_x.size());
  for (auto& [x, terms] : by_x) groups_.push_back({x, std::move(terms)});
}

std::size_t PauliOperator::num_terms() const {
  std::size_t n = 0;
  for (const auto& g : groups_) n += g.terms.size();
  return n;
}

void PauliOperator::check(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != dimension() || out.size() != dimension()) {
    throw std::invalid_argument("PauliOperator: vector dimension mismatch");
  }
  if (in.data() == out.data()) {
    throw std::invalid_argument("PauliOperator: in-place application is not supported");
  }
}

void PauliOperator::apply(std::span<const cplx> in, std::span<cplx> out) const {
  check(in, out);
  std::fill(out.begin(), out.end(), cplx{});
  apply_add(in, out, 1.0);
}

void PauliOperator::apply_add(std::span<const cplx> in, std::span<cplx> out,
                              cplx scale) const {
  check(in, out);
  const index_t dim = static_cast<index_t>(dimension());
  const Group* groups = groups_.data();
  const std::size_t ngroups = groups_.size();
  const cplx* src = in.data();
  cplx* dst = out.data();
  // Gather: out[b] += sum_t c_t (-1)^{|z_t & b'|} in[b'] with b' = b ^ x.
#pragma omp parallel for schedule(static)
  for (index_t bi = 0; bi < dim; ++bi) {
    const auto b = static_cast<std::uint64_t>(bi);
    cplx acc = 0.0;
    for (std::size_t g = 0; g < ngroups; ++g) {
      const std::uint64_t src_index = b ^ groups[g].x;
      cplx local = 0.0;
      for (const Term& t : groups[g].terms) {
        if (odd_parity(t.z & src_index)) {
          local -= t.coeff;
        } else {
          local += t.coeff;
        }
      }
      acc += local * src[src_index];
    }
    dst[b] += scale * acc;
  }
}

void PauliOperator::apply_block(std::span<const cplx> in, std::span<cplx> out,
                                std::size_t cols) const {
  const index_t dim = static_cast<index_t>(dimension());
  if (in.size() != dimension() * cols || out.size() != dimension() * cols) {
    throw std::invalid_argument("PauliOperator: block dimension mismatch");
  }
  if (in.data() == out.data()) {
    throw std::invalid_argument("PauliOperator: in-place application is not supported");
  }
  constexpr std::size_t kTile = 8;
  const Group* groups = groups_.data();
  const std::size_t ngroups = groups_.size();
  for (std::size_t c0 = 0; c0 < cols; c0 += kTile) {
    const std::size_t width = std::min(kTile, cols - c0);
    const cplx* src = in.data() + c0 * dim;
    cplx* dst = out.data() + c0 * dim;
#pragma omp parallel for schedule(static)
    for (index_t bi = 0; bi < dim; ++bi) {
      const auto b = static_cast<std::uint64_t>(bi);
      cplx acc[kTile] = {};
      for (std::size_t g = 0; g < ngroups; ++g) {
        const std::uint64_t src_index = b ^ groups[g].x;
        cplx local = 0.0;
        for (const Term& t : groups[g].terms) {
          if (odd_parity(t.z & src_index)) {
            local -= t.coeff;
          } else {
            local += t.coeff;
          }
        }
        const cplx* s = src + src_index;
        for (std::size_t j = 0; j < width; ++j) acc[j] += local * s[j * dim];
      }
      for (std::size_t j = 0; j < width; ++j) dst[b + j * dim] = acc[j];
    }
  }
}

void PauliOperator::apply_serial(std::span<const cplx> in,
                                 std::span<cplx> out) const {
  check(in, out);
  std::fill(out.begin(), out.end(), cplx{});
  const std::uint64_t dim = dimension();
  for (const Group& g : groups_) {
    for (const Term& t : g.terms) {
      for (std::uint64_t b = 0; b < dim; ++b) {
        const cplx v = t.coeff * in[b];
        out[b ^ g.x] += odd_parity(t.z & b) ? -v : v;
      }
    }
  }
}

cplx PauliOperator::expectation(std::span<const cplx> v) const {
  std::vector<cplx> tmp(v.size());
  apply(v, tmp);
  return kernels::dot(v, tmp);
}

namespace kernels {

namespace {

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int thread_id() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

// Contiguous row range [lo, hi) of thread t out of nt.
std::pair<index_t, index_t> chunk(index_t rows, int t, int nt) {
  const index_t base = rows / nt;
  const index_t extra = rows % nt;
  const index_t lo = t * base + std::min<index_t>(t, extra);
  return {lo, lo + base + (t < extra ? 1 : 0)};
}

// Per-thread partial sums over contiguous chunks, combined in thread order so
// the result is reproducible for a fixed thread count. body(lo, hi, acc)
// accumulates rows [lo, hi) into acc[0..width).
template <typename Body>
std::vector<cplx> reduce_chunks(index_t rows, std::size_t width, Body body) {
  const int nt = thread_count();
  std::vector<cplx> partial(static_cast<std::size_t>(nt) * width);
#pragma omp parallel num_threads(nt)
  {
    const int t = thread_id();
    const auto [lo, hi] = chunk(rows, t, nt);
    body(lo, hi, partial.data() + static_cast<std::size_t>(t) * width);
  }
  std::vector<cplx> out(width);
  for (int t = 0; t < nt; ++t) {
    for (std::size_t j = 0; j < width; ++j) out[j] += partial[t * width + j];
  }
  return out;
}

// sum_i conj(a_i) b_i over [lo, hi) in split real arithmetic.
cplx dot_range(const cplx* a, const cplx* b, index_t lo, index_t hi) {
  double re = 0.0, im = 0.0;
  for (index_t i = lo; i < hi; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

}  // namespace

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  return reduce_chunks(static_cast<index_t>(a.size()), 1,
                       [&](index_t lo, index_t hi, cplx* acc) {
                         acc[0] += dot_range(a.data(), b.data(), lo, hi);
                       })[0];
}

double norm(std::span<const cplx> v) {
  return std::sqrt(dot(v, v).real());
}

std::vector<cplx> inner_products(std::span<const cplx> basis, std::size_t rows,
                                 std::size_t count, std::span<const cplx> w) {
  if (basis.size() < rows * count || w.size() != rows) {
    throw std::invalid_argument("inner_products: shape mismatch");
  }
  return reduce_chunks(static_cast<index_t>(rows), count,
                       [&](index_t lo, index_t hi, cplx* acc) {
                         for (std::size_t j = 0; j < count; ++j) {
                           acc[j] += dot_range(basis.data() + j * rows, w.data(), lo, hi);
                         }
                       });
}

std::vector<cplx> project_out(std::span<const cplx> basis, std::size_t rows,
                              std::size_t count, std::span<cplx> w) {
  auto c = inner_products(basis, rows, count, w);
  const index_t n = static_cast<index_t>(rows);
  const int nt = thread_count();
#pragma omp parallel num_threads(nt)
  {
    const auto [lo, hi] = chunk(n, thread_id(), nt);
    for (std::size_t j = 0; j < count; ++j) {
      const double cr = c[j].real(), ci = c[j].imag();
      const cplx* col = basis.data() + j * rows;
      for (index_t i = lo; i < hi; ++i) {
        const double br = col[i].real(), bi = col[i].imag();
        w[i] -= cplx(cr * br - ci * bi, cr * bi + ci * br);
      }
    }
  }
  return c;
}

std::vector<cplx> project_out_serial(std::span<const cplx> basis,
                                     std::size_t rows, std::size_t count,
                                     std::span<cplx> w) {
  if (basis.size() < rows * count || w.size() != rows) {
    throw std::invalid_argument("project_out: shape mismatch");
  }
  std::vector<cplx> c(count);
  for (std::size_t j = 0; j < count; ++j) {
    for (std::size_t i = 0; i < rows; ++i) c[j] += std::conj(basis[j * rows + i]) * w[i];
  }
  for (std::size_t j = 0; j < count; ++j) {
    for (std::size_t i = 0; i < rows; ++i) w[i] -= c[j] * basis[j * rows + i];
  }
  return c;
}

}  // namespace kernels

}  // namespace strobe
