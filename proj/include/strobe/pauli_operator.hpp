#pragma once

// Matrix-free action of a PauliSum on state vectors.
//
// Terms are grouped by X mask so that every group is a single bit permutation
// b -> b ^ x followed by a diagonal sign pattern. Two kernels are provided:
//   apply()         OpenMP gather over output amplitudes (production path)
//   apply_serial()  term-by-term scatter; kept as the reference for tests
//                   and benchmarks.

#include <cstdint>
#include <span>
#include <vector>

#include "strobe/pauli.hpp"

namespace strobe {

class PauliOperator {
 public:
  PauliOperator() = default;
  explicit PauliOperator(const PauliSum& sum);

  std::size_t n_qubits() const { return n_; }
  std::uint64_t dimension() const { return std::uint64_t{1} << n_; }
  std::size_t num_terms() const;
  bool empty() const { return groups_.empty(); }

  /// out = Op * in.
  void apply(std::span<const cplx> in, std::span<cplx> out) const;
  void apply_serial(std::span<const cplx> in, std::span<cplx> out) const;

  /// Applies the operator to `cols` column-major vectors at once, sharing
  /// the sign evaluation between columns.
  void apply_block(std::span<const cplx> in, std::span<cplx> out, std::size_t cols) const;

  /// out += scale * Op * in.
  void apply_add(std::span<const cplx> in, std::span<cplx> out,
                 cplx scale = 1.0) const;

  /// <v|Op|v>.
  cplx expectation(std::span<const cplx> v) const;

 private:
  struct Term {
    std::uint64_t z;
    cplx coeff;  // includes i^{phase + |x&z|}
  };
  struct Group {
    std::uint64_t x;
    std::vector<Term> terms;
  };

  void check(std::span<const cplx> in, std::span<cplx> out) const;

  std::size_t n_ = 0;
  std::vector<Group> groups_;
};

namespace kernels {

/// Inner products c_j = <basis_j | w> for the first `count` columns of a
/// column-major N x m block, then w -= sum_j c_j basis_j. Returns c.
std::vector<cplx> project_out(std::span<const cplx> basis, std::size_t rows,
                              std::size_t count, std::span<cplx> w);
std::vector<cplx> project_out_serial(std::span<const cplx> basis,
                                     std::size_t rows, std::size_t count,
                                     std::span<cplx> w);

/// Plain inner products <basis_j | w>, j < count.
std::vector<cplx> inner_products(std::span<const cplx> basis, std::size_t rows,
                                 std::size_t count, std::span<const cplx> w);

double norm(std::span<const cplx> v);
cplx dot(std::span<const cplx> a, std::span<const cplx> b);

}  // namespace kernels

}  // namespace strobe
