#include "strobe/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "strobe/io.hpp"

namespace strobe {

using Eigen::Index;
using Eigen::VectorXcd;

const char* to_string(ChiPairing p) {
  return p == ChiPairing::SequenceGenerated ? "sequence" : "nearest-neighbor";
}

ChiPairing parse_pairing(const std::string& s) {
  if (s == "sequence") return ChiPairing::SequenceGenerated;
  if (s == "nearest-neighbor" || s == "nn") return ChiPairing::AllNearestNeighbor;
  throw std::invalid_argument("unknown chi pairing '" + s +
                              "' (expected 'sequence' or 'nearest-neighbor')");
}

std::vector<std::pair<int, int>> chi_pairs(const TorusLattice& lat, ChiPairing pairing) {
  std::vector<std::pair<int, int>> out;
  if (pairing == ChiPairing::AllNearestNeighbor) return lat.medial_edges();
  for (int k = 0; k < static_cast<int>(lat.n_vertices()); ++k) {
    const auto& nb = lat.vertex_links(k);
    out.emplace_back(nb[1], nb[2]);
  }
  for (int k = 0; k < static_cast<int>(lat.n_plaquettes()); ++k) {
    const auto& nb = lat.plaquette_links(k);
    out.emplace_back(nb[1], nb[2]);
  }
  return out;
}

SparseHamiltonian::SparseHamiltonian(std::size_t n_qubits,
                                     std::vector<std::pair<double, PauliString>> terms)
    : n_(n_qubits), terms_(std::move(terms)), sum_(n_qubits) {
  for (const auto& [c, p] : terms_) {
    if (p.n_qubits() != n_) throw std::invalid_argument("SparseHamiltonian: size mismatch");
    if (!p.is_hermitian()) {
      throw std::invalid_argument("SparseHamiltonian: non-Hermitian string " + p.str());
    }
    sum_.add(p, c);
  }
  op_ = PauliOperator(sum_);
}

MatrixXcd SparseHamiltonian::to_dense(std::size_t dense_cap) const {
  return strobe::to_dense(sum_, dense_cap);
}

SparseHamiltonian build_hamiltonian(const TorusLattice& lat, const HamiltonianParams& prm) {
  const std::size_t n = lat.n_links();
  std::vector<std::pair<double, PauliString>> terms;
  if (prm.j_e != 0.0) {
    for (const auto& s : lat.vertex_stabilizers()) terms.emplace_back(-prm.j_e, s);
  }
  if (prm.j_m != 0.0) {
    for (const auto& s : lat.plaquette_stabilizers()) terms.emplace_back(-prm.j_m, s);
  }
  if (prm.h_z != 0.0) {
    for (std::size_t q = 0; q < n; ++q) terms.emplace_back(-prm.h_z, PauliString::single(n, q, 'Z'));
  }
  if (prm.chi != 0.0) {
    for (const auto& [i, j] : chi_pairs(lat, prm.pairing)) {
      const std::pair<std::size_t, char> f[] = {{static_cast<std::size_t>(i), 'X'},
                                                {static_cast<std::size_t>(j), 'Y'}};
      terms.emplace_back(prm.chi, PauliString::from_factors(n, f));
    }
  }
  return SparseHamiltonian(n, std::move(terms));
}

// -- eigensolver ---------------------------------------------------------------

namespace {

std::span<const cplx> cspan(const cplx* p, Index n) {
  return {p, static_cast<std::size_t>(n)};
}
std::span<cplx> mspan(cplx* p, Index n) { return {p, static_cast<std::size_t>(n)}; }

SpectrumResult dense_lowest(const MatVec& apply, Index n, int k) {
  MatrixXcd h(n, n);
  VectorXcd e = VectorXcd::Zero(n);
  VectorXcd col(n);
  for (Index j = 0; j < n; ++j) {
    e(j) = 1.0;
    apply(cspan(e.data(), n), mspan(col.data(), n));
    h.col(j) = col;
    e(j) = 0.0;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (h + h.adjoint()));
  SpectrumResult r;
  r.matvecs = static_cast<int>(n);
  for (int j = 0; j < k; ++j) {
    r.eigenvalues.push_back(es.eigenvalues()(j));
    r.eigenvectors.push_back(es.eigenvectors().col(j));
    r.residuals.push_back((h * es.eigenvectors().col(j) -
                           es.eigenvalues()(j) * es.eigenvectors().col(j))
                              .norm());
  }
  return r;
}

}  // namespace

SpectrumResult block_krylov_lowest(const MatVec& apply, std::uint64_t dim, int k,
                                   const EigenOptions& opts) {
  const Index n = static_cast<Index>(dim);
  if (k < 1 || k > n) throw std::invalid_argument("block_krylov_lowest: bad k");
  const int b = std::max(opts.block_size, k + 2);
  const int m = std::max(opts.max_basis, 3 * b);
  if (n <= 2 * m) return dense_lowest(apply, n, k);

  // Thick-restart block Lanczos. Invariant: H V = V T + F C with F
  // orthonormal and orthogonal to V, so Ritz residuals are ||C y||.
  MatrixXcd V(n, m), F(n, b), W(n, b);
  MatrixXcd T = MatrixXcd::Zero(m, m);
  MatrixXcd C = MatrixXcd::Zero(b, m);
  int cols = 0;
  SpectrumResult res;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;

  auto orthogonalize = [&](cplx* w, int f_cols) {
    for (int pass = 0; pass < 2; ++pass) {
      if (cols > 0) {
        kernels::project_out(cspan(V.data(), n * cols), static_cast<std::size_t>(n),
                             static_cast<std::size_t>(cols), mspan(w, n));
      }
      if (f_cols > 0) {
        kernels::project_out(cspan(F.data(), n * f_cols), static_cast<std::size_t>(n),
                             static_cast<std::size_t>(f_cols), mspan(w, n));
      }
    }
  };
  // Fills F with an orthonormal basis of the columns of W, completing with
  // random directions where W is rank deficient; returns B with W = F B.
  auto orthonormalize_block = [&](double scale) {
    Eigen::ColPivHouseholderQR<MatrixXcd> qr(W);
    const MatrixXcd& qrm = qr.matrixQR();
    int rank = 0;
    while (rank < b && std::abs(qrm(rank, rank)) > 1e-12 * scale) ++rank;
    const MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(n, b);
    MatrixXcd r = MatrixXcd::Zero(b, b);
    r.topRows(rank) = qrm.topRows(rank).triangularView<Eigen::Upper>();
    const MatrixXcd bmat = r * qr.colsPermutation().transpose();
    F.leftCols(rank) = q.leftCols(rank);
    for (int j = rank; j < b; ++j) {
      for (int tries = 0;; ++tries) {
        if (tries == 20) throw std::runtime_error("block_krylov_lowest: could not extend the basis");
        VectorXcd w(n);
        for (Index i = 0; i < n; ++i) w(i) = cplx(gauss(rng), gauss(rng));
        const double before = w.norm();
        orthogonalize(w.data(), j);
        const double after = w.norm();
        if (after > 1e-6 * before) {
          F.col(j) = w / after;
          break;
        }
      }
    }
    if (rank < b && rank > 0) {
      // The completed columns were orthogonalized; recheck the QR columns too.
      for (int j = 0; j < rank; ++j) {
        VectorXcd w = F.col(j);
        orthogonalize(w.data(), 0);
        F.col(j) = w / w.norm();
      }
    }
    return bmat;
  };

  for (auto& c : W.reshaped()) c = cplx(gauss(rng), gauss(rng));
  orthonormalize_block(W.norm());

  double h_scale = 1.0;
  for (int iter = 1;; ++iter) {
    res.iterations = iter;
    apply(cspan(F.data(), n * b), mspan(W.data(), n * b));
    res.matvecs += b;
    V.middleCols(cols, b) = F;
    const int grown = cols + b;
    {
      const auto basis = V.leftCols(grown);
      MatrixXcd proj = basis.adjoint() * W;
      W.noalias() -= basis * proj;
      const MatrixXcd again = basis.adjoint() * W;
      W.noalias() -= basis * again;
      proj += again;
      T.block(0, cols, grown, b) = proj;
    }
    for (int j = 0; j < b; ++j) {
      for (int i = 0; i < cols; ++i) T(cols + j, i) = std::conj(T(i, cols + j));
    }
    const MatrixXcd diag = T.block(cols, cols, b, b);
    T.block(cols, cols, b, b) = 0.5 * (diag + diag.adjoint());
    cols = grown;

    const MatrixXcd bmat = orthonormalize_block(h_scale);
    C.setZero();
    C.block(0, cols - b, b, b) = bmat;

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(T.topLeftCorner(cols, cols));
    const MatrixXcd& Y = es.eigenvectors();
    const Eigen::VectorXd& theta = es.eigenvalues();
    h_scale = std::max(1.0, theta.cwiseAbs().maxCoeff());
    const int nk = std::min(k, cols);
    std::vector<double> est(nk);
    bool converged = nk == k;
    for (int j = 0; j < nk; ++j) {
      est[j] = (C.leftCols(cols) * Y.col(j)).norm();
      converged = converged && est[j] <= 0.5 * opts.tolerance;
    }
    if (converged) {
      const MatrixXcd X = V.leftCols(cols) * Y.leftCols(k);
      MatrixXcd hx(n, k);
      apply(cspan(X.data(), n * k), mspan(hx.data(), n * k));
      res.matvecs += k;
      std::vector<double> norms(k);
      bool ok = true;
      for (int j = 0; j < k; ++j) {
        norms[j] = (hx.col(j) - theta(j) * X.col(j)).norm();
        ok = ok && norms[j] <= opts.tolerance;
      }
      if (ok) {
        for (int j = 0; j < k; ++j) {
          res.eigenvalues.push_back(theta(j));
          res.eigenvectors.push_back(X.col(j));
          res.residuals.push_back(norms[j]);
        }
        return res;
      }
    }
    if (iter >= opts.max_iterations) {
      est.resize(k, std::numeric_limits<double>::infinity());
      throw ConvergenceError("block_krylov_lowest: no convergence after " +
                                 std::to_string(iter) + " iterations",
                             est);
    }

    if (cols + b > m) {
      const int keep = std::min(std::max(k + b, m / 2), m - b);
      const MatrixXcd v_new = V.leftCols(cols) * Y.leftCols(keep);
      V.leftCols(keep) = v_new;
      const MatrixXcd c_new = C.leftCols(cols) * Y.leftCols(keep);
      C.setZero();
      C.leftCols(keep) = c_new;
      T.setZero();
      for (int j = 0; j < keep; ++j) T(j, j) = theta(j);
      cols = keep;
    }
  }
}

SpectrumResult lowest_eigenpairs(const SparseHamiltonian& h, int k, const EigenOptions& opts) {
  return block_krylov_lowest(
      [&h](std::span<const cplx> in, std::span<cplx> out) {
        h.apply_block(in, out, in.size() / h.dimension());
      },
      h.dimension(), k, opts);
}

// -- fidelity ------------------------------------------------------------------

std::vector<VectorXcd> reference_ground_states(const TorusLattice& lat) {
  const std::size_t n = lat.n_links();
  if (n > 24) throw std::invalid_argument("reference_ground_states: lattice too large");
  const Index dim = Index{1} << n;
  const std::uint64_t m0 = lat.logical_x(0).x_mask();
  const std::uint64_t m1 = lat.logical_x(1).x_mask();
  std::vector<VectorXcd> out;
  std::vector<cplx> tmp(static_cast<std::size_t>(dim));
  for (std::uint64_t start : {std::uint64_t{0}, m0, m1, m0 ^ m1}) {
    VectorXcd psi = VectorXcd::Zero(dim);
    psi(static_cast<Index>(start)) = 1.0;
    for (const auto& bp : lat.plaquette_stabilizers()) {
      apply_to_state(bp, cspan(psi.data(), dim), tmp);
      for (Index i = 0; i < dim; ++i) psi(i) = 0.5 * (psi(i) + tmp[i]);
    }
    psi.normalize();
    out.push_back(std::move(psi));
  }
  return out;
}

FidelityResult ground_fidelity(std::span<const VectorXcd> reference,
                               std::span<const VectorXcd> perturbed) {
  if (reference.size() != perturbed.size() || reference.empty() || reference.size() > 8) {
    throw std::invalid_argument("ground_fidelity: manifolds must hold the same number (1..8) of states");
  }
  const int d = static_cast<int>(reference.size());
  FidelityResult r;
  r.manifold_ok = d == 4;
  r.overlaps.resize(d, d);
  for (int a = 0; a < d; ++a) {
    for (int c = 0; c < d; ++c) {
      if (reference[a].size() != perturbed[c].size()) {
        throw std::invalid_argument("ground_fidelity: state dimension mismatch");
      }
      r.overlaps(a, c) = reference[a].dot(perturbed[c]);
    }
  }
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1.0;
  do {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += std::abs(r.overlaps(a, perm[a]));
    if (s > best + 1e-14) {
      best = s;
      r.assignment = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (int a = 0; a < d; ++a) {
    r.per_state.push_back(std::min(1.0, std::abs(r.overlaps(a, r.assignment[a]))));
  }
  Eigen::JacobiSVD<MatrixXcd> svd(r.overlaps);
  r.subspace = std::min(1.0, svd.singularValues().mean());
  return r;
}

FidelityScan fidelity_scan(const TorusLattice& lat, std::span<const double> chis, double h_z,
                           const ScanOptions& opts) {
  FidelityScan scan;
  scan.h_z = h_z;
  scan.pairing = opts.pairing;
  const auto ref = reference_ground_states(lat);
  const int k = std::max(opts.n_eigenvalues, 5);
  for (double chi : chis) {
    FidelityPoint pt;
    pt.chi = chi;
    try {
      const auto h = build_hamiltonian(lat, {1.0, 1.0, chi, h_z, opts.pairing});
      const auto spec = lowest_eigenpairs(h, k, opts.eigen);
      pt.eigenvalues = spec.eigenvalues;
      pt.residuals = spec.residuals;
      const std::span<const VectorXcd> low(spec.eigenvectors.data(), 4);
      const auto f = ground_fidelity(ref, low);
      pt.subspace_fidelity = f.subspace;
      pt.per_state = f.per_state;
      pt.manifold_spread = spec.eigenvalues[3] - spec.eigenvalues[0];
      pt.gap = spec.eigenvalues[4] - spec.eigenvalues[3];
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    scan.points.push_back(std::move(pt));
  }
  return scan;
}

std::string spectrum_csv(const FidelityScan& scan) {
  std::string out = csv_header("strobe.spectrum", 1, "chi,h_z,index,eigenvalue,residual");
  for (const auto& pt : scan.points) {
    for (std::size_t j = 0; j < pt.eigenvalues.size(); ++j) {
      out += format_number(pt.chi) + "," + format_number(scan.h_z) + "," + std::to_string(j) +
             "," + format_number(pt.eigenvalues[j]) + "," + format_number(pt.residuals[j]) + "\n";
    }
  }
  return out;
}

std::string fidelity_csv(const FidelityScan& scan) {
  std::string out =
      csv_header("strobe.fidelity", 1, "chi,subspace_fidelity,f1,f2,f3,f4,spread,gap,status");
  for (const auto& pt : scan.points) {
    out += format_number(pt.chi) + ",";
    if (pt.error) {
      out += ",,,,,,,failed\n";
      continue;
    }
    out += format_number(pt.subspace_fidelity);
    for (double f : pt.per_state) out += "," + format_number(f);
    out += "," + format_number(pt.manifold_spread) + "," + format_number(pt.gap) + ",ok\n";
  }
  return out;
}

}  // namespace strobe
