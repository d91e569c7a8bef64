#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>

#include "qio/errors.hpp"
#include "qio/tensor4.hpp"

namespace qio {

/// Second-quantized electronic Hamiltonian in a fixed orthonormal orbital
/// basis.  Two-electron integrals are kept in chemists' notation (pq|rs)
/// with full 8-fold permutational symmetry stored explicitly.
struct MolecularHamiltonian {
  std::size_t n_orbitals = 0;
  std::size_t n_electrons = 0;
  int ms2 = 0;  // twice the spin projection
  double core_energy = 0.0;
  Eigen::MatrixXd one_body;  // h_pq, symmetric
  Tensor4 two_body;          // g_pqrs = (pq|rs)

  MolecularHamiltonian() = default;
  MolecularHamiltonian(std::size_t m, std::size_t n, int ms2_in = 0)
      : n_orbitals(m),
        n_electrons(n),
        ms2(ms2_in),
        one_body(Eigen::MatrixXd::Zero(m, m)),
        two_body(m) {
    if (n > 2 * m) throw DomainError("n_electrons exceeds 2 * n_orbitals");
  }

  std::size_t n_alpha() const { return (n_electrons + ms2) / 2; }
  std::size_t n_beta() const { return (n_electrons - ms2) / 2; }

  /// Sets g_pqrs and its seven symmetry images.
  void set_two_body(std::size_t p, std::size_t q, std::size_t r, std::size_t s,
                    double value) {
    two_body(p, q, r, s) = value;
    two_body(q, p, r, s) = value;
    two_body(p, q, s, r) = value;
    two_body(q, p, s, r) = value;
    two_body(r, s, p, q) = value;
    two_body(s, r, p, q) = value;
    two_body(r, s, q, p) = value;
    two_body(s, r, q, p) = value;
  }

  /// Checks the symmetry and finiteness invariants; throws ValueError on
  /// violation. Tolerance matches the storage contract (1e-12).
  void validate() const {
    const std::size_t m = n_orbitals;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = 0; q < m; ++q) {
        if (!std::isfinite(one_body(p, q)))
          throw ValueError("non-finite one-body integral");
        if (std::abs(one_body(p, q) - one_body(q, p)) > 1e-12)
          throw ValueError("one-body integrals not symmetric");
      }
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = 0; q < m; ++q)
        for (std::size_t r = 0; r < m; ++r)
          for (std::size_t s = 0; s < m; ++s) {
            const double g = two_body(p, q, r, s);
            if (!std::isfinite(g)) throw ValueError("non-finite two-body integral");
            if (std::abs(g - two_body(q, p, r, s)) > 1e-12 ||
                std::abs(g - two_body(p, q, s, r)) > 1e-12 ||
                std::abs(g - two_body(r, s, p, q)) > 1e-12)
              throw ValueError("two-body integrals break 8-fold symmetry");
          }
  }
};

enum class BasisProvenance { HfInit, Qio, NaturalOrbital, Imported };

inline const char* to_string(BasisProvenance p) {
  switch (p) {
    case BasisProvenance::HfInit: return "HF-init";
    case BasisProvenance::Qio: return "QIO";
    case BasisProvenance::NaturalOrbital: return "NO";
    case BasisProvenance::Imported: return "imported";
  }
  return "?";
}

/// Real orthogonal change of orbital basis.  Row i of `coefficients`
/// expresses current orbital i in the reference basis, so one-body
/// quantities transform by the congruence U A U^T.
struct OrbitalBasis {
  Eigen::MatrixXd coefficients;
  BasisProvenance provenance = BasisProvenance::HfInit;

  OrbitalBasis() = default;
  explicit OrbitalBasis(Eigen::MatrixXd u,
                        BasisProvenance prov = BasisProvenance::Imported)
      : coefficients(std::move(u)), provenance(prov) {}

  static OrbitalBasis identity(std::size_t m) {
    return OrbitalBasis(Eigen::MatrixXd::Identity(m, m), BasisProvenance::HfInit);
  }

  std::size_t dim() const { return static_cast<std::size_t>(coefficients.rows()); }

  double orthogonality_defect() const {
    const auto& u = coefficients;
    return (u * u.transpose() - Eigen::MatrixXd::Identity(u.rows(), u.cols()))
        .cwiseAbs()
        .maxCoeff();
  }

  void require_orthogonal(double tol = 1e-8) const {
    if (coefficients.rows() != coefficients.cols())
      throw BasisError("basis matrix is not square");
    if (orthogonality_defect() > tol)
      throw BasisError("basis matrix is not orthogonal within tolerance");
  }

  /// Composition: apply `this` after `first`.
  OrbitalBasis after(const OrbitalBasis& first) const {
    return OrbitalBasis(coefficients * first.coefficients, provenance);
  }
};

/// 1D Hubbard chain as a molecular Hamiltonian: hopping -t between
/// neighbours (wrapped if periodic), on-site repulsion u.
inline MolecularHamiltonian make_hubbard(std::size_t n_sites, double t, double u,
                                         bool periodic, std::size_t n_electrons) {
  if (n_sites < 2) throw DomainError("Hubbard chain needs at least 2 sites");
  MolecularHamiltonian h(n_sites, n_electrons, static_cast<int>(n_electrons % 2));
  for (std::size_t p = 0; p + 1 < n_sites; ++p) {
    h.one_body(p, p + 1) = -t;
    h.one_body(p + 1, p) = -t;
  }
  if (periodic && n_sites > 2) {
    h.one_body(0, n_sites - 1) = -t;
    h.one_body(n_sites - 1, 0) = -t;
  }
  for (std::size_t p = 0; p < n_sites; ++p) h.set_two_body(p, p, p, p, u);
  return h;
}

namespace detail {

/// One-index contraction t'[p...] = sum_a U_pa t[a...] applied to the
/// leading index; callers permute indices between passes.
inline Tensor4 contract_leading(const Eigen::MatrixXd& u, const Tensor4& t) {
  const std::size_t m = t.dim();
  Tensor4 out(m);
  // view the tensor as an (m) x (m^3) matrix and multiply once
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      in(t.data(), m, m * m * m);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>>
      res(out.data(), m, m * m * m);
  res = u * in;
  return out;
}

/// Cyclic index rotation t'[q,r,s,p] = t[p,q,r,s].
inline Tensor4 cycle(const Tensor4& t) {
  const std::size_t m = t.dim();
  Tensor4 out(m);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q)
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t s = 0; s < m; ++s) out(q, r, s, p) = t(p, q, r, s);
  return out;
}

}  // namespace detail

/// Congruence transform of all integrals into the basis `b`:
///   h'_ij = sum_ab U_ia U_jb h_ab,  g'_ijkl = sum U U U U g_abcd.
/// Implemented as four sequential one-index contractions (M^5 cost).
inline MolecularHamiltonian transform_integrals(const MolecularHamiltonian& h,
                                                const OrbitalBasis& b) {
  if (b.dim() != h.n_orbitals)
    throw DimensionError("basis dimension does not match Hamiltonian");
  b.require_orthogonal(1e-8);
  const auto& u = b.coefficients;

  MolecularHamiltonian out(h.n_orbitals, h.n_electrons, h.ms2);
  out.core_energy = h.core_energy;
  out.one_body = u * h.one_body * u.transpose();

  Tensor4 g = h.two_body;
  for (int pass = 0; pass < 4; ++pass)
    g = detail::cycle(detail::contract_leading(u, g));

  // congruence by an orthogonal matrix preserves the 8-fold symmetry;
  // re-symmetrize to keep the stored invariant exact against roundoff
  const std::size_t m = h.n_orbitals;
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q <= p; ++q)
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t s = 0; s <= r; ++s) {
          if (p * m + q < r * m + s) continue;
          const double avg =
              (g(p, q, r, s) + g(q, p, r, s) + g(p, q, s, r) + g(q, p, s, r) +
               g(r, s, p, q) + g(s, r, p, q) + g(r, s, q, p) + g(s, r, q, p)) /
              8.0;
          out.set_two_body(p, q, r, s, avg);
        }
  out.one_body = 0.5 * (out.one_body + out.one_body.transpose()).eval();
  return out;
}

}  // namespace qio
