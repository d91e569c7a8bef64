#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "qio/ci.hpp"
#include "qio/determinant.hpp"
#include "qio/errors.hpp"
#include "qio/hamiltonian.hpp"
#include "qio/tensor4.hpp"

namespace qio {

/// Spin-resolved reduced density matrices of a pure determinant expansion.
///
/// gamma2 is the spin-summed two-particle matrix
///   Gamma^{pq}_{rs} = sum_{st} < a+_{p,s} a+_{q,t} a_{s,t} a_{r,s} >,
/// which carries everything the entropy functional needs: the same-orbital
/// alpha-beta pair density is Gamma^{i ibar}_{i ibar} = Gamma^{ii}_{ii}/2,
/// and that identity survives orbital rotation because the same-spin
/// blocks vanish under the symmetric four-index congruence.
struct SpinRdms {
  Eigen::MatrixXd gamma_aa;      // <a+_{p alpha} a_{q alpha}>
  Eigen::MatrixXd gamma_bb;      // <a+_{p beta}  a_{q beta}>
  Eigen::VectorXd pair_diag;     // <n_{i alpha} n_{i beta}>
  std::optional<Tensor4> gamma2; // spin-summed, chemists' index order (p,q,r,s)

  std::size_t dim() const { return static_cast<std::size_t>(gamma_aa.rows()); }
  bool has_gamma2() const { return gamma2.has_value(); }

  Eigen::MatrixXd spin_traced() const { return gamma_aa + gamma_bb; }
};

namespace detail {

/// Single transitions plus the diagonal (number-operator) entries, i.e.
/// all nonzero <J| a+_p a_q |I> within one spin sector.
inline std::vector<std::vector<StringTransition>> extended_transitions(
    const std::vector<OrbString>& strings, std::size_t m) {
  auto tables = StringTables::build(strings, m);
  for (std::size_t i = 0; i < strings.size(); ++i)
    for (std::size_t p : tables.occ[i])
      tables.singles[i].push_back({static_cast<std::uint32_t>(i),
                                   static_cast<std::uint16_t>(p),
                                   static_cast<std::uint16_t>(p), 1});
  return std::move(tables.singles);
}

}  // namespace detail

/// Symmetric expectation values over the determinant expansion.  With
/// with_gamma2 the full spin-summed 2-RDM is accumulated (M^4 storage).
inline SpinRdms rdms_from_ci(const CiVector& v, bool with_gamma2 = true) {
  const auto& sp = v.space;
  const std::size_t m = sp.n_orbitals;
  const std::size_t na = sp.alpha_strings.size();
  const std::size_t nb = sp.beta_strings.size();
  const Eigen::MatrixXd& c = v.coefficients;

  const auto ta = detail::extended_transitions(sp.alpha_strings, m);
  const auto tb = detail::extended_transitions(sp.beta_strings, m);

  // string-pair overlaps: D_alpha(J,I) = sum_ib c(J,ib) c(I,ib)
  const Eigen::MatrixXd da = c * c.transpose();
  const Eigen::MatrixXd db = c.transpose() * c;

  SpinRdms r;
  r.gamma_aa = Eigen::MatrixXd::Zero(m, m);
  r.gamma_bb = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t ia = 0; ia < na; ++ia)
    for (const auto& t : ta[ia]) r.gamma_aa(t.cre, t.ann) += t.phase * da(t.target, ia);
  for (std::size_t ib = 0; ib < nb; ++ib)
    for (const auto& t : tb[ib]) r.gamma_bb(t.cre, t.ann) += t.phase * db(t.target, ib);
  r.gamma_aa = 0.5 * (r.gamma_aa + r.gamma_aa.transpose()).eval();
  r.gamma_bb = 0.5 * (r.gamma_bb + r.gamma_bb.transpose()).eval();

  r.pair_diag = Eigen::VectorXd::Zero(m);
  for (std::size_t ia = 0; ia < na; ++ia) {
    const OrbString sa = sp.alpha_strings[ia];
    for (std::size_t ib = 0; ib < nb; ++ib) {
      const OrbString both = sa & sp.beta_strings[ib];
      if (!both) continue;
      const double w = c(ia, ib) * c(ia, ib);
      OrbString s = both;
      while (s) {
        r.pair_diag(static_cast<std::size_t>(std::countr_zero(s))) += w;
        s &= s - 1;
      }
    }
  }

  if (!with_gamma2) return r;

  Tensor4 g2(m);
  // opposite-spin block, entered at (p,q,r,s) and its beta-alpha mirror
  for (std::size_t ia = 0; ia < na; ++ia)
    for (const auto& a : ta[ia])
      for (std::size_t ib = 0; ib < nb; ++ib)
        for (const auto& b : tb[ib]) {
          const double w = a.phase * b.phase * c(a.target, b.target) * c(ia, ib);
          if (w == 0.0) continue;
          g2(a.cre, b.cre, a.ann, b.ann) += w;
          g2(b.cre, a.cre, b.ann, a.ann) += w;
        }
  // same-spin blocks via composition: <a+p a+q a_s a_r> = <E_pr E_qs> - d_qr <E_ps>
  auto same_spin = [&](const std::vector<std::vector<detail::StringTransition>>& tr,
                       const Eigen::MatrixXd& d, const Eigen::MatrixXd& gamma) {
    const std::size_t n_str = tr.size();
    for (std::size_t i = 0; i < n_str; ++i)
      for (const auto& first : tr[i])  // E_qs with q = first.cre, s = first.ann
        for (const auto& second : tr[first.target])  // E_pr
          g2(second.cre, first.cre, second.ann, first.ann) +=
              first.phase * second.phase * d(second.target, i);
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = 0; q < m; ++q)
        for (std::size_t s = 0; s < m; ++s)
          g2(p, q, q, s) -= gamma(p, s);
  };
  same_spin(ta, da, r.gamma_aa);
  same_spin(tb, db, r.gamma_bb);
  r.gamma2 = std::move(g2);
  return r;
}

/// Per-orbital eigenvalue quadruples (lambda_0..lambda_3) of the diagonal
/// single-orbital reduced states, from the 1-RDM diagonals and the
/// same-orbital pair density.
struct OrbitalSpectrum {
  Eigen::MatrixXd lambdas;  // M x 4

  std::size_t dim() const { return static_cast<std::size_t>(lambdas.rows()); }
};

inline OrbitalSpectrum orbital_spectrum(const SpinRdms& r) {
  const std::size_t m = r.dim();
  OrbitalSpectrum sp;
  sp.lambdas.resize(m, 4);
  for (std::size_t i = 0; i < m; ++i) {
    const double ga = r.gamma_aa(i, i);
    const double gb = r.gamma_bb(i, i);
    const double pd = r.pair_diag(i);
    double row[4] = {1.0 - ga - gb + pd, ga - pd, gb - pd, pd};
    for (int k = 0; k < 4; ++k) {
      if (row[k] < -1e-8)
        throw PositivityError("orbital occupation eigenvalue below -1e-8");
      sp.lambdas(i, k) = std::max(row[k], 0.0);
    }
  }
  return sp;
}

/// Congruence transform of the RDMs by the orthogonal matrix u.
inline SpinRdms rotate_rdms(const SpinRdms& r, const Eigen::MatrixXd& u) {
  if (!r.has_gamma2()) throw MissingDataError("rotation requires the full 2-RDM");
  if (static_cast<std::size_t>(u.rows()) != r.dim())
    throw DimensionError("rotation dimension mismatch");
  SpinRdms out;
  out.gamma_aa = u * r.gamma_aa * u.transpose();
  out.gamma_bb = u * r.gamma_bb * u.transpose();
  Tensor4 g = *r.gamma2;
  for (int pass = 0; pass < 4; ++pass)
    g = detail::cycle(detail::contract_leading(u, g));
  const std::size_t m = r.dim();
  out.pair_diag.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.pair_diag(i) = 0.5 * g(i, i, i, i);
  out.gamma2 = std::move(g);
  return out;
}

inline SpinRdms rotate_rdms(const SpinRdms& r, const OrbitalBasis& basis) {
  basis.require_orthogonal(1e-8);
  return rotate_rdms(r, basis.coefficients);
}

/// Frobenius distance between two spin-summed 2-RDMs (both in one basis).
inline double rdm_distance(const SpinRdms& a, const SpinRdms& b) {
  if (!a.has_gamma2() || !b.has_gamma2())
    throw MissingDataError("2-RDM distance requires full 2-RDMs");
  if (a.dim() != b.dim()) throw DimensionError("2-RDM dimension mismatch");
  double acc = 0.0;
  const double* pa = a.gamma2->data();
  const double* pb = b.gamma2->data();
  for (std::size_t i = 0, n = a.gamma2->size(); i < n; ++i) {
    const double d = pa[i] - pb[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

/// Reduced state of an orbital subset in the local Fock basis
/// {empty, up, down, updown} per orbital (subset sorted ascending,
/// little-endian digit order).
struct SubsystemState {
  std::vector<std::size_t> orbitals;
  Eigen::MatrixXd density;
};

inline SubsystemState subsystem_density(const CiVector& v,
                                        std::vector<std::size_t> subset) {
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  if (subset.size() > 6)
    throw CapacityError("orbital subset larger than 6 is not supported");
  const auto& sp = v.space;
  for (std::size_t i : subset)
    if (i >= sp.n_orbitals) throw IndexError("subset orbital out of range");

  OrbString mask = 0;
  for (std::size_t i : subset) mask |= OrbString{1} << i;
  const std::size_t k = subset.size();
  const std::size_t local_dim = std::size_t{1} << (2 * k);

  // env configuration -> list of (local index, signed amplitude)
  std::map<std::pair<OrbString, OrbString>, std::vector<std::pair<std::size_t, double>>>
      buckets;

  const std::size_t na = sp.alpha_strings.size();
  const std::size_t nb = sp.beta_strings.size();
  for (std::size_t ia = 0; ia < na; ++ia) {
    const OrbString sa = sp.alpha_strings[ia];
    for (std::size_t ib = 0; ib < nb; ++ib) {
      const double amp = v.coefficients(ia, ib);
      if (amp == 0.0) continue;
      const OrbString sb = sp.beta_strings[ib];

      // (alpha block)(beta block) -> orbital-major interleaved ordering
      int phase = 1;
      OrbString btmp = sb;
      while (btmp) {
        const std::size_t b = static_cast<std::size_t>(std::countr_zero(btmp));
        if (std::popcount(sa >> (b + 1)) & 1) phase = -phase;
        btmp &= btmp - 1;
      }
      // pull subset orbitals to the front of the interleaved product
      std::size_t local = 0;
      for (std::size_t t = 0; t < k; ++t) {
        const std::size_t i = subset[t];
        const std::size_t n_here = ((sa >> i) & 1) + ((sb >> i) & 1);
        if (n_here & 1) {
          const OrbString below = (i == 0) ? 0 : ((OrbString{1} << i) - 1);
          const std::size_t env_before = std::popcount(sa & below & ~mask) +
                                         std::popcount(sb & below & ~mask);
          if (env_before & 1) phase = -phase;
        }
        const std::size_t digit = ((sa >> i) & 1) + 2 * ((sb >> i) & 1);
        local |= digit << (2 * t);
      }
      buckets[{sa & ~mask, sb & ~mask}].emplace_back(local, phase * amp);
    }
  }

  SubsystemState out;
  out.orbitals = subset;
  out.density = Eigen::MatrixXd::Zero(local_dim, local_dim);
  for (const auto& [env, entries] : buckets)
    for (const auto& [x1, a1] : entries)
      for (const auto& [x2, a2] : entries) out.density(x1, x2) += a1 * a2;
  return out;
}

/// Von Neumann entropy (natural log) of a Hermitian density matrix,
/// with small negative eigenvalues clamped to zero.
inline double von_neumann_entropy(const Eigen::MatrixXd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double lam = es.eigenvalues()(i);
    if (lam < -1e-8) throw PositivityError("density matrix eigenvalue below -1e-8");
    if (lam > 0.0) s -= lam * std::log(lam);
  }
  return s;
}

/// Text dump of the RDMs with a shape header; inverse of read_rdms.
inline void write_rdms(const SpinRdms& r, std::ostream& out) {
  const std::size_t m = r.dim();
  out << "# qio-rdm-v1\n" << std::scientific << std::setprecision(16);
  out << "gamma_aa " << m << ' ' << m << '\n';
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t q = 0; q < m; ++q) out << r.gamma_aa(p, q) << (q + 1 < m ? ' ' : '\n');
  }
  out << "gamma_bb " << m << ' ' << m << '\n';
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t q = 0; q < m; ++q) out << r.gamma_bb(p, q) << (q + 1 < m ? ' ' : '\n');
  }
  out << "pair_diag " << m << '\n';
  for (std::size_t p = 0; p < m; ++p) out << r.pair_diag(p) << (p + 1 < m ? ' ' : '\n');
  if (r.has_gamma2()) {
    out << "gamma2 " << m << ' ' << m << ' ' << m << ' ' << m << '\n';
    const double* d = r.gamma2->data();
    const std::size_t n = r.gamma2->size();
    for (std::size_t i = 0; i < n; ++i) out << d[i] << ((i + 1) % (m * m) == 0 ? '\n' : ' ');
  }
  if (!out) throw IoError("failed writing RDM dump");
}

inline SpinRdms read_rdms(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw ParseError("empty RDM dump");
  if (tok == "#") std::getline(in, tok), in >> tok;  // skip version comment
  SpinRdms r;
  auto read_matrix = [&](const std::string& name, Eigen::MatrixXd& mat) {
    if (tok != name) throw ParseError("RDM dump: expected section " + name);
    std::size_t rows, cols;
    if (!(in >> rows >> cols)) throw ParseError("RDM dump: bad shape for " + name);
    mat.resize(rows, cols);
    for (std::size_t p = 0; p < rows; ++p)
      for (std::size_t q = 0; q < cols; ++q)
        if (!(in >> mat(p, q))) throw ParseError("RDM dump: truncated " + name);
    in >> tok;
  };
  read_matrix("gamma_aa", r.gamma_aa);
  read_matrix("gamma_bb", r.gamma_bb);
  if (tok != "pair_diag") throw ParseError("RDM dump: expected section pair_diag");
  std::size_t m;
  if (!(in >> m)) throw ParseError("RDM dump: bad shape for pair_diag");
  r.pair_diag.resize(m);
  for (std::size_t p = 0; p < m; ++p)
    if (!(in >> r.pair_diag(p))) throw ParseError("RDM dump: truncated pair_diag");
  if (in >> tok && tok == "gamma2") {
    std::size_t d0, d1, d2, d3;
    if (!(in >> d0 >> d1 >> d2 >> d3) || d0 != m || d1 != m || d2 != m || d3 != m)
      throw ParseError("RDM dump: bad shape for gamma2");
    Tensor4 g(m);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!(in >> g.data()[i])) throw ParseError("RDM dump: truncated gamma2");
    r.gamma2 = std::move(g);
  }
  return r;
}

}  // namespace qio
