#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "qio/determinant.hpp"
#include "qio/errors.hpp"
#include "qio/hamiltonian.hpp"

namespace qio {

struct SolverOptions {
  std::size_t max_determinants = 2'000'000;
  double residual_tol = 1e-8;
  std::size_t max_iterations = 300;
  std::size_t max_subspace = 0;  // 0 = automatic
};

namespace detail {

/// a+_cre a_ann |origin> = phase |target>, cre != ann.
struct StringTransition {
  std::uint32_t target;
  std::uint16_t cre, ann;
  int phase;
};

struct StringTables {
  std::vector<std::vector<StringTransition>> singles;  // per origin string
  std::vector<std::vector<std::size_t>> occ;           // occupied orbitals

  static StringTables build(const std::vector<OrbString>& strings, std::size_t m) {
    StringTables t;
    const std::size_t n = strings.size();
    t.singles.resize(n);
    t.occ.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const OrbString s = strings[i];
      t.occ[i] = occupied_list(s);
      for (std::size_t q : t.occ[i]) {
        for (std::size_t p = 0; p < m; ++p) {
          if (s & (OrbString{1} << p)) continue;
          OrbString tmp = s;
          int phase = 1;
          annihilate(tmp, q, phase);
          create(tmp, p, phase);
          t.singles[i].push_back({static_cast<std::uint32_t>(
                                      DeterminantSpace::string_index(strings, tmp)),
                                  static_cast<std::uint16_t>(p),
                                  static_cast<std::uint16_t>(q), phase});
        }
      }
    }
    return t;
  }
};

}  // namespace detail

/// Matrix-free application of the Hamiltonian in a determinant space,
/// with the string excitation tables precomputed once per (h, space).
class CiOperator {
 public:
  CiOperator(const MolecularHamiltonian& h, const DeterminantSpace& space)
      : h_(h), space_(space) {
    const std::size_t m = h.n_orbitals;
    if (space.n_orbitals != m)
      throw DimensionError("determinant space does not match Hamiltonian");
    alpha_ = detail::StringTables::build(space.alpha_strings, m);
    beta_ = detail::StringTables::build(space.beta_strings, m);

    // W[s](p,q) = sum_{r occupied in s} (pq|rr), one row per (p,q) pair
    auto build_w = [&](const detail::StringTables& t, std::size_t n_str) {
      Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m * m, n_str);
      for (std::size_t i = 0; i < n_str; ++i)
        for (std::size_t r : t.occ[i])
          for (std::size_t p = 0; p < m; ++p)
            for (std::size_t q = 0; q < m; ++q)
              w(p * m + q, i) += h_.two_body(p, q, r, r);
      return w;
    };
    w_beta_ = build_w(beta_, space.beta_strings.size());
    w_alpha_ = build_w(alpha_, space.alpha_strings.size());

    build_diagonal();
  }

  const Eigen::MatrixXd& diagonal() const { return diag_; }
  const DeterminantSpace& space() const { return space_; }

  /// sigma = H c, both shaped (n alpha strings, n beta strings).
  Eigen::MatrixXd apply(const Eigen::MatrixXd& c) const {
    const std::size_t m = h_.n_orbitals;
    const std::size_t na = space_.alpha_strings.size();
    const std::size_t nb = space_.beta_strings.size();
    Eigen::MatrixXd sigma = diag_.cwiseProduct(c);

    // same-spin singles
    for (std::size_t ia = 0; ia < na; ++ia)
      for (const auto& t : alpha_.singles[ia]) {
        const double base = single_base(alpha_, ia, t);
        sigma.row(t.target).noalias() +=
            t.phase *
            (base * c.row(ia) +
             c.row(ia).cwiseProduct(w_beta_.row(t.cre * m + t.ann)));
      }
    for (std::size_t ib = 0; ib < nb; ++ib)
      for (const auto& t : beta_.singles[ib]) {
        const double base = single_base(beta_, ib, t);
        sigma.col(t.target).noalias() +=
            t.phase *
            (base * c.col(ib) +
             c.col(ib).cwiseProduct(w_alpha_.row(t.cre * m + t.ann).transpose()));
      }

    // same-spin doubles
    for_each_same_spin_double(alpha_, space_.alpha_strings, [&](std::size_t ia,
                                                                std::size_t ja,
                                                                double elem) {
      sigma.row(ja).noalias() += elem * c.row(ia);
    });
    for_each_same_spin_double(beta_, space_.beta_strings, [&](std::size_t ib,
                                                              std::size_t jb,
                                                              double elem) {
      sigma.col(jb).noalias() += elem * c.col(ib);
    });

    // opposite-spin doubles: alpha single x beta single
    for (std::size_t ia = 0; ia < na; ++ia)
      for (const auto& ta : alpha_.singles[ia])
        for (std::size_t ib = 0; ib < nb; ++ib)
          for (const auto& tb : beta_.singles[ib]) {
            const double g = h_.two_body(ta.cre, ta.ann, tb.cre, tb.ann);
            sigma(ta.target, tb.target) += ta.phase * tb.phase * g * c(ia, ib);
          }
    return sigma;
  }

  /// Dense matrix build through the same matrix elements (small spaces).
  Eigen::MatrixXd dense() const {
    const std::size_t na = space_.alpha_strings.size();
    const std::size_t nb = space_.beta_strings.size();
    const std::size_t n = na * nb;
    Eigen::MatrixXd hmat(n, n);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(na, nb);
    for (std::size_t col = 0; col < n; ++col) {
      c(col / nb, col % nb) = 1.0;
      const Eigen::MatrixXd s = apply(c);
      c(col / nb, col % nb) = 0.0;
      for (std::size_t row = 0; row < n; ++row) hmat(row, col) = s(row / nb, row % nb);
    }
    return hmat;
  }

 private:
  double single_base(const detail::StringTables& t, std::size_t origin,
                     const detail::StringTransition& tr) const {
    double v = h_.one_body(tr.cre, tr.ann);
    for (std::size_t r : t.occ[origin]) {
      if (r == tr.ann) continue;
      v += h_.two_body(tr.cre, tr.ann, r, r) - h_.two_body(tr.cre, r, r, tr.ann);
    }
    return v;
  }

  template <class Fn>
  void for_each_same_spin_double(const detail::StringTables& t,
                                 const std::vector<OrbString>& strings,
                                 Fn&& emit) const {
    const std::size_t m = h_.n_orbitals;
    for (std::size_t i = 0; i < strings.size(); ++i) {
      const OrbString s = strings[i];
      const auto& occ = t.occ[i];
      for (std::size_t iq = 0; iq < occ.size(); ++iq)
        for (std::size_t is = iq + 1; is < occ.size(); ++is) {
          const std::size_t q = occ[iq], qs = occ[is];
          for (std::size_t p = 0; p < m; ++p) {
            if (s & (OrbString{1} << p)) continue;
            for (std::size_t r = p + 1; r < m; ++r) {
              if (s & (OrbString{1} << r)) continue;
              OrbString tmp = s;
              int phase = 1;
              // a+_p a+_r a_qs a_q acting right-to-left
              detail::annihilate(tmp, q, phase);
              detail::annihilate(tmp, qs, phase);
              detail::create(tmp, r, phase);
              detail::create(tmp, p, phase);
              const std::size_t j = DeterminantSpace::string_index(strings, tmp);
              const double elem =
                  phase * (h_.two_body(p, q, r, qs) - h_.two_body(p, qs, r, q));
              emit(i, j, elem);
            }
          }
        }
    }
  }

  void build_diagonal() {
    const std::size_t na = space_.alpha_strings.size();
    const std::size_t nb = space_.beta_strings.size();
    const std::size_t m = h_.n_orbitals;
    Eigen::VectorXd ea = Eigen::VectorXd::Zero(na), eb = Eigen::VectorXd::Zero(nb);
    auto same_spin_energy = [&](const std::vector<std::size_t>& occ) {
      double e = 0.0;
      for (std::size_t x = 0; x < occ.size(); ++x) {
        e += h_.one_body(occ[x], occ[x]);
        for (std::size_t y = x + 1; y < occ.size(); ++y)
          e += h_.two_body(occ[x], occ[x], occ[y], occ[y]) -
               h_.two_body(occ[x], occ[y], occ[y], occ[x]);
      }
      return e;
    };
    for (std::size_t ia = 0; ia < na; ++ia) ea(ia) = same_spin_energy(alpha_.occ[ia]);
    for (std::size_t ib = 0; ib < nb; ++ib) eb(ib) = same_spin_energy(beta_.occ[ib]);

    diag_.resize(na, nb);
    for (std::size_t ia = 0; ia < na; ++ia)
      for (std::size_t ib = 0; ib < nb; ++ib) {
        double cross = 0.0;
        for (std::size_t i : alpha_.occ[ia]) cross += w_beta_(i * m + i, ib);
        diag_(ia, ib) = h_.core_energy + ea(ia) + eb(ib) + cross;
      }
  }

  MolecularHamiltonian h_;  // held by value so temporaries cannot dangle
  DeterminantSpace space_;
  detail::StringTables alpha_, beta_;
  Eigen::MatrixXd w_alpha_, w_beta_;  // (p*m+q, string) -> sum_r occ (pq|rr)
  Eigen::MatrixXd diag_;
};

struct FciResult {
  std::vector<double> energies;
  std::vector<CiVector> states;
};

namespace detail {

inline Eigen::VectorXd flatten(const Eigen::MatrixXd& c) {
  return Eigen::Map<const Eigen::VectorXd>(c.data(), c.size());
}

inline Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, std::size_t rows,
                                 std::size_t cols) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

/// Block Davidson for the lowest eigenpairs of a symmetric operator.
template <class Apply>
void davidson(Apply&& apply_op, const Eigen::VectorXd& diag, std::size_t n_roots,
              const SolverOptions& opt, std::vector<double>& eigenvalues,
              std::vector<Eigen::VectorXd>& eigenvectors) {
  const std::size_t n = static_cast<std::size_t>(diag.size());
  const std::size_t max_sub =
      opt.max_subspace ? opt.max_subspace
                       : std::min<std::size_t>(n, std::max<std::size_t>(24, 6 * n_roots));
  std::mt19937 rng(12345);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // seed with unit vectors on the lowest diagonal entries
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::partial_sort(order.begin(),
                    order.begin() + std::min<std::size_t>(n, n_roots + 2), order.end(),
                    [&](std::size_t a, std::size_t b) { return diag(a) < diag(b); });

  std::vector<Eigen::VectorXd> basis, sigma;
  auto add_vector = [&](Eigen::VectorXd v) -> bool {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= b.dot(v) * b;
    const double nv = v.norm();
    if (nv < 1e-8) return false;
    v /= nv;
    basis.push_back(v);
    sigma.push_back(apply_op(v));
    return true;
  };
  for (std::size_t k = 0; k < std::min<std::size_t>(n, n_roots + 2); ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(order[k]) = 1.0;
    add_vector(std::move(v));
  }

  double best_residual = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < opt.max_iterations; ++iter) {
    const std::size_t dim = basis.size();
    Eigen::MatrixXd s(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j <= i; ++j) s(i, j) = s(j, i) = basis[i].dot(sigma[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);

    std::vector<Eigen::VectorXd> ritz(n_roots), ritz_sigma(n_roots);
    eigenvalues.assign(n_roots, 0.0);
    double worst = 0.0;
    std::vector<Eigen::VectorXd> residuals(n_roots);
    for (std::size_t k = 0; k < n_roots; ++k) {
      eigenvalues[k] = es.eigenvalues()(k);
      ritz[k] = Eigen::VectorXd::Zero(n);
      ritz_sigma[k] = Eigen::VectorXd::Zero(n);
      for (std::size_t i = 0; i < dim; ++i) {
        ritz[k] += es.eigenvectors()(i, k) * basis[i];
        ritz_sigma[k] += es.eigenvectors()(i, k) * sigma[i];
      }
      residuals[k] = ritz_sigma[k] - eigenvalues[k] * ritz[k];
      worst = std::max(worst, residuals[k].norm());
    }
    best_residual = std::min(best_residual, worst);
    if (worst <= opt.residual_tol || dim >= n) {
      if (worst > opt.residual_tol && dim >= n && worst > 1e-6)
        throw ConvergenceError("Davidson stalled with full subspace", worst);
      eigenvectors = std::move(ritz);
      return;
    }

    if (dim + n_roots > max_sub) {
      // restart from the current Ritz vectors
      auto old_ritz = ritz;
      basis.clear();
      sigma.clear();
      for (auto& v : old_ritz) add_vector(std::move(v));
    }

    bool grew = false;
    for (std::size_t k = 0; k < n_roots; ++k) {
      if (residuals[k].norm() <= opt.residual_tol) continue;
      Eigen::VectorXd t(n);
      for (std::size_t i = 0; i < n; ++i) {
        double denom = eigenvalues[k] - diag(i);
        if (std::abs(denom) < 1e-6) denom = (denom < 0 ? -1e-6 : 1e-6);
        t(i) = residuals[k](i) / denom;
      }
      grew |= add_vector(std::move(t));
    }
    if (!grew) {
      Eigen::VectorXd t(n);
      for (std::size_t i = 0; i < n; ++i) t(i) = gauss(rng);
      if (!add_vector(std::move(t)))
        throw ConvergenceError("Davidson could not expand the subspace", best_residual);
    }
  }
  throw ConvergenceError("Davidson did not converge", best_residual);
}

}  // namespace detail

/// Lowest n_roots eigenpairs of the Hamiltonian in the given determinant
/// space (Davidson; dense diagonalization for very small spaces).
inline FciResult solve_fci(const MolecularHamiltonian& h, const DeterminantSpace& space,
                           std::size_t n_roots = 1, const SolverOptions& opt = {}) {
  const std::size_t n = space.size();
  if (n == 0) throw DomainError("empty determinant space");
  if (n > opt.max_determinants)
    throw CapacityError("determinant space exceeds the configured cap");
  if (n_roots > n) throw DomainError("more roots requested than determinants");

  CiOperator op(h, space);
  const std::size_t na = space.alpha_strings.size();
  const std::size_t nb = space.beta_strings.size();

  FciResult result;
  if (n <= std::max<std::size_t>(16, 3 * n_roots)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.dense());
    for (std::size_t k = 0; k < n_roots; ++k) {
      result.energies.push_back(es.eigenvalues()(k));
      CiVector v(space);
      v.coefficients = detail::unflatten(es.eigenvectors().col(k), na, nb);
      v.normalize();
      result.states.push_back(std::move(v));
    }
    return result;
  }

  const Eigen::VectorXd diag = detail::flatten(op.diagonal());
  std::vector<double> evals;
  std::vector<Eigen::VectorXd> evecs;
  detail::davidson(
      [&](const Eigen::VectorXd& x) {
        return detail::flatten(op.apply(detail::unflatten(x, na, nb)));
      },
      diag, n_roots, opt, evals, evecs);

  for (std::size_t k = 0; k < n_roots; ++k) {
    result.energies.push_back(evals[k]);
    CiVector v(space);
    v.coefficients = detail::unflatten(evecs[k], na, nb);
    v.normalize();
    result.states.push_back(std::move(v));
  }
  return result;
}

struct CasciResult {
  double energy = 0.0;
  CiVector state;                  // in the window-local orbital indexing
  ActiveWindow window;             // placement within the full orbital range
  MolecularHamiltonian active_h;   // effective Hamiltonian on the window
};

/// CASCI with the active window placed around the Fermi level of the
/// occupation-ordered orbital list: the (N - ne)/2 most occupied orbitals
/// are frozen doubly occupied, the next no orbitals form the CAS.
inline CasciResult solve_casci(const MolecularHamiltonian& h, std::size_t cas_ne,
                               std::size_t cas_no, const SolverOptions& opt = {}) {
  const std::size_t m = h.n_orbitals;
  if (cas_ne > h.n_electrons) throw DomainError("CAS electrons exceed total electrons");
  if ((h.n_electrons - cas_ne) % 2 != 0)
    throw DomainError("non-CAS electrons must fill closed shells");
  const std::size_t nf = (h.n_electrons - cas_ne) / 2;
  if (nf + cas_no > m) throw DomainError("CAS window exceeds orbital range");
  if (static_cast<std::size_t>(std::abs(h.ms2)) > cas_ne)
    throw DomainError("spin projection cannot be carried by the CAS electrons");

  MolecularHamiltonian active(cas_no == 0 ? 1 : cas_no, cas_ne, h.ms2);
  // fold the frozen core into the scalar and one-body parts
  double ecore = h.core_energy;
  for (std::size_t i = 0; i < nf; ++i) {
    ecore += 2.0 * h.one_body(i, i);
    for (std::size_t j = 0; j < nf; ++j)
      ecore += 2.0 * h.two_body(i, i, j, j) - h.two_body(i, j, j, i);
  }
  if (cas_no == 0) {
    CasciResult r;
    r.energy = ecore;
    r.window = {nf, nf};
    DeterminantSpace sp = DeterminantSpace::full(1, 0, 0);
    sp.active_window = ActiveWindow{nf, nf};
    r.state = CiVector(sp);
    r.state.coefficients(0, 0) = 1.0;
    active.core_energy = ecore;
    r.active_h = std::move(active);
    return r;
  }

  active.core_energy = ecore;
  for (std::size_t p = 0; p < cas_no; ++p)
    for (std::size_t q = 0; q < cas_no; ++q) {
      double f = h.one_body(nf + p, nf + q);
      for (std::size_t i = 0; i < nf; ++i)
        f += 2.0 * h.two_body(nf + p, nf + q, i, i) -
             h.two_body(nf + p, i, i, nf + q);
      active.one_body(p, q) = f;
    }
  for (std::size_t p = 0; p < cas_no; ++p)
    for (std::size_t q = 0; q < cas_no; ++q)
      for (std::size_t r = 0; r < cas_no; ++r)
        for (std::size_t s = 0; s < cas_no; ++s)
          active.two_body(p, q, r, s) = h.two_body(nf + p, nf + q, nf + r, nf + s);

  DeterminantSpace sp = DeterminantSpace::full(cas_no, active.n_alpha(), active.n_beta());
  sp.active_window = ActiveWindow{nf, nf + cas_no};
  auto fci = solve_fci(active, sp, 1, opt);

  CasciResult r;
  r.energy = fci.energies[0];
  r.state = std::move(fci.states[0]);
  r.window = {nf, nf + cas_no};
  r.active_h = std::move(active);
  return r;
}

inline CasciResult solve_casci(const MolecularHamiltonian& h, const OrbitalBasis& basis,
                               std::size_t cas_ne, std::size_t cas_no,
                               const SolverOptions& opt = {}) {
  return solve_casci(transform_integrals(h, basis), cas_ne, cas_no, opt);
}

}  // namespace qio
