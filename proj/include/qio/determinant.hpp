#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstddef>
#include <optional>
#include <vector>

#include "qio/errors.hpp"

namespace qio {

using OrbString = std::uint64_t;  // bit i set = spatial orbital i occupied

namespace detail {

inline int popcount(OrbString s) { return std::popcount(s); }

/// +1/-1 parity of the number of set bits strictly below orbital p.
inline int parity_below(OrbString s, std::size_t p) {
  const OrbString mask = (p == 0) ? 0 : ((OrbString{1} << p) - 1);
  return (std::popcount(s & mask) & 1) ? -1 : 1;
}

/// Applies a_p; returns false if orbital p is empty.
inline bool annihilate(OrbString& s, std::size_t p, int& phase) {
  const OrbString bit = OrbString{1} << p;
  if (!(s & bit)) return false;
  phase *= parity_below(s, p);
  s ^= bit;
  return true;
}

/// Applies a^dagger_p; returns false if orbital p is occupied.
inline bool create(OrbString& s, std::size_t p, int& phase) {
  const OrbString bit = OrbString{1} << p;
  if (s & bit) return false;
  phase *= parity_below(s, p);
  s |= bit;
  return true;
}

/// All C(m, n) bitstrings with n of the lowest m bits set, ascending.
inline std::vector<OrbString> enumerate_strings(std::size_t m, std::size_t n) {
  std::vector<OrbString> out;
  if (n > m) return out;
  if (n == 0) {
    out.push_back(0);
    return out;
  }
  OrbString s = (OrbString{1} << n) - 1;
  const OrbString limit = OrbString{1} << m;
  while (s < limit) {
    out.push_back(s);
    // Gosper's hack: next bit permutation with the same popcount
    const OrbString c = s & -s;
    const OrbString r = s + c;
    s = (((r ^ s) >> 2) / c) | r;
    if (c == 0) break;
  }
  return out;
}

inline std::vector<std::size_t> occupied_list(OrbString s) {
  std::vector<std::size_t> occ;
  while (s) {
    occ.push_back(static_cast<std::size_t>(std::countr_zero(s)));
    s &= s - 1;
  }
  return occ;
}

}  // namespace detail

/// Contiguous orbital index range [lo, hi) used as the CAS window.
struct ActiveWindow {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t size() const { return hi - lo; }
  bool contains(std::size_t p) const { return p >= lo && p < hi; }
};

/// Full determinant basis for fixed (n_alpha, n_beta) in M spatial
/// orbitals.  A determinant is the ordered operator product
///   a+_{a1,alpha} ... a+_{an,alpha} a+_{b1,beta} ... a+_{bm,beta} |vac>
/// with ascending orbital indices within each spin.
struct DeterminantSpace {
  std::size_t n_orbitals = 0;
  std::size_t n_alpha = 0;
  std::size_t n_beta = 0;
  std::vector<OrbString> alpha_strings;  // ascending, unique
  std::vector<OrbString> beta_strings;
  std::optional<ActiveWindow> active_window;

  static DeterminantSpace full(std::size_t m, std::size_t na, std::size_t nb) {
    if (na > m || nb > m) throw DomainError("electron count exceeds orbital count");
    DeterminantSpace sp;
    sp.n_orbitals = m;
    sp.n_alpha = na;
    sp.n_beta = nb;
    sp.alpha_strings = detail::enumerate_strings(m, na);
    sp.beta_strings = detail::enumerate_strings(m, nb);
    return sp;
  }

  std::size_t size() const { return alpha_strings.size() * beta_strings.size(); }

  static std::size_t string_index(const std::vector<OrbString>& strings, OrbString s) {
    const auto it = std::lower_bound(strings.begin(), strings.end(), s);
    if (it == strings.end() || *it != s)
      throw IndexError("bitstring not in determinant space");
    return static_cast<std::size_t>(it - strings.begin());
  }

  std::size_t alpha_index(OrbString s) const { return string_index(alpha_strings, s); }
  std::size_t beta_index(OrbString s) const { return string_index(beta_strings, s); }

  /// Aufbau-style reference string: the n lowest orbitals occupied.
  static OrbString reference_string(std::size_t n) {
    return n == 0 ? OrbString{0} : ((OrbString{1} << n) - 1);
  }
};

/// Real coefficients of a determinant expansion, stored as an
/// (alpha strings) x (beta strings) matrix.
struct CiVector {
  DeterminantSpace space;
  Eigen::MatrixXd coefficients;           // (ia, ib) -> c
  std::size_t ref_alpha = 0, ref_beta = 0;  // position of |D0>

  CiVector() = default;
  explicit CiVector(DeterminantSpace sp) : space(std::move(sp)) {
    coefficients = Eigen::MatrixXd::Zero(space.alpha_strings.size(),
                                         space.beta_strings.size());
    ref_alpha = space.alpha_index(DeterminantSpace::reference_string(space.n_alpha));
    ref_beta = space.beta_index(DeterminantSpace::reference_string(space.n_beta));
  }

  double norm() const { return coefficients.norm(); }
  double reference_coefficient() const { return coefficients(ref_alpha, ref_beta); }

  /// Scales to unit norm and fixes the global sign so that the reference
  /// coefficient is nonnegative.
  void normalize() {
    const double n = norm();
    if (n <= 0.0) throw NumericalError("cannot normalize a zero CI vector");
    coefficients /= n;
    if (reference_coefficient() < 0.0) coefficients = -coefficients;
  }
};

}  // namespace qio
