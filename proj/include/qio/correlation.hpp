#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "qio/errors.hpp"
#include "qio/rdm.hpp"

namespace qio {

/// -sum_k p_k log p_k over a 4-entry occupation spectrum (natural log,
/// 0 log 0 = 0).  The row must be a probability vector.
inline double orbital_entropy(const Eigen::Vector4d& lambda_row) {
  double sum = 0.0, s = 0.0;
  for (int k = 0; k < 4; ++k) {
    double lam = lambda_row(k);
    if (lam < -1e-8) throw PositivityError("negative entry in orbital spectrum");
    if (lam < 0.0) lam = 0.0;
    sum += lam;
    if (lam > 0.0) s -= lam * std::log(lam);
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw NormalizationError("orbital spectrum does not sum to one");
  return s;
}

/// Total orbital correlation of a pure state: sum of single-orbital
/// entropies computed from the RDM-derived spectra.
inline double total_orbital_correlation(const SpinRdms& r) {
  const OrbitalSpectrum sp = orbital_spectrum(r);
  double total = 0.0;
  for (std::size_t i = 0; i < sp.dim(); ++i)
    total += orbital_entropy(sp.lambdas.row(i).transpose());
  return total;
}

/// Correlation of a pure state with respect to an orbital partition:
/// sum of block entropies.  Blocks must cover all orbitals disjointly.
inline double partition_correlation(const CiVector& v,
                                    const std::vector<std::vector<std::size_t>>& blocks) {
  const std::size_t m = v.space.n_orbitals;
  std::vector<int> seen(m, 0);
  for (const auto& block : blocks)
    for (std::size_t i : block) {
      if (i >= m) throw PartitionError("partition index out of range");
      if (seen[i]++) throw PartitionError("partition blocks overlap");
    }
  for (std::size_t i = 0; i < m; ++i)
    if (!seen[i]) throw PartitionError("partition does not cover all orbitals");

  double total = 0.0;
  for (const auto& block : blocks)
    total += von_neumann_entropy(subsystem_density(v, block).density);
  return total;
}

struct SumRule {
  double betweenniej = 0.0;  // placeholder; see named fields below
};

/// Active/non-active decomposition of the total orbital correlation:
///   I_between = S(rho_A) + S(rho_N)
///   I_active  = sum_{i in A} S(rho_i) - S(rho_A)
///   I_rest    = sum_{i not in A} S(rho_i) - S(rho_N)
/// and total = I_between + I_active + I_rest = sum_i S(rho_i).
struct SumRuleDecomposition {
  double i_between = 0.0;
  double i_active = 0.0;
  double i_rest = 0.0;
  double total = 0.0;
};

inline SumRuleDecomposition sum_rule_decomposition(const CiVector& v,
                                                   const std::vector<std::size_t>& active) {
  const std::size_t m = v.space.n_orbitals;
  std::vector<int> in_active(m, 0);
  for (std::size_t i : active) {
    if (i >= m) throw PartitionError("active orbital out of range");
    in_active[i] = 1;
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < m; ++i)
    if (!in_active[i]) rest.push_back(i);

  const double s_a = active.empty() ? 0.0
                                    : von_neumann_entropy(subsystem_density(v, active).density);
  const double s_n = rest.empty() ? 0.0
                                  : von_neumann_entropy(subsystem_density(v, rest).density);

  double sum_active = 0.0, sum_rest = 0.0;
  for (std::size_t i : active)
    sum_active += von_neumann_entropy(subsystem_density(v, {i}).density);
  for (std::size_t i : rest)
    sum_rest += von_neumann_entropy(subsystem_density(v, {i}).density);

  SumRuleDecomposition d;
  d.i_between = s_a + s_n;
  d.i_active = sum_active - s_a;
  d.i_rest = sum_rest - s_n;
  d.total = d.i_between + d.i_active + d.i_rest;
  return d;
}

/// Shannon entropy of the determinant weights |c_d|^2 (natural log).
inline double ci_shannon_entropy(const CiVector& v) {
  double s = 0.0;
  const auto& c = v.coefficients;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double w = c.data()[i] * c.data()[i];
    if (w > 0.0) s -= w * std::log(w);
  }
  return s;
}

/// Per-orbital entropies and summary quantities of one state.
struct CorrelationReport {
  Eigen::VectorXd per_orbital_entropy;  // nats
  double total_cost = 0.0;              // sum of per-orbital entropies
  std::optional<SumRuleDecomposition> partition_terms;
  std::optional<double> ci_entropy;
};

inline CorrelationReport make_correlation_report(const SpinRdms& r) {
  const OrbitalSpectrum sp = orbital_spectrum(r);
  CorrelationReport rep;
  rep.per_orbital_entropy.resize(sp.dim());
  for (std::size_t i = 0; i < sp.dim(); ++i)
    rep.per_orbital_entropy(i) = orbital_entropy(sp.lambdas.row(i).transpose());
  rep.total_cost = rep.per_orbital_entropy.sum();
  return rep;
}

}  // namespace qio
