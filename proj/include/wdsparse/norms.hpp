#pragma once

#include <optional>
#include <string>

#include "wdsparse/cone_norm.hpp"
#include "wdsparse/core.hpp"

namespace wdsparse {

enum class NormFamily { L1, Group, TrivialG, Cone };

/**
 * A penalty norm Omega on R^p.
 *
 *   L1        ||beta||_1
 *   Group     sum_t sqrt(|G_t|) ||beta_{G_t}||_2 over a partition {G_t}
 *   TrivialG  sqrt(|G|) ||beta_G||_2 + ||beta_{G^c}||_1
 *   Cone      Omega(beta; A), see cone_norm.hpp
 *
 * L1 and the dimension-free cones act on vectors of any length.
 */
class NormSpec {
 public:
  static NormSpec l1();
  static NormSpec group(Groups partition);
  /// The universe of `g` fixes p.
  static NormSpec trivial_g(IndexSet g);
  static NormSpec cone(ConeSpec cone);

  NormFamily family() const noexcept { return family_; }
  const Groups& groups() const noexcept { return groups_; }
  const IndexSet& trivial_set() const noexcept { return trivial_; }
  const ConeSpec& cone_spec() const noexcept { return cone_; }

  std::optional<Eigen::Index> dimension() const;
  void check_dimension(Eigen::Index p) const;
  std::string describe() const;

 private:
  NormFamily family_ = NormFamily::L1;
  Groups groups_;
  IndexSet trivial_;
  ConeSpec cone_;
};

double norm_eval(const NormSpec& spec, const Vector& beta);
double dual_norm_eval(const NormSpec& spec, const Vector& w);

/// gamma with Omega(gamma) <= 1 and w^T gamma = Omega_*(w); zero when w = 0.
Vector dual_maximizer(const NormSpec& spec, const Vector& w);

/// argmin_z 1/2 ||z - v||_2^2 + t Omega(z), t > 0.
Vector prox(const NormSpec& spec, const Vector& v, double t);

/// Omega^{S^c} as a norm on the compressed coordinates S^c (length p - |S|).
struct ResidualNorm {
  IndexSet complement;
  NormSpec norm;

  /// Omega^{S^c}(beta_{S^c}) for a full-length beta.
  double eval(const Vector& beta) const;
  /// Omega^{S^c}_*(w_{S^c}) for a full-length w.
  double dual(const Vector& w) const;
};

AllowedCheck is_allowed_set(const NormSpec& spec, const IndexSet& set);

/// Throws NotAllowedError (with a counterexample when one is known) unless
/// `set` is allowed.
ResidualNorm residual_norm(const NormSpec& spec, const IndexSet& set);

/// Omega(beta) - Omega(beta_S) - Omega^{S^c}(beta_{S^c}).
double weak_decomposability_slack(const NormSpec& spec, const IndexSet& set, const Vector& beta);

/// Smallest allowed set containing `set` (ties broken lexicographically).
IndexSet smallest_allowed_superset(const NormSpec& spec, const IndexSet& set);

}  // namespace wdsparse
