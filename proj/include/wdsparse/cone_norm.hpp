#pragma once

#include <optional>
#include <string>

#include "wdsparse/core.hpp"

namespace wdsparse {

enum class ConeKind { FullOrthant, Monotone, GroupConstant, PolyhedralRays };

/**
 * A convex cone A in [0, inf)^p defining the structured sparsity norm
 *
 *     Omega(beta; A) = min_{a in A} 1/2 sum_j (beta_j^2 / a_j + a_j),  0/0 = 0.
 *
 * FullOrthant and Monotone are dimension-free (they adapt to the length of
 * the vector they act on). GroupConstant carries a partition and
 * PolyhedralRays a p x K matrix of nonnegative generating rays, one per
 * column; both fix the dimension.
 */
class ConeSpec {
 public:
  static ConeSpec full_orthant();
  /// {a_1 >= a_2 >= ... >= a_p >= 0}.
  static ConeSpec monotone();
  /// Vectors constant within each group of a partition (0-based indices).
  static ConeSpec group_constant(Groups partition);
  /// The conic hull of the columns of `rays`.
  static ConeSpec polyhedral_rays(Matrix rays);

  ConeKind kind() const noexcept { return kind_; }
  const Groups& groups() const noexcept { return groups_; }
  const Matrix& rays() const noexcept { return rays_; }
  std::optional<Eigen::Index> dimension() const;

  /// Throws DimensionError when the cone has a fixed dimension different from p.
  void check_dimension(Eigen::Index p) const;

  /// Columns are the extreme points of A(1) = {a in A : ||a||_1 = 1} (for
  /// rays: the normalized generators, which contain all extreme points).
  Matrix section_generators(Eigen::Index p) const;
  /// Number of extreme points of A(1): p for FullOrthant and Monotone, the
  /// group count for GroupConstant, the ray count for PolyhedralRays.
  Eigen::Index extreme_point_count(Eigen::Index p) const;

  /// Whether x (length p) lies in the cone, to tolerance `tol` relative to ||x||.
  bool contains(const Vector& x, double tol = 1e-10) const;

  std::string describe() const;

 private:
  ConeKind kind_ = ConeKind::FullOrthant;
  Groups groups_;
  Matrix rays_;
};

struct ConeNormResult {
  double value = 0.0;
  /// The minimizing cone element a(beta).
  Vector minimizer;
  /// Monotone cone only: the contiguous blocks, 0-based.
  Groups partition;
  /// False only when the iterative polyhedral solve stopped at its cap.
  bool certified = true;
  /// Valid lower bound on the value (equals value for the closed forms).
  double lower_bound = 0.0;
  int iterations = 0;
};

struct MonotonePartition {
  Groups blocks;
  /// Block values r_t = ||beta_{G_t}||_2 / sqrt(|G_t|).
  std::vector<double> block_values;
  double value = 0.0;
};

/// Pool-adjacent-violators on root-mean-square block values; blocks with
/// equal pooled values are merged.
MonotonePartition monotone_contiguous_partition(const Vector& beta);

ConeNormResult cone_norm_eval(const ConeSpec& cone, const Vector& beta);

/// Dual norm: max over a in A(1) of sqrt(sum_j a_j w_j^2).
double cone_dual_eval(const ConeSpec& cone, const Vector& w);

/// A vector gamma with Omega(gamma; A) <= 1 and w^T gamma = Omega_*(w; A).
Vector cone_dual_maximizer(const ConeSpec& cone, const Vector& w);

/// argmin_z 1/2 ||z - v||^2 + t Omega(z; A).
Vector cone_prox(const ConeSpec& cone, const Vector& v, double t);

struct AllowedCheck {
  bool allowed = false;
  std::string reason;
  /// Some a in A whose restriction a_S is not in A, when one is known.
  Vector witness;
};

/// Structural test of A_S subset of A.
AllowedCheck cone_allowed(const ConeSpec& cone, const IndexSet& set);

/// The projected cone {a_{S^c} : a in A} on dimension p - |S|. Throws
/// NotAllowedError when A_S is not a subset of A.
ConeSpec residual_cone(const ConeSpec& cone, const IndexSet& set);

/**
 * Expectation bound for the dual norm of the gradient noise under
 * standard Gaussian errors:
 *
 *     lambda_eps = sqrt(8/n) (2 + sqrt(log E)) sqrt(sum_i Omega_*^2(x_i; A) / n)
 *
 * with E the number of extreme points of A(1) and x_i the rows of X.
 */
double pontil_maurer_bound(const DesignMatrix& x, const ConeSpec& cone);

}  // namespace wdsparse
