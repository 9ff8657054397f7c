#pragma once

#include <cstdint>

#include "wdsparse/core.hpp"
#include "wdsparse/norms.hpp"

namespace wdsparse {

struct EigenvalueOptions {
  /// Largest |S| for which the sign cells of the S-sphere are enumerated.
  int orthant_cap = 12;
  /// Random restarts of the local descent that seeds the upper bound.
  int restarts = 64;
  std::uint64_t seed = 20160901;
  /// Cells examined by branch and bound before giving up on certification.
  int node_budget = 20000;
  /// Certified when upper - lower <= gap_tolerance.
  double gap_tolerance = 1e-9;
};

/**
 * delta = min ||X theta||_n over theta with Omega(theta_S) = 1 and
 * Omega^{S^c}(theta_{S^c}) <= L. The witness is such a theta with
 * ||X theta||_n = upper_bound. Values below 1e-10 are reported as 0.
 */
struct EigenvalueResult {
  double value = 0.0;
  Vector witness;
  bool certified = false;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  long nodes = 0;
};

/// Threshold below which an eigenvalue is reported as exactly zero.
inline constexpr double kZeroEigenvalue = 1e-10;

EigenvalueResult l1_eigenvalue(const DesignMatrix& x, const IndexSet& set, double big_l,
                               const EigenvalueOptions& options = {});

/// phi^2 = |S| delta^2.
double compatibility(const DesignMatrix& x, const IndexSet& set, double big_l,
                     const EigenvalueOptions& options = {});

/// 1 / delta^2, or +infinity when delta is reported as zero.
double effective_sparsity(double delta);
double effective_sparsity(const DesignMatrix& x, const IndexSet& set, double big_l,
                          const NormSpec& omega, const EigenvalueOptions& options = {});

/// Omega-eigenvalue with the maximal residual norm Omega^{S^c}. Throws
/// NotAllowedError when S is not allowed.
EigenvalueResult omega_eigenvalue(const DesignMatrix& x, const IndexSet& set, double big_l,
                                  const NormSpec& omega, const EigenvalueOptions& options = {});

/// Same with an explicit residual norm on the compressed coordinates S^c.
EigenvalueResult omega_eigenvalue(const DesignMatrix& x, const IndexSet& set, double big_l,
                                  const NormSpec& omega, const ResidualNorm& residual,
                                  const EigenvalueOptions& options = {});

/// Eigenvalue of Omega_S(beta) = sqrt(|S|) ||beta_S||_2 + ||beta_{S^c}||_1.
EigenvalueResult adaptive_restricted_eigenvalue(const DesignMatrix& x, const IndexSet& set,
                                                double big_l,
                                                const EigenvalueOptions& options = {});

/// R^2(gamma) = min over ||b||_2^2 = 1/|S| of ||X_S b - X_{S^c} gamma||_n^2
/// (gamma compressed on S^c). Returns the value and writes the minimizer.
double restricted_sphere_residual(const DesignMatrix& x, const IndexSet& set,
                                  const Vector& gamma, Vector* minimizer = nullptr);

/// Minimum of the objective over `samples` random feasible points (p <= 4);
/// always an upper bound on the eigenvalue.
double brute_force_eigenvalue(const DesignMatrix& x, const IndexSet& set, double big_l,
                              const NormSpec& omega, long long samples, std::uint64_t seed = 7);

}  // namespace wdsparse
