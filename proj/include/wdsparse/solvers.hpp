#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "wdsparse/core.hpp"
#include "wdsparse/norms.hpp"

namespace wdsparse {

struct SolveOptions {
  int max_iterations = 100000;
  /// Converged iff the KKT residual is at most this.
  double tolerance = 1e-8;
  std::optional<Vector> warm_start;
};

/// Result of argmin ||Y - X beta||_n^2 + 2 lambda pen(beta).
struct FitResult {
  Vector beta;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// A convex penalty with its dual norm and proximal map.
class Penalty {
 public:
  virtual ~Penalty() = default;
  virtual double value(const Vector& beta) const = 0;
  virtual double dual(const Vector& w) const = 0;
  /// argmin_z 1/2 ||z - v||^2 + t pen(z).
  virtual Vector prox(const Vector& v, double t) const = 0;
};

class NormPenalty final : public Penalty {
 public:
  explicit NormPenalty(NormSpec spec) : spec_(std::move(spec)) {}
  double value(const Vector& beta) const override { return norm_eval(spec_, beta); }
  double dual(const Vector& w) const override { return dual_norm_eval(spec_, w); }
  Vector prox(const Vector& v, double t) const override { return wdsparse::prox(spec_, v, t); }

 private:
  NormSpec spec_;
};

/// sum_t w_t ||beta_{G_t}||_2 over a partition.
class WeightedGroupPenalty final : public Penalty {
 public:
  WeightedGroupPenalty(Groups partition, std::vector<double> weights);
  static WeightedGroupPenalty unit(Groups partition);

  double value(const Vector& beta) const override;
  double dual(const Vector& w) const override;
  Vector prox(const Vector& v, double t) const override;

 private:
  Groups groups_;
  std::vector<double> weights_;
};

FitResult solve_penalized_ls(const DesignMatrix& x, const Vector& y, double lambda,
                             const Penalty& penalty, const SolveOptions& options = {});
FitResult solve_penalized_ls(const DesignMatrix& x, const Vector& y, double lambda,
                             const NormSpec& spec, const SolveOptions& options = {});

/// (pen_*(g) - lambda)_+ (1 + pen(beta)) + |lambda pen(beta) - g^T beta| with
/// g = X^T (Y - X beta) / n. Zero exactly at the optimum.
double kkt_residual(const DesignMatrix& x, const Vector& y, double lambda, const Penalty& penalty,
                    const Vector& beta);

/// max over probes b of (Y - X beta_hat)^T X (b - beta_hat) / n
///                       + lambda Omega(beta_hat) - lambda Omega(b).
double variational_inequality_check(const DesignMatrix& x, const Vector& y, double lambda,
                                    const NormSpec& spec, const Vector& beta_hat,
                                    const std::vector<Vector>& probes);

/// 0, beta_hat +- coordinate steps, and random points around beta_hat.
std::vector<Vector> default_probes(const Vector& beta_hat, int count, std::uint64_t seed);

/// Subsets G_t of {0..p-1} with union everything; overlaps allowed.
struct OverlapGroups {
  OverlapGroups(Groups groups, Eigen::Index p);
  Groups groups;
  Eigen::Index p = 0;
  /// N_j: the number of groups containing j.
  std::vector<int> replication() const;
  Eigen::Index augmented_dimension() const;
};

struct OverlapFit {
  /// beta = sum of the parts; objective uses sum_t w_t ||b_t||_2.
  FitResult fit;
  /// Each part b_t as a length-p vector, zero off G_t.
  std::vector<Vector> parts;
};

/// Group lasso with overlaps through the column-replicated design. Unit
/// weights unless `weighted`, then sqrt(|G_t|).
OverlapFit solve_overlap(const DesignMatrix& x, const Vector& y, double lambda,
                         const OverlapGroups& groups, const SolveOptions& options = {},
                         bool weighted = false);

/// min { sum_t ||b_t||_2 : supp(b_t) in G_t, sum_t b_t = beta }.
double omega_overlap_eval(const Vector& beta, const OverlapGroups& groups,
                          std::vector<Vector>* parts = nullptr);

}  // namespace wdsparse
