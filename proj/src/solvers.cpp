#include "wdsparse/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wdsparse/detail/smooth_min.hpp"

namespace wdsparse {

namespace {

constexpr int kPowerIterations = 20;
// The proximal iteration runs until the KKT residual is this fraction of the
// requested tolerance, so that probe-based checks at the tolerance pass.
constexpr double kInnerTighten = 1e-2;
constexpr int kKktEvery = 5;
constexpr double kAcceptSlack = 1e-13;

void check_inputs(const DesignMatrix& x, const Vector& y, double lambda) {
  if (y.size() != x.n()) {
    throw DimensionError("response has length " + std::to_string(y.size()) + ", expected " +
                         std::to_string(x.n()));
  }
  if (!y.allFinite()) throw InvalidArgument("response entries must be finite");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("lambda must be finite and >= 0");
  }
}

double squared_operator_norm(const Matrix& m) {
  Vector v = Vector::Ones(m.cols()) / std::sqrt(static_cast<double>(m.cols()));
  double estimate = 0.0;
  for (int it = 0; it < kPowerIterations; ++it) {
    const Vector w = m.transpose() * (m * v);
    estimate = w.norm();
    if (estimate == 0.0) break;
    v = w / estimate;
  }
  return estimate;
}

double loss(const DesignMatrix& x, const Vector& y, const Vector& beta) {
  return compensated_sum_squares(y - x.matrix() * beta) / static_cast<double>(x.n());
}

FitResult make_fit(const DesignMatrix& x, const Vector& y, double lambda, const Penalty& penalty,
                   Vector beta, int iterations, double tolerance) {
  FitResult out;
  out.objective = loss(x, y, beta) + 2.0 * lambda * penalty.value(beta);
  out.kkt_residual = kkt_residual(x, y, lambda, penalty, beta);
  out.converged = out.kkt_residual <= tolerance;
  out.iterations = iterations;
  out.beta = std::move(beta);
  return out;
}

}  // namespace

WeightedGroupPenalty::WeightedGroupPenalty(Groups partition, std::vector<double> weights)
    : groups_(std::move(partition)), weights_(std::move(weights)) {
  validate_partition(groups_);
  if (weights_.size() != groups_.size()) throw InvalidArgument("one weight per group required");
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("group weights must be positive");
  }
}

WeightedGroupPenalty WeightedGroupPenalty::unit(Groups partition) {
  std::vector<double> ones(partition.size(), 1.0);
  return WeightedGroupPenalty(std::move(partition), std::move(ones));
}

double WeightedGroupPenalty::value(const Vector& beta) const {
  double total = 0.0;
  for (std::size_t t = 0; t < groups_.size(); ++t) {
    double ss = 0.0;
    for (auto j : groups_[t]) ss += beta[j] * beta[j];
    total += weights_[t] * std::sqrt(ss);
  }
  return total;
}

double WeightedGroupPenalty::dual(const Vector& w) const {
  double best = 0.0;
  for (std::size_t t = 0; t < groups_.size(); ++t) {
    double ss = 0.0;
    for (auto j : groups_[t]) ss += w[j] * w[j];
    best = std::max(best, std::sqrt(ss) / weights_[t]);
  }
  return best;
}

Vector WeightedGroupPenalty::prox(const Vector& v, double t) const {
  if (!(t > 0.0)) throw InvalidArgument("prox parameter must be positive");
  Vector out(v.size());
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    double ss = 0.0;
    for (auto j : groups_[g]) ss += v[j] * v[j];
    const double norm = std::sqrt(ss);
    const double threshold = t * weights_[g];
    const double scale = norm > threshold ? 1.0 - threshold / norm : 0.0;
    for (auto j : groups_[g]) out[j] = scale == 0.0 ? 0.0 : scale * v[j];
  }
  return out;
}

double kkt_residual(const DesignMatrix& x, const Vector& y, double lambda, const Penalty& penalty,
                    const Vector& beta) {
  const Vector g = x.normalized_transpose_apply(y - x.matrix() * beta);
  const double pen = penalty.value(beta);
  const double excess = std::max(0.0, penalty.dual(g) - lambda);
  return excess * (1.0 + pen) + std::abs(lambda * pen - compensated_dot(g, beta));
}

FitResult solve_penalized_ls(const DesignMatrix& x, const Vector& y, double lambda,
                             const Penalty& penalty, const SolveOptions& options) {
  check_inputs(x, y, lambda);
  if (!(options.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  const auto p = x.p();
  const double n = static_cast<double>(x.n());
  const Matrix& xm = x.matrix();

  if (lambda == 0.0) {
    Vector beta = xm.completeOrthogonalDecomposition().solve(y);
    return make_fit(x, y, lambda, penalty, std::move(beta), 0, options.tolerance);
  }
  if (penalty.dual(x.normalized_transpose_apply(y)) <= lambda) {
    return make_fit(x, y, lambda, penalty, Vector::Zero(p), 0, options.tolerance);
  }

  Vector beta = options.warm_start.value_or(Vector::Zero(p));
  if (beta.size() != p) throw DimensionError("warm start has the wrong length");
  Vector z = beta;
  double step = n / (2.0 * std::max(squared_operator_norm(xm), 1e-300));
  double objective = loss(x, y, beta) + 2.0 * lambda * penalty.value(beta);
  double momentum = 1.0;
  const double target = options.tolerance * kInnerTighten;

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (it % kKktEvery == 0 && kkt_residual(x, y, lambda, penalty, beta) <= target) break;
    const Vector rz = y - xm * z;
    const double fz = compensated_sum_squares(rz) / n;
    const Vector grad = -2.0 * xm.transpose() * rz / n;
    Vector u;
    double fu = 0.0;
    for (int halving = 0; halving < 60; ++halving) {
      u = penalty.prox(z - step * grad, 2.0 * lambda * step);
      const Vector d = u - z;
      fu = loss(x, y, u);
      if (fu <= fz + grad.dot(d) + d.squaredNorm() / (2.0 * step) + 1e-15 * std::abs(fz)) break;
      step *= 0.5;
    }
    const double fu_total = fu + 2.0 * lambda * penalty.value(u);
    // Monotone variant: keep the better of the proximal point and the iterate.
    // Near the optimum the true decrease drops below the rounding of the
    // objective, so ties within kAcceptSlack count as progress.
    const bool accept = fu_total <= objective + kAcceptSlack * std::max(1.0, std::abs(objective));
    const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    if (accept) {
      z = u + ((momentum - 1.0) / momentum_next) * (u - beta);
      beta = std::move(u);
      objective = fu_total;
      momentum = momentum_next;
    } else {
      z = beta;  // restart the momentum after a rejected step
      momentum = 1.0;
    }
  }
  return make_fit(x, y, lambda, penalty, std::move(beta), it, options.tolerance);
}

FitResult solve_penalized_ls(const DesignMatrix& x, const Vector& y, double lambda,
                             const NormSpec& spec, const SolveOptions& options) {
  spec.check_dimension(x.p());
  return solve_penalized_ls(x, y, lambda, NormPenalty(spec), options);
}

double variational_inequality_check(const DesignMatrix& x, const Vector& y, double lambda,
                                    const NormSpec& spec, const Vector& beta_hat,
                                    const std::vector<Vector>& probes) {
  check_inputs(x, y, lambda);
  const Vector g = x.normalized_transpose_apply(y - x.matrix() * beta_hat);
  const double pen_hat = lambda * norm_eval(spec, beta_hat);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& b : probes) {
    if (b.size() != beta_hat.size()) throw DimensionError("probe has the wrong length");
    const double v = compensated_dot(g, b - beta_hat) + pen_hat - lambda * norm_eval(spec, b);
    worst = std::max(worst, v);
  }
  return worst;
}

std::vector<Vector> default_probes(const Vector& beta_hat, int count, std::uint64_t seed) {
  const auto p = beta_hat.size();
  const double scale = std::max(1.0, beta_hat.lpNorm<Eigen::Infinity>());
  std::vector<Vector> probes;
  probes.push_back(Vector::Zero(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    for (double sign : {1.0, -1.0}) {
      probes.push_back(beta_hat + sign * 1e-3 * scale * Vector::Unit(p, j));
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> decade(-4, 0);
  while (static_cast<int>(probes.size()) < count) {
    Vector d(p);
    for (Eigen::Index j = 0; j < p; ++j) d[j] = normal(rng);
    probes.push_back(beta_hat + std::pow(10.0, decade(rng)) * scale * d);
  }
  probes.resize(static_cast<std::size_t>(std::max(count, 1)));
  return probes;
}

OverlapGroups::OverlapGroups(Groups g, Eigen::Index dim) : groups(std::move(g)), p(dim) {
  if (groups.empty()) throw InvalidArgument("overlap groups: no groups given");
  validate_cover(groups, p);
}

std::vector<int> OverlapGroups::replication() const {
  std::vector<int> counts(static_cast<std::size_t>(p), 0);
  for (const auto& g : groups) {
    for (auto j : g) ++counts[static_cast<std::size_t>(j)];
  }
  return counts;
}

Eigen::Index OverlapGroups::augmented_dimension() const {
  Eigen::Index total = 0;
  for (const auto& g : groups) total += static_cast<Eigen::Index>(g.size());
  return total;
}

OverlapFit solve_overlap(const DesignMatrix& x, const Vector& y, double lambda,
                         const OverlapGroups& groups, const SolveOptions& options, bool weighted) {
  if (groups.p != x.p()) throw DimensionError("overlap groups do not match the design width");
  const auto pt = groups.augmented_dimension();
  Matrix augmented(x.n(), pt);
  Groups blocks;
  std::vector<double> weights;
  Eigen::Index col = 0;
  for (const auto& g : groups.groups) {
    std::vector<Eigen::Index> block;
    for (auto j : g) {
      augmented.col(col) = x.matrix().col(j);
      block.push_back(col++);
    }
    blocks.push_back(std::move(block));
    weights.push_back(weighted ? std::sqrt(static_cast<double>(g.size())) : 1.0);
  }
  const WeightedGroupPenalty penalty(blocks, weights);
  SolveOptions inner = options;
  inner.warm_start.reset();
  const FitResult aug = solve_penalized_ls(DesignMatrix(std::move(augmented)), y, lambda, penalty,
                                           inner);

  OverlapFit out;
  out.fit = aug;
  out.fit.beta = Vector::Zero(x.p());
  for (std::size_t t = 0; t < groups.groups.size(); ++t) {
    Vector part = Vector::Zero(x.p());
    for (std::size_t k = 0; k < groups.groups[t].size(); ++k) {
      part[groups.groups[t][k]] = aug.beta[blocks[t][k]];
    }
    out.fit.beta += part;
    out.parts.push_back(std::move(part));
  }
  return out;
}

double omega_overlap_eval(const Vector& beta, const OverlapGroups& groups,
                          std::vector<Vector>* parts) {
  if (beta.size() != groups.p) throw DimensionError("vector does not match the overlap groups");
  const auto t_count = static_cast<Eigen::Index>(groups.groups.size());
  // sum_t ||b_t|| = min over eta >= 0 of 1/2 sum_t (||b_t||^2 / eta_t + eta_t);
  // eliminating b leaves sum_j beta_j^2 / (R eta)_j with R the incidence
  // matrix, and scaling eta = s nu gives sqrt(min_nu sum_j beta_j^2/(R nu)_j).
  Matrix incidence = Matrix::Zero(groups.p, t_count);
  for (Eigen::Index t = 0; t < t_count; ++t) {
    for (auto j : groups.groups[static_cast<std::size_t>(t)]) incidence(j, t) = 1.0;
  }
  const Vector c = beta.array().square().matrix();
  if (c.maxCoeff() == 0.0) {
    if (parts) parts->assign(static_cast<std::size_t>(t_count), Vector::Zero(groups.p));
    return 0.0;
  }
  const auto res = detail::minimize_inverse_weighted(c, incidence, 1e-14, 100000);
  const double value = std::sqrt(res.value);
  if (parts) {
    const Vector a = incidence * res.x;
    parts->clear();
    for (Eigen::Index t = 0; t < t_count; ++t) {
      Vector b = Vector::Zero(groups.p);
      for (auto j : groups.groups[static_cast<std::size_t>(t)]) {
        if (a[j] > 0.0) b[j] = beta[j] * res.x[t] / a[j];
      }
      parts->push_back(std::move(b));
    }
  }
  return value;
}

}  // namespace wdsparse
