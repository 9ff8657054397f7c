#include "wdsparse/cone_norm.hpp"

#include <algorithm>
#include <cmath>

#include "wdsparse/detail/smooth_min.hpp"

namespace wdsparse {

namespace {

// Tolerances of the iterative polyhedral solves.
constexpr double kRaysGapTolerance = 1e-10;
constexpr double kRaysProxTolerance = 1e-12;
constexpr int kRaysIterationCap = 100000;

Matrix normalized_rays(const Matrix& rays) {
  Matrix out = rays;
  for (Eigen::Index k = 0; k < out.cols(); ++k) out.col(k) /= out.col(k).sum();
  return out;
}

detail::SmoothMinResult minimize_inverse_weighted(const Vector& c, const Matrix& r) {
  return detail::minimize_inverse_weighted(c, r, kRaysGapTolerance, kRaysIterationCap);
}

Vector soft_threshold(const Vector& v, double t) {
  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double mag = std::abs(v[j]) - t;
    out[j] = mag > 0.0 ? std::copysign(mag, v[j]) : 0.0;
  }
  return out;
}

void block_soft_threshold(const Vector& v, const std::vector<Eigen::Index>& block, double t,
                          Vector& out) {
  double ss = 0.0;
  for (auto j : block) ss += v[j] * v[j];
  const double norm = std::sqrt(ss);
  const double threshold = t * std::sqrt(static_cast<double>(block.size()));
  const double scale = norm > threshold ? 1.0 - threshold / norm : 0.0;
  for (auto j : block) out[j] = scale == 0.0 ? 0.0 : scale * v[j];
}

bool is_union_of_groups(const Groups& groups, const IndexSet& set, std::size_t* straddling) {
  for (std::size_t t = 0; t < groups.size(); ++t) {
    std::size_t inside = 0;
    for (auto j : groups[t]) inside += set.contains(j) ? 1 : 0;
    if (inside != 0 && inside != groups[t].size()) {
      if (straddling) *straddling = t;
      return false;
    }
  }
  return true;
}

Groups reindex_remaining_groups(const Groups& groups, const IndexSet& set) {
  const IndexSet rest = set.complement();
  std::vector<Eigen::Index> position(static_cast<std::size_t>(set.universe()), -1);
  for (std::size_t k = 0; k < rest.indices().size(); ++k) {
    position[static_cast<std::size_t>(rest.indices()[k])] = static_cast<Eigen::Index>(k);
  }
  Groups out;
  for (const auto& g : groups) {
    if (set.contains(g.front())) continue;
    std::vector<Eigen::Index> mapped;
    for (auto j : g) mapped.push_back(position[static_cast<std::size_t>(j)]);
    out.push_back(std::move(mapped));
  }
  return out;
}

}  // namespace

ConeSpec ConeSpec::full_orthant() { return ConeSpec(); }

ConeSpec ConeSpec::monotone() {
  ConeSpec c;
  c.kind_ = ConeKind::Monotone;
  return c;
}

ConeSpec ConeSpec::group_constant(Groups partition) {
  validate_partition(partition);
  ConeSpec c;
  c.kind_ = ConeKind::GroupConstant;
  c.groups_ = std::move(partition);
  return c;
}

ConeSpec ConeSpec::polyhedral_rays(Matrix rays) {
  if (rays.rows() < 1 || rays.cols() < 1) throw InvalidArgument("ray cone needs at least one ray");
  if (!rays.allFinite()) throw InvalidArgument("ray entries must be finite");
  if ((rays.array() < 0.0).any()) throw InvalidArgument("rays must be nonnegative");
  for (Eigen::Index k = 0; k < rays.cols(); ++k) {
    if (rays.col(k).sum() <= 0.0) {
      throw InvalidArgument("ray " + std::to_string(k + 1) + " is zero");
    }
  }
  const Vector coverage = rays.rowwise().sum();
  for (Eigen::Index j = 0; j < coverage.size(); ++j) {
    if (coverage[j] <= 0.0) {
      throw InvalidArgument("cone has no strictly positive element: coordinate " +
                            std::to_string(j + 1) + " is zero on every ray");
    }
  }
  ConeSpec c;
  c.kind_ = ConeKind::PolyhedralRays;
  c.rays_ = std::move(rays);
  return c;
}

std::optional<Eigen::Index> ConeSpec::dimension() const {
  switch (kind_) {
    case ConeKind::GroupConstant: {
      Eigen::Index p = 0;
      for (const auto& g : groups_) p += static_cast<Eigen::Index>(g.size());
      return p;
    }
    case ConeKind::PolyhedralRays:
      return rays_.rows();
    default:
      return std::nullopt;
  }
}

void ConeSpec::check_dimension(Eigen::Index p) const {
  if (auto d = dimension(); d && *d != p) {
    throw DimensionError(describe() + " cone has dimension " + std::to_string(*d) +
                         ", vector has length " + std::to_string(p));
  }
}

Matrix ConeSpec::section_generators(Eigen::Index p) const {
  check_dimension(p);
  switch (kind_) {
    case ConeKind::FullOrthant:
      return Matrix::Identity(p, p);
    case ConeKind::Monotone: {
      Matrix g = Matrix::Zero(p, p);
      for (Eigen::Index k = 0; k < p; ++k) {
        g.col(k).head(k + 1).setConstant(1.0 / static_cast<double>(k + 1));
      }
      return g;
    }
    case ConeKind::GroupConstant: {
      Matrix g = Matrix::Zero(p, static_cast<Eigen::Index>(groups_.size()));
      for (std::size_t t = 0; t < groups_.size(); ++t) {
        for (auto j : groups_[t]) {
          g(j, static_cast<Eigen::Index>(t)) = 1.0 / static_cast<double>(groups_[t].size());
        }
      }
      return g;
    }
    case ConeKind::PolyhedralRays:
      return normalized_rays(rays_);
  }
  return {};
}

Eigen::Index ConeSpec::extreme_point_count(Eigen::Index p) const {
  check_dimension(p);
  switch (kind_) {
    case ConeKind::FullOrthant:
    case ConeKind::Monotone:
      return p;
    case ConeKind::GroupConstant:
      return static_cast<Eigen::Index>(groups_.size());
    case ConeKind::PolyhedralRays:
      return rays_.cols();
  }
  return 0;
}

bool ConeSpec::contains(const Vector& x, double tol) const {
  check_dimension(x.size());
  const double scale = std::max(1.0, x.lpNorm<Eigen::Infinity>());
  const double slack = tol * scale;
  if ((x.array() < -slack).any()) return false;
  switch (kind_) {
    case ConeKind::FullOrthant:
      return true;
    case ConeKind::Monotone:
      for (Eigen::Index j = 1; j < x.size(); ++j) {
        if (x[j] > x[j - 1] + slack) return false;
      }
      return true;
    case ConeKind::GroupConstant:
      for (const auto& g : groups_) {
        for (auto j : g) {
          if (std::abs(x[j] - x[g.front()]) > slack) return false;
        }
      }
      return true;
    case ConeKind::PolyhedralRays: {
      if (x.lpNorm<Eigen::Infinity>() == 0.0) return true;
      const Vector mu = detail::nonnegative_least_squares(rays_, x);
      return (rays_ * mu - x).norm() <= tol * std::max(1.0, x.norm());
    }
  }
  return false;
}

std::string ConeSpec::describe() const {
  switch (kind_) {
    case ConeKind::FullOrthant:
      return "full orthant";
    case ConeKind::Monotone:
      return "monotone";
    case ConeKind::GroupConstant:
      return "group-constant";
    case ConeKind::PolyhedralRays:
      return "polyhedral";
  }
  return "unknown";
}

MonotonePartition monotone_contiguous_partition(const Vector& beta) {
  struct Block {
    Eigen::Index begin;
    Eigen::Index count;
    double sum_squares;
  };
  std::vector<Block> stack;
  const auto p = beta.size();
  for (Eigen::Index j = 0; j < p; ++j) {
    stack.push_back({j, 1, beta[j] * beta[j]});
    // Pool while the later block's mean square is not strictly below the
    // earlier one's; the cone requires nonincreasing values.
    while (stack.size() >= 2) {
      const Block& last = stack.back();
      const Block& prev = stack[stack.size() - 2];
      if (last.sum_squares * static_cast<double>(prev.count) <
          prev.sum_squares * static_cast<double>(last.count)) {
        break;
      }
      Block merged{prev.begin, prev.count + last.count, prev.sum_squares + last.sum_squares};
      stack.pop_back();
      stack.back() = merged;
    }
  }
  MonotonePartition out;
  for (const auto& b : stack) {
    std::vector<Eigen::Index> block;
    for (Eigen::Index j = b.begin; j < b.begin + b.count; ++j) block.push_back(j);
    out.blocks.push_back(std::move(block));
    const double count = static_cast<double>(b.count);
    out.block_values.push_back(std::sqrt(b.sum_squares / count));
    out.value += std::sqrt(count * b.sum_squares);
  }
  if (p == 0) out.value = 0.0;
  return out;
}

ConeNormResult cone_norm_eval(const ConeSpec& cone, const Vector& beta) {
  cone.check_dimension(beta.size());
  ConeNormResult out;
  switch (cone.kind()) {
    case ConeKind::FullOrthant:
      out.minimizer = beta.cwiseAbs();
      out.value = beta.lpNorm<1>();
      break;
    case ConeKind::Monotone: {
      auto part = monotone_contiguous_partition(beta);
      out.minimizer.resize(beta.size());
      for (std::size_t t = 0; t < part.blocks.size(); ++t) {
        for (auto j : part.blocks[t]) out.minimizer[j] = part.block_values[t];
      }
      out.value = part.value;
      out.partition = std::move(part.blocks);
      break;
    }
    case ConeKind::GroupConstant:
      out.minimizer.resize(beta.size());
      for (const auto& g : cone.groups()) {
        double ss = 0.0;
        for (auto j : g) ss += beta[j] * beta[j];
        const double size = static_cast<double>(g.size());
        for (auto j : g) out.minimizer[j] = std::sqrt(ss / size);
        out.value += std::sqrt(size * ss);
      }
      break;
    case ConeKind::PolyhedralRays: {
      const Vector c = beta.array().square().matrix();
      if (c.maxCoeff() == 0.0) {
        out.minimizer = Vector::Zero(beta.size());
        break;
      }
      const Matrix r = normalized_rays(cone.rays());
      const auto res = minimize_inverse_weighted(c, r);
      // min over a = s * alpha, alpha in A(1): 1/2 (G(alpha)/s + s) is
      // minimized at s = sqrt(G).
      out.value = std::sqrt(res.value);
      out.minimizer = out.value * (r * res.x);
      out.certified = res.converged;
      out.lower_bound = std::sqrt(std::max(0.0, res.value - res.stationarity));
      out.iterations = res.iterations;
      return out;
    }
  }
  out.lower_bound = out.value;
  return out;
}

double cone_dual_eval(const ConeSpec& cone, const Vector& w) {
  cone.check_dimension(w.size());
  switch (cone.kind()) {
    case ConeKind::FullOrthant:
      return w.size() == 0 ? 0.0 : w.lpNorm<Eigen::Infinity>();
    case ConeKind::Monotone: {
      double best = 0.0;
      double cumulative = 0.0;
      for (Eigen::Index k = 0; k < w.size(); ++k) {
        cumulative += w[k] * w[k];
        best = std::max(best, cumulative / static_cast<double>(k + 1));
      }
      return std::sqrt(best);
    }
    case ConeKind::GroupConstant: {
      double best = 0.0;
      for (const auto& g : cone.groups()) {
        double ss = 0.0;
        for (auto j : g) ss += w[j] * w[j];
        best = std::max(best, ss / static_cast<double>(g.size()));
      }
      return std::sqrt(best);
    }
    case ConeKind::PolyhedralRays: {
      const Matrix gens = cone.section_generators(w.size());
      const Vector values = gens.transpose() * w.array().square().matrix();
      return std::sqrt(std::max(0.0, values.maxCoeff()));
    }
  }
  return 0.0;
}

Vector cone_dual_maximizer(const ConeSpec& cone, const Vector& w) {
  const auto p = w.size();
  cone.check_dimension(p);
  Vector gamma = Vector::Zero(p);
  if (p == 0) return gamma;
  const Vector w2 = w.array().square().matrix();
  Vector best_generator;
  switch (cone.kind()) {
    case ConeKind::FullOrthant: {
      Eigen::Index j = 0;
      w.cwiseAbs().maxCoeff(&j);
      gamma[j] = w[j] >= 0.0 ? 1.0 : -1.0;
      return gamma;
    }
    case ConeKind::Monotone: {
      double best = -1.0;
      Eigen::Index best_k = 0;
      double cumulative = 0.0;
      for (Eigen::Index k = 0; k < p; ++k) {
        cumulative += w2[k];
        const double v = cumulative / static_cast<double>(k + 1);
        if (v > best) {
          best = v;
          best_k = k;
        }
      }
      best_generator = Vector::Zero(p);
      best_generator.head(best_k + 1).setConstant(1.0 / static_cast<double>(best_k + 1));
      break;
    }
    default: {
      const Matrix gens = cone.section_generators(p);
      Eigen::Index k = 0;
      (gens.transpose() * w2).maxCoeff(&k);
      best_generator = gens.col(k);
      break;
    }
  }
  const double d = std::sqrt(best_generator.dot(w2));
  if (d == 0.0) return gamma;
  return (best_generator.array() * w.array()).matrix() / d;
}

Vector cone_prox(const ConeSpec& cone, const Vector& v, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("prox parameter must be positive");
  cone.check_dimension(v.size());
  switch (cone.kind()) {
    case ConeKind::FullOrthant:
      return soft_threshold(v, t);
    case ConeKind::Monotone: {
      // The joint minimization over (z, a) reduces to minimizing
      // sum_j v_j^2/(a_j + t) + a_j over the cone, whose pooled block optimum
      // is rms(v_G) - t: the same contiguous partition as for evaluating the
      // norm at v, clipped at zero. On a block this is group soft-thresholding.
      const auto part = monotone_contiguous_partition(v);
      Vector out(v.size());
      for (const auto& block : part.blocks) block_soft_threshold(v, block, t, out);
      return out;
    }
    case ConeKind::GroupConstant: {
      Vector out(v.size());
      for (const auto& g : cone.groups()) block_soft_threshold(v, g, t, out);
      return out;
    }
    case ConeKind::PolyhedralRays: {
      const Matrix r = normalized_rays(cone.rays());
      const Vector v2 = v.array().square().matrix();
      detail::SmoothProblem problem;
      problem.value = [&](const Vector& mu) {
        const Vector a = r * mu;
        return (v2.array() / (a.array() + t) + a.array()).sum();
      };
      problem.gradient = [&](const Vector& mu) {
        const Vector a = r * mu;
        const Vector d = (1.0 - v2.array() / (a.array() + t).square()).matrix();
        return Vector(r.transpose() * d);
      };
      problem.hessian = [&](const Vector& mu) {
        const Vector a = r * mu;
        const Vector d = (2.0 * v2.array() / (a.array() + t).cube()).matrix();
        return Matrix(r.transpose() * d.asDiagonal() * r);
      };
      const auto res = detail::minimize_smooth_convex(problem, Vector::Zero(r.cols()),
                                                      detail::FeasibleSet::Orthant,
                                                      kRaysProxTolerance, kRaysIterationCap);
      const Vector a = r * res.x;
      Vector out(v.size());
      for (Eigen::Index j = 0; j < v.size(); ++j) {
        out[j] = a[j] > 0.0 ? v[j] * a[j] / (a[j] + t) : 0.0;
      }
      return out;
    }
  }
  return v;
}

AllowedCheck cone_allowed(const ConeSpec& cone, const IndexSet& set) {
  cone.check_dimension(set.universe());
  AllowedCheck out;
  const auto p = set.universe();
  switch (cone.kind()) {
    case ConeKind::FullOrthant:
      out.allowed = true;
      return out;
    case ConeKind::Monotone: {
      const auto s = set.size();
      out.allowed = s == 0 || set.indices().back() == s - 1;
      if (!out.allowed) {
        out.reason = "monotone cone: allowed sets are prefixes {1..s}";
        out.witness = Vector::Ones(p);
      }
      return out;
    }
    case ConeKind::GroupConstant: {
      std::size_t t = 0;
      out.allowed = is_union_of_groups(cone.groups(), set, &t);
      if (!out.allowed) {
        out.reason = "group-constant cone: set splits group " + std::to_string(t + 1);
        out.witness = Vector::Ones(p);
      }
      return out;
    }
    case ConeKind::PolyhedralRays: {
      for (Eigen::Index k = 0; k < cone.rays().cols(); ++k) {
        const Vector restricted = restrict(cone.rays().col(k), set);
        if (!cone.contains(restricted)) {
          out.reason = "polyhedral cone: restriction of ray " + std::to_string(k + 1) +
                       " to the set leaves the cone";
          out.witness = cone.rays().col(k);
          return out;
        }
      }
      out.allowed = true;
      return out;
    }
  }
  return out;
}

ConeSpec residual_cone(const ConeSpec& cone, const IndexSet& set) {
  const auto check = cone_allowed(cone, set);
  if (!check.allowed) throw NotAllowedError(check.reason, check.witness);
  if (set.is_full()) return ConeSpec::full_orthant();
  switch (cone.kind()) {
    case ConeKind::FullOrthant:
    case ConeKind::Monotone:
      return cone;
    case ConeKind::GroupConstant:
      return ConeSpec::group_constant(reindex_remaining_groups(cone.groups(), set));
    case ConeKind::PolyhedralRays: {
      const IndexSet rest = set.complement();
      std::vector<Vector> kept;
      for (Eigen::Index k = 0; k < cone.rays().cols(); ++k) {
        Vector projected = rest.gather(cone.rays().col(k));
        if (projected.sum() > 0.0) kept.push_back(std::move(projected));
      }
      Matrix rays(rest.size(), static_cast<Eigen::Index>(kept.size()));
      for (std::size_t k = 0; k < kept.size(); ++k) rays.col(static_cast<Eigen::Index>(k)) = kept[k];
      return ConeSpec::polyhedral_rays(std::move(rays));
    }
  }
  return cone;
}

double pontil_maurer_bound(const DesignMatrix& x, const ConeSpec& cone) {
  const auto n = x.n();
  const auto p = x.p();
  const auto extreme = cone.extreme_point_count(p);
  if (extreme < 1) throw InvalidArgument("cone section has no extreme points");
  double sum_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = cone_dual_eval(cone, x.matrix().row(i).transpose());
    sum_sq += d * d;
  }
  const double nd = static_cast<double>(n);
  return std::sqrt(8.0 / nd) * (2.0 + std::sqrt(std::log(static_cast<double>(extreme)))) *
         std::sqrt(sum_sq / nd);
}

}  // namespace wdsparse
