#include "wdsparse/detail/min_norm_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace wdsparse::detail {

namespace {

// argmin ||A alpha||^2 subject to sum(alpha) = 1, for the affine hull of the
// corral columns.
Vector affine_minimizer(const Matrix& corral) {
  const auto m = corral.cols();
  Matrix kkt = Matrix::Zero(m + 1, m + 1);
  kkt.topLeftCorner(m, m) = corral.transpose() * corral;
  kkt.block(0, m, m, 1).setOnes();
  kkt.block(m, 0, 1, m).setOnes();
  Vector rhs = Vector::Zero(m + 1);
  rhs[m] = 1.0;
  return kkt.completeOrthogonalDecomposition().solve(rhs).head(m);
}

// Caratheodory reduction: while the corral has more atoms than an affinely
// independent set can, move the weights along an affine dependence until
// one vanishes. The combined point does not change.
void reduce_corral(std::vector<Atom>& atoms, std::vector<double>& weights, Eigen::Index dim) {
  while (static_cast<Eigen::Index>(atoms.size()) > dim + 1) {
    const auto k = static_cast<Eigen::Index>(atoms.size());
    Matrix m(dim + 1, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      m.col(i).head(dim) = atoms[static_cast<std::size_t>(i)].point;
      m(dim, i) = 1.0;
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const Vector nu = svd.matrixV().col(k - 1);
    double step = std::numeric_limits<double>::infinity();
    std::size_t hit = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const double c = nu[static_cast<Eigen::Index>(i)];
      if (c > 0.0 && weights[i] / c < step) {
        step = weights[i] / c;
        hit = i;
      }
    }
    if (!std::isfinite(step)) step = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      weights[i] = std::max(0.0, weights[i] - step * nu[static_cast<Eigen::Index>(i)]);
    }
    atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(hit));
    weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(hit));
    double total = 0.0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;
  }
}

}  // namespace

MinNormPointResult min_norm_point(const LinearOracle& oracle, const Atom& start,
                                  const MinNormPointOptions& options) {
  const auto dim = start.point.size();
  std::vector<Atom> atoms{start};
  std::vector<double> weights{1.0};
  MinNormPointResult out;
  Vector x = start.point;

  auto corral_matrix = [&] {
    Matrix a(dim, static_cast<Eigen::Index>(atoms.size()));
    for (std::size_t i = 0; i < atoms.size(); ++i) a.col(static_cast<Eigen::Index>(i)) = atoms[i].point;
    return a;
  };
  auto recompute_x = [&] {
    x.setZero();
    for (std::size_t i = 0; i < atoms.size(); ++i) x += weights[i] * atoms[i].point;
  };

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const double xx = x.squaredNorm();
    if (std::sqrt(xx) <= options.zero_distance) {
      out.converged = true;
      break;
    }
    Atom q = oracle(x);
    const double xq = x.dot(q.point);
    out.lower_bound = std::max(out.lower_bound, xq / std::sqrt(xx));
    if (xx - xq <= options.relative_gap * xx) {
      out.converged = true;
      break;
    }
    const bool repeated = std::any_of(atoms.begin(), atoms.end(), [&](const Atom& a) {
      return (a.point - q.point).norm() <= 1e-14 * std::max(1.0, q.point.norm());
    });
    if (repeated) {
      // No further progress is representable; the bound above stands.
      break;
    }
    reduce_corral(atoms, weights, dim);
    atoms.push_back(std::move(q));
    weights.push_back(0.0);

    for (int minor = 0; minor < 4 * static_cast<int>(atoms.size()) + 8; ++minor) {
      const Vector alpha = affine_minimizer(corral_matrix());
      const double floor = 1e-15;
      if ((alpha.array() > floor).all()) {
        for (std::size_t i = 0; i < atoms.size(); ++i) weights[i] = alpha[static_cast<Eigen::Index>(i)];
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        const double a = alpha[static_cast<Eigen::Index>(i)];
        if (a <= floor && weights[i] - a > 0.0) theta = std::min(theta, weights[i] / (weights[i] - a));
      }
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        weights[i] = theta * alpha[static_cast<Eigen::Index>(i)] + (1.0 - theta) * weights[i];
      }
      // Drop the atoms whose weight vanished (at least one does).
      std::size_t keep = 0;
      double smallest = weights[0];
      std::size_t smallest_at = 0;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (weights[i] < smallest) {
          smallest = weights[i];
          smallest_at = i;
        }
      }
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (weights[i] > floor && i != smallest_at) {
          atoms[keep] = std::move(atoms[i]);
          weights[keep] = weights[i];
          ++keep;
        }
      }
      if (keep == 0) {
        atoms[0] = std::move(atoms[smallest_at]);
        weights[0] = 1.0;
        keep = 1;
      }
      atoms.resize(keep);
      weights.resize(keep);
      double total = 0.0;
      for (double w : weights) total += w;
      for (double& w : weights) w /= total;
    }
    recompute_x();
  }

  out.iterations = it;
  out.point = x;
  out.distance = x.norm();
  out.payload = Vector::Zero(atoms.front().payload.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) out.payload += weights[i] * atoms[i].payload;
  out.lower_bound = std::min(std::max(0.0, out.lower_bound), out.distance);
  return out;
}

}  // namespace wdsparse::detail
