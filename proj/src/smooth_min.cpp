#include "wdsparse/detail/smooth_min.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wdsparse::detail {

Vector project_simplex(const Vector& v) {
  const auto k = v.size();
  std::vector<double> sorted(v.data(), v.data() + k);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    cumulative += sorted[static_cast<std::size_t>(i)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[static_cast<std::size_t>(i)] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).max(0.0).matrix();
}

namespace {

Vector project(const Vector& v, FeasibleSet set) {
  if (set == FeasibleSet::Simplex) return project_simplex(v);
  return v.cwiseMax(0.0);
}

double stationarity(const Vector& x, const Vector& g, FeasibleSet set) {
  if (set == FeasibleSet::Simplex) {
    return std::max(0.0, g.dot(x) - g.minCoeff());
  }
  return (x - (x - g).cwiseMax(0.0)).lpNorm<Eigen::Infinity>();
}

// One damped Newton step restricted to the free coordinates. Returns true
// and updates x, f when it produced a sufficient decrease.
bool newton_step(const SmoothProblem& problem, FeasibleSet set, Vector& x, double& f,
                 const Vector& g) {
  std::vector<Eigen::Index> free;
  Eigen::Index entering = 0;
  g.minCoeff(&entering);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (x[k] > 0.0 || (set == FeasibleSet::Orthant && g[k] < 0.0) ||
        (set == FeasibleSet::Simplex && k == entering)) {
      free.push_back(k);
    }
  }
  if (free.empty()) return false;
  const auto m = static_cast<Eigen::Index>(free.size());
  const Matrix h = problem.hessian(x);
  Vector d_free;
  if (set == FeasibleSet::Simplex) {
    if (m < 2) return false;
    Matrix kkt = Matrix::Zero(m + 1, m + 1);
    Vector rhs = Vector::Zero(m + 1);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) kkt(a, b) = h(free[a], free[b]);
      kkt(a, m) = 1.0;
      kkt(m, a) = 1.0;
      rhs[a] = -g[free[a]];
    }
    const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    d_free = sol.head(m);
  } else {
    Matrix hff(m, m);
    Vector gf(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) hff(a, b) = h(free[a], free[b]);
      gf[a] = g[free[a]];
    }
    d_free = -hff.completeOrthogonalDecomposition().solve(gf);
  }
  if (!d_free.allFinite()) return false;
  Vector d = Vector::Zero(x.size());
  for (Eigen::Index a = 0; a < m; ++a) d[free[a]] = d_free[a];
  double slope = g.dot(d);
  if (set == FeasibleSet::Simplex) {
    // d sums to zero; centering keeps rounding in that sum out of the slope.
    const double shift = d.sum() / static_cast<double>(m);
    for (Eigen::Index a = 0; a < m; ++a) d[free[a]] -= shift;
    double g_mean = 0.0;
    for (Eigen::Index a = 0; a < m; ++a) g_mean += g[free[a]];
    g_mean /= static_cast<double>(m);
    slope = 0.0;
    for (Eigen::Index a = 0; a < m; ++a) slope += (g[free[a]] - g_mean) * d[free[a]];
  }
  if (!(slope < 0.0)) return false;
  const double current = stationarity(x, g, set);

  double s_max = 1.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (d[k] < 0.0) s_max = std::min(s_max, x[k] / -d[k]);
  }
  if (s_max <= 0.0) return false;
  double s = s_max;
  for (int halving = 0; halving < 40; ++halving, s *= 0.5) {
    Vector trial = x + s * d;
    if (s == s_max && s_max < 1.0) {
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (d[k] < 0.0 && x[k] / -d[k] <= s_max) trial[k] = 0.0;
      }
    }
    trial = trial.cwiseMax(0.0);
    if (set == FeasibleSet::Simplex) trial /= trial.sum();
    const double ft = problem.value(trial);
    if (!std::isfinite(ft)) continue;
    // Near the optimum the decrease drops below the rounding of f; accept
    // then on a halved stationarity measure instead.
    if ((ft < f && ft <= f + 1e-4 * s * slope) ||
        (ft <= f + 1e-14 * std::abs(f) &&
         stationarity(trial, problem.gradient(trial), set) < 0.5 * current)) {
      x = std::move(trial);
      f = ft;
      return true;
    }
  }
  return false;
}

// Better of the Frank-Wolfe and away directions, Armijo backtracking from
// the largest feasible step.
bool frank_wolfe_step(const SmoothProblem& problem, Vector& x, double& f, const Vector& g) {
  Eigen::Index toward = 0;
  g.minCoeff(&toward);
  Eigen::Index away = -1;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (x[k] > 0.0 && (away < 0 || g[k] > g[away])) away = k;
  }
  Vector d = -x;
  d[toward] += 1.0;
  double s_max = 1.0;
  if (away >= 0 && x[away] < 1.0 && g[away] - g.dot(x) > g.dot(x) - g[toward]) {
    d = x;
    d[away] -= 1.0;
    s_max = x[away] / (1.0 - x[away]);
  }
  const double slope = g.dot(d);
  if (!(slope < 0.0)) return false;
  const double current = stationarity(x, g, FeasibleSet::Simplex);
  for (double s = s_max; s > 1e-20 * s_max; s *= 0.5) {
    Vector trial = (x + s * d).cwiseMax(0.0);
    trial /= trial.sum();
    const double ft = problem.value(trial);
    if (!std::isfinite(ft)) continue;
    if ((ft < f && ft <= f + 1e-4 * s * slope) ||
        (ft <= f + 1e-14 * std::abs(f) &&
         stationarity(trial, problem.gradient(trial), FeasibleSet::Simplex) < 0.5 * current)) {
      x = std::move(trial);
      f = ft;
      return true;
    }
  }
  return false;
}

}  // namespace

SmoothMinResult minimize_smooth_convex(const SmoothProblem& problem, Vector start, FeasibleSet set,
                                       double tolerance, int max_iterations) {
  SmoothMinResult out;
  Vector x = project(start, set);
  double f = problem.value(x);
  if (!std::isfinite(f)) {
    throw InvalidArgument("smooth minimization started outside the objective domain");
  }
  double step = 1.0;
  {
    const double h = problem.hessian(x).norm();
    if (h > 0.0 && std::isfinite(h)) step = 1.0 / h;
  }
  int it = 0;
  for (; it < max_iterations; ++it) {
    const Vector g = problem.gradient(x);
    const double stat = stationarity(x, g, set);
    const double threshold =
        set == FeasibleSet::Simplex ? tolerance * std::abs(f) : tolerance;
    out.stationarity = stat;
    if (stat <= threshold) {
      out.converged = true;
      break;
    }
    if (newton_step(problem, set, x, f, g)) continue;

    if (set == FeasibleSet::Simplex) {
      if (!frank_wolfe_step(problem, x, f, g)) break;
      continue;
    }
    bool accepted = false;
    for (int halving = 0; halving < 200; ++halving) {
      const Vector trial = project(x - step * g, set);
      const Vector d = trial - x;
      const double ft = problem.value(trial);
      if (std::isfinite(ft) && ft <= f + g.dot(d) + d.squaredNorm() / (2.0 * step)) {
        accepted = d.squaredNorm() > 0.0;
        x = trial;
        f = ft;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step *= 2.0;
  }
  out.x = std::move(x);
  out.value = f;
  out.iterations = it;
  if (!out.converged) {
    out.stationarity = stationarity(out.x, problem.gradient(out.x), set);
  }
  return out;
}

SmoothMinResult minimize_inverse_weighted(const Vector& c, const Matrix& r, double tolerance,
                                          int max_iterations) {
  SmoothProblem problem;
  problem.value = [&](const Vector& nu) {
    const Vector a = r * nu;
    double total = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      if (c[j] == 0.0) continue;
      if (a[j] <= 0.0) return std::numeric_limits<double>::infinity();
      total += c[j] / a[j];
    }
    return total;
  };
  problem.gradient = [&](const Vector& nu) {
    const Vector a = r * nu;
    Vector weights = Vector::Zero(a.size());
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      if (c[j] != 0.0) weights[j] = -c[j] / (a[j] * a[j]);
    }
    return Vector(r.transpose() * weights);
  };
  problem.hessian = [&](const Vector& nu) {
    const Vector a = r * nu;
    Vector weights = Vector::Zero(a.size());
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      if (c[j] != 0.0) weights[j] = 2.0 * c[j] / (a[j] * a[j] * a[j]);
    }
    return Matrix(r.transpose() * weights.asDiagonal() * r);
  };
  const Vector start = Vector::Constant(r.cols(), 1.0 / static_cast<double>(r.cols()));
  return minimize_smooth_convex(problem, start, FeasibleSet::Simplex, tolerance, max_iterations);
}

Vector nonnegative_least_squares(const Matrix& a, const Vector& b) {
  const auto k = a.cols();
  Vector x = Vector::Zero(k);
  std::vector<bool> passive(static_cast<std::size_t>(k), false);
  const double tol = 1e-12 * std::max(1.0, a.norm() * b.norm());
  for (int outer = 0; outer < 3 * static_cast<int>(k) + 10; ++outer) {
    const Vector w = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (int inner = 0; inner < 3 * static_cast<int>(k) + 10; ++inner) {
      std::vector<Eigen::Index> cols;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
      }
      Matrix ap(a.rows(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) ap.col(static_cast<Eigen::Index>(c)) = a.col(cols[c]);
      const Vector sp = ap.completeOrthogonalDecomposition().solve(b);
      Vector s = Vector::Zero(k);
      for (std::size_t c = 0; c < cols.size(); ++c) s[cols[c]] = sp[static_cast<Eigen::Index>(c)];
      bool all_positive = true;
      double alpha = 1.0;
      for (auto j : cols) {
        if (s[j] <= 0.0) {
          all_positive = false;
          const double denom = x[j] - s[j];
          if (denom > 0.0) alpha = std::min(alpha, x[j] / denom);
        }
      }
      if (all_positive) {
        x = s;
        break;
      }
      x += alpha * (s - x);
      for (auto j : cols) {
        if (x[j] <= 1e-15) {
          x[j] = 0.0;
          passive[static_cast<std::size_t>(j)] = false;
        }
      }
    }
  }
  return x;
}

}  // namespace wdsparse::detail
