#pragma once

#include <functional>

#include "wdsparse/core.hpp"

namespace wdsparse::detail {

// Small dense smooth convex problems over the unit simplex or the
// nonnegative orthant. Used for the cone-norm minimization over a
// polyhedral cone and for its proximal operator.
struct SmoothProblem {
  // Must return +infinity outside the domain of the objective.
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
};

enum class FeasibleSet { Simplex, Orthant };

struct SmoothMinResult {
  Vector x;
  double value = 0.0;
  // Simplex: Frank-Wolfe gap, an upper bound on value - optimum.
  // Orthant: sup-norm of the projected gradient.
  double stationarity = 0.0;
  int iterations = 0;
  bool converged = false;
};

SmoothMinResult minimize_smooth_convex(const SmoothProblem& problem, Vector start, FeasibleSet set,
                                       double tolerance, int max_iterations);

// min over the unit simplex of sum_j c_j / (R nu)_j with c >= 0 and 0/0 = 0.
// Every coordinate with c_j > 0 must be covered by some column of R.
SmoothMinResult minimize_inverse_weighted(const Vector& c, const Matrix& r, double tolerance,
                                          int max_iterations);

Vector project_simplex(const Vector& v);

// min ||A x - b||_2 subject to x >= 0 (Lawson-Hanson active set).
Vector nonnegative_least_squares(const Matrix& a, const Vector& b);

}  // namespace wdsparse::detail
