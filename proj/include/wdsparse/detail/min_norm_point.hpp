#pragma once

#include <functional>

#include "wdsparse/core.hpp"

namespace wdsparse::detail {

// A point of a compact convex set P together with whatever parametrizes it
// (for the eigenvalue problems: the coefficient vector theta with point
// X theta / sqrt(n)). Payloads are combined with the same convex weights as
// the points, so they must depend affinely on the point's parametrization.
struct Atom {
  Vector point;
  Vector payload;
};

// Returns an atom minimizing direction^T y over y in P.
using LinearOracle = std::function<Atom(const Vector& direction)>;

struct MinNormPointOptions {
  int max_iterations = 2000;
  // Stop when ||x||^2 - min_{y in P} x^T y <= relative_gap * ||x||^2.
  double relative_gap = 1e-13;
  // Treat ||x|| below this as the origin.
  double zero_distance = 1e-14;
};

struct MinNormPointResult {
  Vector point;
  Vector payload;
  // ||point||: an upper bound on the distance from the origin to P.
  double distance = 0.0;
  // max over iterations of x^T q / ||x||, clipped at 0: a lower bound.
  double lower_bound = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Wolfe's minimum-norm-point algorithm over conv of the oracle's atoms.
MinNormPointResult min_norm_point(const LinearOracle& oracle, const Atom& start,
                                  const MinNormPointOptions& options = {});

}  // namespace wdsparse::detail
