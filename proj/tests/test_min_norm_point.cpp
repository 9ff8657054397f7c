#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wdsparse/detail/min_norm_point.hpp"

using namespace wdsparse;
using namespace wdsparse::detail;
using doctest::Approx;

namespace {

LinearOracle vertex_oracle(const Matrix& points) {
  return [points](const Vector& direction) {
    Eigen::Index best = 0;
    (points.transpose() * direction).minCoeff(&best);
    return Atom{points.col(best), Vector::Unit(points.cols(), best)};
  };
}

}  // namespace

TEST_CASE("segment and triangle") {
  Matrix seg(2, 2);
  seg << 1, -1,
         1, 2;
  const auto r = min_norm_point(vertex_oracle(seg), Atom{seg.col(0), Vector::Unit(2, 0)});
  // Distance from the origin to the line x = 1 - 2t, y = 1 + t, t in [0, 1].
  CHECK(r.converged);
  CHECK(r.distance == Approx(3.0 / std::sqrt(5.0)).epsilon(1e-12));
  CHECK(r.lower_bound <= r.distance + 1e-15);
  CHECK(r.lower_bound == Approx(r.distance).epsilon(1e-9));
  // Payload combines with the same weights as the points.
  CHECK((seg * r.payload - r.point).norm() <= 1e-12);
  CHECK(r.payload.sum() == Approx(1.0));

  Matrix tri(2, 3);
  tri << 1, -1, 0,
         -1, -1, 1;
  const auto inside = min_norm_point(vertex_oracle(tri), Atom{tri.col(0), Vector::Unit(3, 0)});
  CHECK(inside.distance <= 1e-12);
}

TEST_CASE("agrees with subset enumeration") {
  std::mt19937_64 rng(97);
  for (int k = 0; k < 300; ++k) {
    const Eigen::Index dim = 2 + k % 4;
    const Eigen::Index count = 2 + k % 7;
    Matrix points = oracles::gaussian_matrix(rng, dim, count);
    if (k % 2 == 0) points.colwise() += Vector::Constant(dim, 1.5);
    const auto r = min_norm_point(vertex_oracle(points), Atom{points.col(0), Vector::Unit(count, 0)});
    const double exact = oracles::hull_distance_by_subsets(points);
    CHECK(r.distance == Approx(exact).epsilon(1e-9).scale(1.0));
    CHECK(r.lower_bound <= exact + 1e-12);
    CHECK((points * r.payload - r.point).norm() <= 1e-10);
    CHECK(r.payload.minCoeff() >= -1e-12);
  }
}

TEST_CASE("smooth convex body") {
  // Unit ball centred at c: distance |c| - 1.
  Vector c(3);
  c << 3, 4, 0;
  LinearOracle ball = [&](const Vector& d) {
    const Vector point = c - d / d.norm();
    return Atom{point, point};
  };
  const Vector start = c + Vector::Unit(3, 2);
  const auto r = min_norm_point(ball, Atom{start, start});
  CHECK(r.distance == Approx(4.0).epsilon(1e-6));
  CHECK(r.lower_bound <= 4.0 + 1e-12);
  CHECK(r.lower_bound >= 4.0 - 1e-6);
}
