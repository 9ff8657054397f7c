#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wdsparse/solvers.hpp"

using namespace wdsparse;
using doctest::Approx;

namespace {

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

std::vector<NormSpec> specs(Eigen::Index p) {
  Groups pairs;
  for (Eigen::Index j = 0; j < p; j += 2) pairs.push_back({j, j + 1});
  return {NormSpec::l1(), NormSpec::group(pairs), NormSpec::trivial_g(IndexSet(p, {0, 1})),
          NormSpec::cone(ConeSpec::monotone()), NormSpec::cone(ConeSpec::group_constant(pairs))};
}

}  // namespace

TEST_CASE("least squares at lambda zero") {
  std::mt19937_64 rng(3);
  const Matrix q = oracles::orthonormal_design(rng, 12, 4);
  const DesignMatrix x(q);
  const Vector y = oracles::gaussian_vector(rng, 12);
  const auto fit = solve_penalized_ls(x, y, 0.0, NormSpec::l1());
  CHECK(fit.converged);
  CHECK((fit.beta - q.transpose() * y / 12.0).norm() <= 1e-8);

  // Rank deficient: duplicated column, minimum-norm solution splits evenly.
  Matrix d(6, 2);
  d.col(0) = oracles::gaussian_vector(rng, 6);
  d.col(1) = d.col(0);
  const Vector yd = oracles::gaussian_vector(rng, 6);
  const auto dup = solve_penalized_ls(DesignMatrix(d), yd, 0.0, NormSpec::l1());
  CHECK(dup.beta(0) == Approx(dup.beta(1)).epsilon(1e-10));
}

TEST_CASE("orthonormal design gives soft thresholding") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const Matrix q = oracles::orthonormal_design(rng, 15, 5);
    const Vector y = oracles::gaussian_vector(rng, 15, 2.0);
    const double lambda = 0.05 + 0.1 * k;
    const auto fit = solve_penalized_ls(DesignMatrix(q), y, lambda, NormSpec::l1());
    REQUIRE(fit.converged);
    const Vector z = q.transpose() * y / 15.0;
    for (Eigen::Index j = 0; j < 5; ++j) {
      CHECK(std::abs(fit.beta(j) - soft(z(j), lambda)) <= 1e-8);
      if (std::abs(z(j)) <= lambda) CHECK(fit.beta(j) == 0.0);
    }
  }
}

TEST_CASE("zero solution above the dual threshold") {
  std::mt19937_64 rng(7);
  for (const auto& spec : specs(6)) {
    const Matrix m = oracles::gaussian_matrix(rng, 20, 6);
    const DesignMatrix x(m);
    const Vector y = oracles::gaussian_vector(rng, 20);
    const double threshold = dual_norm_eval(spec, m.transpose() * y / 20.0);
    const auto fit = solve_penalized_ls(x, y, threshold, spec);
    CHECK(fit.converged);
    CHECK(fit.beta == Vector::Zero(6));
    const auto below = solve_penalized_ls(x, y, 0.9 * threshold, spec);
    CHECK(below.beta.lpNorm<1>() > 0.0);
  }
}

TEST_CASE("variational inequality certificate") {
  std::mt19937_64 rng(11);
  int k = 0;
  for (const auto& spec : specs(6)) {
    for (int rep = 0; rep < 4; ++rep, ++k) {
      const Matrix m = oracles::gaussian_matrix(rng, 25, 6);
      const DesignMatrix x(m);
      const Vector y = m * oracles::gaussian_vector(rng, 6) + oracles::gaussian_vector(rng, 25);
      const double lambda = 0.3 * dual_norm_eval(spec, m.transpose() * y / 25.0);
      const auto fit = solve_penalized_ls(x, y, lambda, spec);
      REQUIRE(fit.converged);
      const auto probes = default_probes(fit.beta, 1000, 100 + static_cast<std::uint64_t>(k));
      CHECK(probes.size() == 1000);
      CHECK(variational_inequality_check(x, y, lambda, spec, fit.beta, probes) <= 1e-8);
      CHECK(variational_inequality_check(x, y, lambda, spec, fit.beta, {fit.beta}) == 0.0);

      const Vector wrong = fit.beta + 0.1 * Vector::Unit(6, 0);
      CHECK(variational_inequality_check(x, y, lambda, spec, wrong,
                                         default_probes(wrong, 1000, 7)) > 1e-6);
    }
  }
}

TEST_CASE("solution scaling") {
  std::mt19937_64 rng(13);
  for (const auto& spec : specs(4)) {
    const Matrix m = oracles::gaussian_matrix(rng, 18, 4);
    const DesignMatrix x(m);
    const Vector y = oracles::gaussian_vector(rng, 18);
    const double lambda = 0.2 * dual_norm_eval(spec, m.transpose() * y / 18.0);
    SolveOptions tight;
    tight.tolerance = 1e-10;
    const auto base = solve_penalized_ls(x, y, lambda, spec, tight);
    for (double c : {0.5, 3.0}) {
      const auto scaled = solve_penalized_ls(x, c * y, c * lambda, spec, tight);
      CHECK((scaled.beta - c * base.beta).norm() <= 1e-8 * (1 + c * base.beta.norm()));
    }
  }
}

TEST_CASE("repeated columns share one fitted value") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10; ++k) {
    const Matrix m = oracles::gaussian_matrix(rng, 20, 5);
    const Vector y = m * oracles::gaussian_vector(rng, 5) + oracles::gaussian_vector(rng, 20);
    Matrix wide(20, 6);
    wide.leftCols(5) = m;
    wide.col(5) = m.col(k % 5);
    const double lambda = 0.25 * (m.transpose() * y / 20.0).lpNorm<Eigen::Infinity>();
    SolveOptions tight;
    tight.tolerance = 1e-11;
    const auto a = solve_penalized_ls(DesignMatrix(m), y, lambda, NormSpec::l1(), tight);
    const auto b = solve_penalized_ls(DesignMatrix(wide), y, lambda, NormSpec::l1(), tight);
    CHECK((m * a.beta - wide * b.beta).norm() / std::sqrt(20.0) <= 1e-8);
    CHECK(a.objective == Approx(b.objective).epsilon(1e-10));
  }
}

TEST_CASE("objective values and warm starts") {
  std::mt19937_64 rng(19);
  const Matrix m = oracles::gaussian_matrix(rng, 30, 8);
  const DesignMatrix x(m);
  const Vector y = oracles::gaussian_vector(rng, 30);
  const auto spec = NormSpec::l1();
  const double lambda = 0.1;
  // Capped runs: more iterations never give a worse objective.
  double previous = std::numeric_limits<double>::infinity();
  for (int cap : {1, 2, 5, 10, 20, 50, 100, 1000}) {
    SolveOptions o;
    o.max_iterations = cap;
    const auto fit = solve_penalized_ls(x, y, lambda, spec, o);
    CHECK(fit.objective <= previous + 1e-12);
    const Vector r = y - m * fit.beta;
    CHECK(fit.objective == Approx(r.squaredNorm() / 30 + 2 * lambda * fit.beta.lpNorm<1>()));
    previous = fit.objective;
  }
  SolveOptions one;
  one.max_iterations = 1;
  one.tolerance = 1e-14;
  CHECK_FALSE(solve_penalized_ls(x, y, lambda, spec, one).converged);

  const auto cold = solve_penalized_ls(x, y, lambda, spec);
  SolveOptions warm;
  warm.warm_start = cold.beta;
  const auto hot = solve_penalized_ls(x, y, lambda, spec, warm);
  CHECK(hot.iterations <= cold.iterations);
  CHECK((hot.beta - cold.beta).norm() <= 1e-7);

  CHECK_THROWS_AS(solve_penalized_ls(x, y, -1.0, spec), InvalidArgument);
  CHECK_THROWS_AS(solve_penalized_ls(x, Vector::Zero(3), 1.0, spec), DimensionError);
}

TEST_CASE("kkt residual") {
  std::mt19937_64 rng(23);
  const Matrix q = oracles::orthonormal_design(rng, 10, 3);
  const Vector y = oracles::gaussian_vector(rng, 10);
  const DesignMatrix x(q);
  const NormPenalty pen(NormSpec::l1());
  const Vector z = q.transpose() * y / 10.0;
  Vector exact(3);
  for (Eigen::Index j = 0; j < 3; ++j) exact(j) = soft(z(j), 0.2);
  CHECK(kkt_residual(x, y, 0.2, pen, exact) <= 1e-14);
  CHECK(kkt_residual(x, y, 0.2, pen, exact + 0.05 * Vector::Ones(3)) > 1e-3);
}

TEST_CASE("overlap penalty values") {
  const OverlapGroups disjoint({{0, 1}, {2}}, 3);
  Vector b(3);
  b << 3, 4, -2;
  CHECK(omega_overlap_eval(b, disjoint) == Approx(7.0).epsilon(1e-9));
  CHECK(disjoint.replication() == std::vector<int>{1, 1, 1});
  CHECK(disjoint.augmented_dimension() == 3);

  const OverlapGroups chain({{0, 1}, {1, 2}}, 3);
  CHECK(chain.replication() == std::vector<int>{1, 2, 1});
  CHECK(chain.augmented_dimension() == 4);
  CHECK(omega_overlap_eval(Vector::Unit(3, 0), chain) == Approx(1.0).epsilon(1e-9));
  std::vector<Vector> parts;
  CHECK(omega_overlap_eval(Vector::Unit(3, 1), chain, &parts) == Approx(1.0).epsilon(1e-9));
  CHECK((parts[0] + parts[1] - Vector::Unit(3, 1)).norm() <= 1e-12);
  // Splitting e_j as (c, 1 - c) costs |c| + |1 - c| >= 1.
  double best = 1e9;
  for (int i = 0; i <= 1000; ++i) {
    const double c = -0.5 + 2.0 * i / 1000;
    best = std::min(best, std::abs(c) + std::abs(1 - c));
  }
  CHECK(best == Approx(1.0));

  // General beta: the returned parts decompose beta and attain the value,
  // and no random decomposition does better.
  std::mt19937_64 rng(29);
  for (int k = 0; k < 100; ++k) {
    const Vector beta = oracles::gaussian_vector(rng, 3);
    const double value = omega_overlap_eval(beta, chain, &parts);
    CHECK((parts[0] + parts[1] - beta).norm() <= 1e-10);
    CHECK(parts[0](2) == 0.0);
    CHECK(parts[1](0) == 0.0);
    CHECK(parts[0].norm() + parts[1].norm() == Approx(value).epsilon(1e-7));
    for (int t = 0; t < 50; ++t) {
      std::normal_distribution<double> normal;
      const double c = normal(rng);
      Vector a = Vector::Zero(3);
      a << beta(0), c, 0;
      const Vector rest = beta - a;
      CHECK(value <= a.norm() + rest.norm() + 1e-9);
    }
  }
  CHECK_THROWS(OverlapGroups({{0}, {2}}, 3));
}

TEST_CASE("overlap estimator") {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 10; ++k) {
    const Matrix m = oracles::gaussian_matrix(rng, 24, 6);
    const DesignMatrix x(m);
    const Vector y = m * oracles::gaussian_vector(rng, 6) + oracles::gaussian_vector(rng, 24);
    const Groups blocks{{0, 1}, {2, 3, 4}, {5}};
    const double lambda = 0.05 + 0.05 * k;
    SolveOptions tight;
    tight.tolerance = 1e-11;
    const auto over = solve_overlap(x, y, lambda, OverlapGroups(blocks, 6), tight);
    const auto direct =
        solve_penalized_ls(x, y, lambda, WeightedGroupPenalty::unit(blocks), tight);
    CHECK(over.fit.objective == Approx(direct.objective).epsilon(1e-7));
    CHECK((m * over.fit.beta - m * direct.beta).norm() / std::sqrt(24.0) <= 1e-7);
    Vector sum = Vector::Zero(6);
    for (const auto& part : over.parts) sum += part;
    CHECK(sum == over.fit.beta);

    // One group of everything: unit-weight l2 penalty.
    const auto whole = solve_overlap(x, y, lambda, OverlapGroups({{0, 1, 2, 3, 4, 5}}, 6), tight);
    const auto l2 = solve_penalized_ls(x, y, lambda, WeightedGroupPenalty::unit({{0, 1, 2, 3, 4, 5}}),
                                       tight);
    CHECK((whole.fit.beta - l2.beta).norm() <= 1e-7);
    CHECK(whole.parts[0] == whole.fit.beta);

    // Overlapping chain, huge lambda: everything vanishes.
    const OverlapGroups chain({{0, 1, 2}, {2, 3, 4}, {4, 5}}, 6);
    const auto zero = solve_overlap(x, y, 1e6, chain);
    CHECK(zero.fit.beta == Vector::Zero(6));
    for (const auto& part : zero.parts) CHECK(part == Vector::Zero(6));

    // At the overlap optimum, the fitted objective uses the latent penalty,
    // which is at least the overlap norm of the combined beta.
    const auto fit = solve_overlap(x, y, lambda, chain, tight);
    double latent = 0.0;
    for (const auto& part : fit.parts) latent += part.norm();
    CHECK(omega_overlap_eval(fit.fit.beta, chain) <= latent + 1e-7);
    const Vector r = y - m * fit.fit.beta;
    CHECK(fit.fit.objective == Approx(r.squaredNorm() / 24 + 2 * lambda * latent).epsilon(1e-9));
  }
}
