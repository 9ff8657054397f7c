#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "wdsparse/eigenvalues.hpp"

using namespace wdsparse;
using doctest::Approx;

namespace {

DesignMatrix example_two(bool first) {
  Matrix x(2, 3);
  if (first) {
    x << 5.0 / 13, 0, 1,
         12.0 / 13, 1, 0;
  } else {
    x << 12.0 / 13, 0, 1,
         5.0 / 13, 1, 0;
  }
  return DesignMatrix(std::sqrt(2.0) * x);
}

IndexSet random_set(std::mt19937_64& rng, Eigen::Index p, Eigen::Index size) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) all[static_cast<std::size_t>(j)] = j;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(size));
  std::sort(all.begin(), all.end());
  return IndexSet(p, all);
}

void check_witness(const DesignMatrix& x, const IndexSet& set, double big_l, const NormSpec& omega,
                   const EigenvalueResult& r) {
  const auto residual = residual_norm(omega, set);
  REQUIRE(r.witness.size() == x.p());
  CHECK(norm_eval(omega, restrict(r.witness, set)) == Approx(1.0).epsilon(1e-8));
  CHECK(residual.eval(r.witness) <= big_l * (1 + 1e-8) + 1e-8);
  CHECK(std::abs(normalized_norm(x.apply(r.witness)) - r.upper_bound) <= 1e-8);
  CHECK(r.lower_bound <= r.upper_bound + 1e-12);
  if (r.certified) {
    CHECK(r.lower_bound == r.value);
    CHECK(r.upper_bound == r.value);
  }
}

}  // namespace

TEST_CASE("worked example with a positive eigenvalue") {
  const auto x = example_two(true);
  const auto s = IndexSet::from_one_based(3, {3});
  const auto r = l1_eigenvalue(x, s, 3.0);
  CHECK(r.certified);
  CHECK(std::abs(r.value - 2.0 / std::sqrt(26.0)) <= 1e-9);
  CHECK(compatibility(x, s, 3.0) == Approx(2.0 / 13).epsilon(1e-9));
  CHECK(effective_sparsity(x, s, 3.0, NormSpec::l1()) == Approx(6.5).epsilon(1e-9));
  check_witness(x, s, 3.0, NormSpec::l1(), r);
  // (5 - L) / sqrt(26) away from L = 0, where nothing offsets X_3, then 0.
  CHECK(l1_eigenvalue(x, s, 0.0).value == Approx(1.0).epsilon(1e-12));
  for (double big_l : {0.5, 1.0, 2.5, 4.0, 4.9, 5.0, 7.0}) {
    const auto e = l1_eigenvalue(x, s, big_l);
    CHECK(e.certified);
    CHECK(std::abs(e.value - std::max(5.0 - big_l, 0.0) / std::sqrt(26.0)) <= 1e-9);
  }
}

TEST_CASE("worked example with a zero eigenvalue") {
  const auto x = example_two(false);
  const auto s = IndexSet::from_one_based(3, {3});
  const auto r = l1_eigenvalue(x, s, 3.0);
  CHECK(r.value == 0.0);
  CHECK(r.upper_bound <= 1e-8);
  CHECK(std::isinf(effective_sparsity(x, s, 3.0, NormSpec::l1())));
  CHECK(compatibility(x, s, 3.0) == 0.0);
  // X_3 = X_{S^c} gamma with ||gamma||_1 <= L: X_3 lies in the hull.
  REQUIRE(r.witness.size() == 3);
  CHECK(std::abs(r.witness(2)) == Approx(1.0));
  CHECK((r.witness.head(2).lpNorm<1>()) <= 3.0 + 1e-9);
}

TEST_CASE("orthonormal designs") {
  std::mt19937_64 rng(101);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Index n = 8 + k % 5;
    const Eigen::Index p = 3 + k % 4;
    const DesignMatrix x(oracles::orthonormal_design(rng, n, p));
    const Eigen::Index size = 1 + k % 3;
    const auto s = random_set(rng, p, size);
    for (double big_l : {0.5, 2.0, 10.0}) {
      const auto r = l1_eigenvalue(x, s, big_l);
      CHECK(r.certified);
      CHECK(r.value * r.value == Approx(1.0 / static_cast<double>(size)).epsilon(1e-8));
      CHECK(compatibility(x, s, big_l) == Approx(1.0).epsilon(1e-8));
      CHECK(effective_sparsity(x, s, big_l, NormSpec::l1()) ==
            Approx(static_cast<double>(size)).epsilon(1e-8));
    }
  }
}

TEST_CASE("l1 eigenvalue against hull enumeration") {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> ls(0.1, 3.0);
  for (int k = 0; k < 40; ++k) {
    const Eigen::Index p = 3 + k % 2;
    const Eigen::Index n = 3 + k % 3;
    const Matrix m = oracles::gaussian_matrix(rng, n, p);
    const DesignMatrix x(m);
    const auto s = random_set(rng, p, 1 + k % 2);
    const double big_l = ls(rng);
    const auto r = l1_eigenvalue(x, s, big_l);
    const double exact = oracles::l1_eigenvalue_by_subsets(m, s.indices(), big_l);
    CHECK(r.certified);
    CHECK(std::abs(r.value - (exact < kZeroEigenvalue ? 0.0 : exact)) <= 1e-8);
    check_witness(x, s, big_l, NormSpec::l1(), r);
  }
}

TEST_CASE("general engine reproduces the l1 solver") {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> ls(0.2, 4.0);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Index p = 4 + k % 3;
    const DesignMatrix x(oracles::gaussian_matrix(rng, 10, p));
    const auto s = random_set(rng, p, 1 + k % 3);
    const double big_l = ls(rng);
    const auto direct = l1_eigenvalue(x, s, big_l);
    const auto general = omega_eigenvalue(x, s, big_l, NormSpec::l1(), residual_norm(NormSpec::l1(), s));
    CHECK(std::abs(direct.value - general.value) <= 1e-5);
    CHECK(general.lower_bound <= direct.value + 1e-9);
  }
}

TEST_CASE("monotone in L") {
  std::mt19937_64 rng(109);
  for (int k = 0; k < 10; ++k) {
    const DesignMatrix x(oracles::gaussian_matrix(rng, 8, 5));
    const auto s = random_set(rng, 5, 2);
    double previous = std::numeric_limits<double>::infinity();
    for (double big_l : {0.0, 0.3, 1.0, 2.0, 5.0, 20.0}) {
      const double v = l1_eigenvalue(x, s, big_l).value;
      CHECK(v <= previous + 1e-9);
      previous = v;
    }
  }
}

TEST_CASE("dependent columns in S") {
  std::mt19937_64 rng(113);
  Matrix m = oracles::gaussian_matrix(rng, 10, 5);
  m.col(3) = m.col(1);
  const DesignMatrix x(m);
  const auto s = IndexSet::from_one_based(5, {2, 4});
  const auto r = l1_eigenvalue(x, s, 1.0);
  CHECK(r.value == 0.0);
  CHECK(r.upper_bound <= 1e-8);
  CHECK(std::isinf(effective_sparsity(r.value)));
}

TEST_CASE("structured norms") {
  std::mt19937_64 rng(127);
  const auto group = NormSpec::group({{0, 1}, {2, 3}});
  const auto mono = NormSpec::cone(ConeSpec::monotone());
  const auto trivial = NormSpec::trivial_g(IndexSet::from_one_based(4, {1, 2}));
  for (int k = 0; k < 12; ++k) {
    const DesignMatrix x(oracles::gaussian_matrix(rng, 6, 4));
    const auto s = IndexSet::from_one_based(4, {1, 2});
    const double big_l = 0.5 + 0.5 * (k % 4);
    for (const auto* spec : {&group, &mono, &trivial}) {
      const auto r = omega_eigenvalue(x, s, big_l, *spec);
      check_witness(x, s, big_l, *spec, r);
      CHECK(r.certified);
      // Sampling the feasible set never beats the certified minimum.
      const double sampled = brute_force_eigenvalue(x, s, big_l, *spec, 200000, 5 + k);
      CHECK(sampled >= r.value - 1e-9);
      CHECK(sampled <= r.value + 0.05 * (1 + r.value));
      // Lower bound turns into the effective sparsity bound on random cone points.
      const auto residual = residual_norm(*spec, s);
      for (int q = 0; q < 50; ++q) {
        Vector beta = oracles::gaussian_vector(rng, 4);
        const double head = norm_eval(*spec, restrict(beta, s));
        const double tail = residual.eval(beta);
        if (tail > big_l * head) beta = restrict(beta, s) + (big_l * head / tail) * restrict(beta, s.complement());
        CHECK(norm_eval(*spec, restrict(beta, s)) * r.lower_bound <=
              normalized_norm(x.apply(beta)) * (1 + 1e-7) + 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(omega_eigenvalue(DesignMatrix(Matrix::Identity(4, 4)), IndexSet::from_one_based(4, {2}),
                                   1.0, group),
                  NotAllowedError);
}

TEST_CASE("closed forms for structured norms") {
  std::mt19937_64 rng(131);
  const DesignMatrix x(oracles::orthonormal_design(rng, 10, 5));
  // One group equal to S, orthonormal X, L = 0: sqrt(|S|) ||b|| = 1 forces
  // ||X b||_n = 1 / sqrt(|S|).
  const auto s = IndexSet::from_one_based(5, {1, 2, 3});
  const auto group = NormSpec::group({{0, 1, 2}, {3}, {4}});
  CHECK(omega_eigenvalue(x, s, 0.0, group).value == Approx(1 / std::sqrt(3.0)).epsilon(1e-8));
  // S everything: min ||X b||_n over Omega(b) = 1.
  const auto whole = IndexSet::all(5);
  CHECK(omega_eigenvalue(x, whole, 0.0, NormSpec::group({{0, 1, 2, 3, 4}})).value ==
        Approx(1 / std::sqrt(5.0)).epsilon(1e-8));
  CHECK(l1_eigenvalue(x, whole, 1.0).value == Approx(1 / std::sqrt(5.0)).epsilon(1e-8));
}

TEST_CASE("adaptive restricted eigenvalue") {
  std::mt19937_64 rng(137);
  for (int k = 0; k < 10; ++k) {
    const Matrix m = oracles::gaussian_matrix(rng, 12, 6);
    const DesignMatrix x(m);
    const auto s = random_set(rng, 6, 2 + k % 2);
    // L = 0: the minimum Rayleigh quotient over S, scaled by 1/|S|.
    Matrix xs(12, static_cast<Eigen::Index>(s.size()));
    for (std::size_t c = 0; c < s.size(); ++c) xs.col(static_cast<Eigen::Index>(c)) = m.col(s.indices()[c]);
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(xs.transpose() * xs / 12.0).eigenvalues()(0);
    const auto r0 = adaptive_restricted_eigenvalue(x, s, 0.0);
    CHECK(r0.value * r0.value == Approx(lmin / static_cast<double>(s.size())).epsilon(1e-8));
    Vector minimizer;
    CHECK(restricted_sphere_residual(x, s, Vector::Zero(6 - static_cast<Eigen::Index>(s.size())), &minimizer) ==
          Approx(lmin / static_cast<double>(s.size())).epsilon(1e-8));
    CHECK(minimizer.squaredNorm() == Approx(1.0 / static_cast<double>(s.size())));

    for (double big_l : {0.5, 2.0}) {
      const auto a = adaptive_restricted_eigenvalue(x, s, big_l);
      const auto l1 = l1_eigenvalue(x, s, big_l);
      CHECK(a.value <= l1.value + 1e-7);
      CHECK(a.lower_bound <= a.upper_bound + 1e-12);
    }
  }
  // Orthonormal: both equal 1 / sqrt(|S|).
  const DesignMatrix q(oracles::orthonormal_design(rng, 9, 5));
  const auto s = IndexSet::from_one_based(5, {1, 4});
  CHECK(adaptive_restricted_eigenvalue(q, s, 2.0).value == Approx(1 / std::sqrt(2.0)).epsilon(1e-7));
}

TEST_CASE("sampling oracle") {
  const auto x = example_two(true);
  const auto s = IndexSet::from_one_based(3, {3});
  const double sampled = brute_force_eigenvalue(x, s, 3.0, NormSpec::l1(), 1000000);
  CHECK(sampled >= 2 / std::sqrt(26.0) - 1e-9);
  CHECK(sampled <= 2 / std::sqrt(26.0) + 1e-3);
  const auto z = example_two(false);
  const double coarse = brute_force_eigenvalue(z, s, 3.0, NormSpec::l1(), 1000);
  const double fine = brute_force_eigenvalue(z, s, 3.0, NormSpec::l1(), 1000000);
  CHECK(fine <= coarse);
  CHECK(fine <= 1e-2);
  CHECK_THROWS(brute_force_eigenvalue(DesignMatrix(Matrix::Identity(5, 5)), IndexSet::from_one_based(5, {1}),
                                      1.0, NormSpec::l1(), 1000));
}
