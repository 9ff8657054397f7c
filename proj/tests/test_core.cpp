#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "wdsparse/core.hpp"

using namespace wdsparse;

TEST_CASE("normalized norm") {
  CHECK(normalized_norm(Vector::Zero(5)) == 0.0);
  CHECK(normalized_norm(Vector::Ones(4)) == doctest::Approx(1.0).epsilon(1e-15));
  // A column sqrt(n) * (1, 0) has unit normalized norm.
  Vector col(2);
  col << std::sqrt(2.0), 0.0;
  CHECK(normalized_norm(col) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(normalized_norm(Vector()), DimensionError);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 200; ++k) {
    Vector v(7);
    for (auto& e : v) e = normal(rng);
    const double c = 10.0 * normal(rng);
    CHECK(std::abs(normalized_norm(c * v) - std::abs(c) * normalized_norm(v)) <=
          1e-12 * std::abs(c) * normalized_norm(v));
  }
}

TEST_CASE("restrict and support") {
  Vector beta(3);
  beta << 1, 2, 3;
  const auto s = IndexSet::from_one_based(3, {1, 3});
  Vector expected(3);
  expected << 1, 0, 3;
  CHECK(restrict(beta, s) == expected);
  CHECK(restrict(beta, IndexSet::all(3)) == beta);
  CHECK(restrict(beta, IndexSet::empty(3)) == Vector::Zero(3));
  CHECK_THROWS_AS(IndexSet::from_one_based(3, {4}), InvalidArgument);
  CHECK_THROWS_AS(IndexSet::from_one_based(3, {0}), InvalidArgument);

  Vector b(3);
  b << 0, 5, 0;
  CHECK(support(b).one_based() == std::vector<long long>{2});
  CHECK(support(Vector::Zero(4)).is_empty());
  b << 1e-300, 0, 1;
  CHECK(support(b).one_based() == std::vector<long long>{1, 3});
  CHECK(support_above(b, 1e-12).one_based() == std::vector<long long>{3});

  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  for (int k = 0; k < 500; ++k) {
    Vector v(9);
    for (auto& e : v) e = normal(rng);
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < 9; ++j) {
      if (coin(rng)) idx.push_back(j);
    }
    const IndexSet set(9, idx);
    CHECK(restrict(restrict(v, set), set) == restrict(v, set));
    CHECK(restrict(v, set) + restrict(v, set.complement()) == v);
  }
}

TEST_CASE("index set algebra") {
  const auto a = IndexSet::from_one_based(5, {1, 2});
  const auto b = IndexSet::from_one_based(5, {2, 4});
  CHECK(a.unite(b).one_based() == std::vector<long long>{1, 2, 4});
  CHECK(a.complement().one_based() == std::vector<long long>{3, 4, 5});
  CHECK(a.intersects(b));
  CHECK_FALSE(a.is_subset_of(b));
  CHECK(IndexSet::from_one_based(5, {2}).is_subset_of(a));
  Vector v(5);
  v << 1, 2, 3, 4, 5;
  CHECK(b.scatter(b.gather(v)) == restrict(v, b));
}

TEST_CASE("csv parsing") {
  const auto x = parse_matrix_csv("1,2,3\n4,5,6\n");
  CHECK(x.n() == 2);
  CHECK(x.p() == 3);
  CHECK(x.matrix()(1, 2) == 6.0);
  // Round-trip of a value that needs all 17 digits.
  const auto y = parse_matrix_csv("0.39223227027636809\n");
  CHECK(y.matrix()(0, 0) == 0.39223227027636809);

  try {
    parse_matrix_csv("1,2\n3\n");
    FAIL("ragged rows accepted");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
  }
  try {
    parse_matrix_csv("1,2\n3,abc\n");
    FAIL("non-numeric cell accepted");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
    CHECK(e.col() == 2);
  }
  CHECK_THROWS_AS(parse_matrix_csv("1,inf\n"), ParseError);
  CHECK_THROWS_AS(load_matrix("/nonexistent/x.csv"), IoError);
  CHECK(parse_vector("3,-4") == (Vector(2) << 3, -4).finished());
}

TEST_CASE("design matrix validation") {
  CHECK_THROWS_AS(DesignMatrix{Matrix(0, 2)}, DimensionError);
  Matrix bad = Matrix::Ones(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(DesignMatrix{bad}, InvalidArgument);
  const DesignMatrix x(Matrix::Identity(2, 2) * 2.0);
  CHECK(x.normalized_transpose_apply(Vector::Ones(2)) == Vector::Ones(2));
  CHECK_THROWS_AS(x.apply(Vector::Ones(3)), DimensionError);
}

TEST_CASE("seeded noise") {
  const auto a = draw_noise({2.0, 42}, 100);
  const auto b = draw_noise({2.0, 42}, 100);
  CHECK(a == b);
  CHECK(draw_noise({0.0, 42}, 10) == Vector::Zero(10));
  CHECK(draw_noise({1.0, 43}, 100) != draw_noise({1.0, 42}, 100));
  CHECK_THROWS(draw_noise({-1.0, 1}, 3));
}

TEST_CASE("group validation") {
  Groups g = groups_from_one_based({{1, 2}, {3}});
  CHECK(validate_partition(g) == 3);
  Groups overlap = groups_from_one_based({{1, 2}, {2, 3}});
  CHECK_THROWS_AS(validate_partition(overlap), InvalidArgument);
  CHECK_NOTHROW(validate_cover(overlap, 3));
  Groups gap = groups_from_one_based({{1}, {3}});
  CHECK_THROWS_AS(validate_partition(gap), InvalidArgument);
  CHECK_THROWS_AS(validate_cover(gap, 3), InvalidArgument);
}
