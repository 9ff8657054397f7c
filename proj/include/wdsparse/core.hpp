#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wdsparse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error hierarchy. Every error carries a short machine-readable code that
// the command line layer prints next to the message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message) : Error("dimension", message) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message) : Error("invalid_argument", message) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t row, std::size_t col)
      : Error("parse", message), row_(row), col_(col) {}
  // 1-based location of the offending cell; 0 when not applicable.
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

/// The index set is not allowed (the norm is not weakly decomposable for
/// it). May carry a vector exhibiting the failure.
class NotAllowedError : public Error {
 public:
  explicit NotAllowedError(const std::string& message, Eigen::VectorXd counterexample = {})
      : Error("not_allowed", message), counterexample_(std::move(counterexample)) {}
  const Eigen::VectorXd& counterexample() const noexcept { return counterexample_; }

 private:
  Eigen::VectorXd counterexample_;
};

/// Dense n x p design matrix with all entries finite.
class DesignMatrix {
 public:
  explicit DesignMatrix(Matrix entries);

  Eigen::Index n() const noexcept { return x_.rows(); }
  Eigen::Index p() const noexcept { return x_.cols(); }
  const Matrix& matrix() const noexcept { return x_; }
  // 0-based column access.
  auto column(Eigen::Index j) const { return x_.col(j); }

  Vector apply(const Vector& beta) const;
  // X^T v / n, the gradient-noise map used throughout.
  Vector normalized_transpose_apply(const Vector& v) const;

 private:
  Matrix x_;
};

/// Sorted, duplicate-free subset of {0, ..., p-1}. Construction from user
/// input goes through from_one_based().
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(Eigen::Index universe, std::vector<Eigen::Index> zero_based);

  static IndexSet from_one_based(Eigen::Index universe, std::span<const long long> indices);
  static IndexSet from_one_based(Eigen::Index universe, std::initializer_list<long long> indices);
  static IndexSet all(Eigen::Index universe);
  static IndexSet empty(Eigen::Index universe) { return IndexSet(universe, {}); }
  static IndexSet range(Eigen::Index universe, Eigen::Index begin, Eigen::Index end);

  Eigen::Index universe() const noexcept { return universe_; }
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(idx_.size()); }
  bool is_empty() const noexcept { return idx_.empty(); }
  bool is_full() const noexcept { return size() == universe_; }
  bool contains(Eigen::Index j) const;
  const std::vector<Eigen::Index>& indices() const noexcept { return idx_; }
  std::vector<long long> one_based() const;

  IndexSet complement() const;
  IndexSet unite(const IndexSet& other) const;
  bool is_subset_of(const IndexSet& other) const;
  bool intersects(const IndexSet& other) const;

  // Entries of v at the indices of this set, in order.
  Vector gather(const Vector& v) const;
  // Inverse of gather: a universe-length vector, zero off the set.
  Vector scatter(const Vector& compact) const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  Eigen::Index universe_ = 0;
  std::vector<Eigen::Index> idx_;
};

/// A list of 0-based index groups.
using Groups = std::vector<std::vector<Eigen::Index>>;

/// Checks that groups are nonempty, disjoint and cover {0, ..., p-1}
/// where p is the total group size; sorts each group. Returns p.
Eigen::Index validate_partition(Groups& groups);
/// Checks that groups are nonempty subsets of {0, ..., p-1} whose union is
/// everything (overlaps allowed); sorts and dedups each group.
void validate_cover(Groups& groups, Eigen::Index p);
Groups groups_from_one_based(const std::vector<std::vector<long long>>& groups);
std::vector<std::vector<long long>> groups_to_one_based(const Groups& groups);

/// Neumaier-compensated sum of squares.
double compensated_sum_squares(const Vector& v);
/// Neumaier-compensated inner product.
double compensated_dot(const Vector& a, const Vector& b);

/// sqrt(v^T v / n).
double normalized_norm(const Vector& v);

/// beta_S: agrees with beta on S and is zero elsewhere.
Vector restrict(const Vector& beta, const IndexSet& set);

/// Exact nonzero pattern {j : beta_j != 0}.
IndexSet support(const Vector& beta);
/// {j : |beta_j| > threshold}.
IndexSet support_above(const Vector& beta, double threshold);

DesignMatrix parse_matrix_csv(const std::string& text);
DesignMatrix load_matrix(const std::filesystem::path& path);
/// A vector stored either as a single CSV column or a single CSV row.
Vector load_vector(const std::filesystem::path& path);
/// Comma-separated decimals, e.g. "3,-4".
Vector parse_vector(const std::string& text);

struct NoiseModel {
  double sigma = 1.0;
  std::uint64_t seed = 0;
};

/// sigma * N(0, I_n), reproducible from the seed.
Vector draw_noise(const NoiseModel& model, Eigen::Index n);

}  // namespace wdsparse
