#include "wdsparse/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace wdsparse {

DesignMatrix::DesignMatrix(Matrix entries) : x_(std::move(entries)) {
  if (x_.rows() < 1 || x_.cols() < 1) {
    throw DimensionError("design matrix must have at least one row and one column");
  }
  if (!x_.allFinite()) {
    throw InvalidArgument("design matrix contains non-finite entries");
  }
}

Vector DesignMatrix::apply(const Vector& beta) const {
  if (beta.size() != p()) {
    throw DimensionError("coefficient vector has length " + std::to_string(beta.size()) +
                         ", expected " + std::to_string(p()));
  }
  return x_ * beta;
}

Vector DesignMatrix::normalized_transpose_apply(const Vector& v) const {
  if (v.size() != n()) {
    throw DimensionError("vector has length " + std::to_string(v.size()) + ", expected " +
                         std::to_string(n()));
  }
  return x_.transpose() * v / static_cast<double>(n());
}

IndexSet::IndexSet(Eigen::Index universe, std::vector<Eigen::Index> zero_based)
    : universe_(universe), idx_(std::move(zero_based)) {
  if (universe_ < 0) throw InvalidArgument("index set universe must be nonnegative");
  std::sort(idx_.begin(), idx_.end());
  idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
  for (auto j : idx_) {
    if (j < 0 || j >= universe_) {
      throw InvalidArgument("index " + std::to_string(j + 1) + " out of range [1, " +
                            std::to_string(universe_) + "]");
    }
  }
}

IndexSet IndexSet::from_one_based(Eigen::Index universe, std::span<const long long> indices) {
  std::vector<Eigen::Index> zero;
  zero.reserve(indices.size());
  for (auto j : indices) {
    if (j < 1 || j > universe) {
      throw InvalidArgument("index " + std::to_string(j) + " out of range [1, " +
                            std::to_string(universe) + "]");
    }
    zero.push_back(static_cast<Eigen::Index>(j - 1));
  }
  return IndexSet(universe, std::move(zero));
}

IndexSet IndexSet::from_one_based(Eigen::Index universe, std::initializer_list<long long> indices) {
  return from_one_based(universe, std::span<const long long>(indices.begin(), indices.size()));
}

IndexSet IndexSet::all(Eigen::Index universe) { return range(universe, 0, universe); }

IndexSet IndexSet::range(Eigen::Index universe, Eigen::Index begin, Eigen::Index end) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = begin; j < end; ++j) idx.push_back(j);
  return IndexSet(universe, std::move(idx));
}

bool IndexSet::contains(Eigen::Index j) const {
  return std::binary_search(idx_.begin(), idx_.end(), j);
}

std::vector<long long> IndexSet::one_based() const {
  std::vector<long long> out;
  out.reserve(idx_.size());
  for (auto j : idx_) out.push_back(static_cast<long long>(j) + 1);
  return out;
}

IndexSet IndexSet::complement() const {
  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(universe_) - idx_.size());
  std::size_t k = 0;
  for (Eigen::Index j = 0; j < universe_; ++j) {
    if (k < idx_.size() && idx_[k] == j) {
      ++k;
    } else {
      out.push_back(j);
    }
  }
  return IndexSet(universe_, std::move(out));
}

IndexSet IndexSet::unite(const IndexSet& other) const {
  if (other.universe_ != universe_) throw DimensionError("index sets over different universes");
  std::vector<Eigen::Index> out;
  std::set_union(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                 std::back_inserter(out));
  return IndexSet(universe_, std::move(out));
}

bool IndexSet::is_subset_of(const IndexSet& other) const {
  return std::includes(other.idx_.begin(), other.idx_.end(), idx_.begin(), idx_.end());
}

bool IndexSet::intersects(const IndexSet& other) const {
  auto a = idx_.begin();
  auto b = other.idx_.begin();
  while (a != idx_.end() && b != other.idx_.end()) {
    if (*a == *b) return true;
    if (*a < *b) {
      ++a;
    } else {
      ++b;
    }
  }
  return false;
}

Vector IndexSet::gather(const Vector& v) const {
  if (v.size() != universe_) {
    throw DimensionError("vector has length " + std::to_string(v.size()) + ", index set expects " +
                         std::to_string(universe_));
  }
  Vector out(size());
  for (Eigen::Index k = 0; k < size(); ++k) out[k] = v[idx_[static_cast<std::size_t>(k)]];
  return out;
}

Vector IndexSet::scatter(const Vector& compact) const {
  if (compact.size() != size()) {
    throw DimensionError("compact vector has length " + std::to_string(compact.size()) +
                         ", index set has " + std::to_string(size()) + " elements");
  }
  Vector out = Vector::Zero(universe_);
  for (Eigen::Index k = 0; k < size(); ++k) out[idx_[static_cast<std::size_t>(k)]] = compact[k];
  return out;
}

Eigen::Index validate_partition(Groups& groups) {
  if (groups.empty()) throw InvalidArgument("partition has no groups");
  Eigen::Index p = 0;
  for (auto& g : groups) {
    if (g.empty()) throw InvalidArgument("partition contains an empty group");
    std::sort(g.begin(), g.end());
    p += static_cast<Eigen::Index>(g.size());
  }
  std::vector<int> seen(static_cast<std::size_t>(p), 0);
  for (const auto& g : groups) {
    for (auto j : g) {
      if (j < 0 || j >= p) {
        throw InvalidArgument("group index " + std::to_string(j + 1) +
                              " outside 1.." + std::to_string(p) + "; groups must partition 1..p");
      }
      if (seen[static_cast<std::size_t>(j)]++) {
        throw InvalidArgument("index " + std::to_string(j + 1) + " appears in more than one group");
      }
    }
  }
  return p;
}

void validate_cover(Groups& groups, Eigen::Index p) {
  if (groups.empty()) throw InvalidArgument("group cover has no groups");
  std::vector<int> seen(static_cast<std::size_t>(p), 0);
  for (auto& g : groups) {
    if (g.empty()) throw InvalidArgument("group cover contains an empty group");
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    for (auto j : g) {
      if (j < 0 || j >= p) {
        throw InvalidArgument("group index " + std::to_string(j + 1) + " outside 1.." +
                              std::to_string(p));
      }
      seen[static_cast<std::size_t>(j)] = 1;
    }
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!seen[static_cast<std::size_t>(j)]) {
      throw InvalidArgument("index " + std::to_string(j + 1) + " is not covered by any group");
    }
  }
}

Groups groups_from_one_based(const std::vector<std::vector<long long>>& groups) {
  Groups out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    std::vector<Eigen::Index> zero;
    for (auto j : g) {
      if (j < 1) throw InvalidArgument("group indices are 1-based; got " + std::to_string(j));
      zero.push_back(static_cast<Eigen::Index>(j - 1));
    }
    out.push_back(std::move(zero));
  }
  return out;
}

std::vector<std::vector<long long>> groups_to_one_based(const Groups& groups) {
  std::vector<std::vector<long long>> out;
  for (const auto& g : groups) {
    std::vector<long long> one;
    for (auto j : g) one.push_back(static_cast<long long>(j) + 1);
    out.push_back(std::move(one));
  }
  return out;
}

double compensated_dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionError("dot product of vectors with different lengths");
  double sum = 0.0;
  double carry = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double term = a[i] * b[i];
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      carry += (sum - t) + term;
    } else {
      carry += (term - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

double compensated_sum_squares(const Vector& v) { return compensated_dot(v, v); }

double normalized_norm(const Vector& v) {
  if (v.size() == 0) throw DimensionError("normalized norm of an empty vector");
  return std::sqrt(compensated_sum_squares(v) / static_cast<double>(v.size()));
}

Vector restrict(const Vector& beta, const IndexSet& set) {
  if (beta.size() != set.universe()) {
    throw DimensionError("vector has length " + std::to_string(beta.size()) +
                         ", index set expects " + std::to_string(set.universe()));
  }
  Vector out = Vector::Zero(beta.size());
  for (auto j : set.indices()) out[j] = beta[j];
  return out;
}

IndexSet support(const Vector& beta) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) idx.push_back(j);
  }
  return IndexSet(beta.size(), std::move(idx));
}

IndexSet support_above(const Vector& beta, double threshold) {
  if (!(threshold >= 0.0)) throw InvalidArgument("support threshold must be nonnegative");
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (std::abs(beta[j]) > threshold) idx.push_back(j);
  }
  return IndexSet(beta.size(), std::move(idx));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  cell = trim(cell);
  if (cell.empty()) throw ParseError("empty cell at row " + std::to_string(row) + ", column " +
                                         std::to_string(col), row, col);
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError("non-numeric cell '" + std::string(cell) + "' at row " + std::to_string(row) +
                         ", column " + std::to_string(col),
                     row, col);
  }
  if (!std::isfinite(value)) {
    throw ParseError("non-finite cell at row " + std::to_string(row) + ", column " +
                         std::to_string(col),
                     row, col);
  }
  return value;
}

std::vector<std::vector<double>> parse_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    std::size_t col = 0;
    while (true) {
      ++col;
      const auto comma = rest.find(',');
      row.push_back(parse_cell(rest.substr(0, comma), line_no, col));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("ragged row " + std::to_string(line_no) + ": " + std::to_string(row.size()) +
                           " cells, expected " + std::to_string(rows.front().size()),
                       line_no, row.size());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

DesignMatrix parse_matrix_csv(const std::string& text) {
  const auto rows = parse_rows(text);
  if (rows.empty()) throw ParseError("no rows in matrix", 0, 0);
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return DesignMatrix(std::move(x));
}

DesignMatrix load_matrix(const std::filesystem::path& path) {
  try {
    return parse_matrix_csv(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.row(), e.col());
  }
}

Vector parse_vector(const std::string& text) {
  const auto rows = parse_rows(text);
  if (rows.empty()) throw ParseError("empty vector", 0, 0);
  std::vector<double> values;
  if (rows.size() == 1) {
    values = rows.front();
  } else if (rows.front().size() == 1) {
    for (const auto& r : rows) values.push_back(r.front());
  } else {
    throw ParseError("vector must be a single row or a single column", 0, 0);
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Vector load_vector(const std::filesystem::path& path) {
  try {
    return parse_vector(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.row(), e.col());
  }
}

Vector draw_noise(const NoiseModel& model, Eigen::Index n) {
  if (!(model.sigma >= 0.0) || !std::isfinite(model.sigma)) {
    throw InvalidArgument("noise standard deviation must be finite and nonnegative");
  }
  if (n < 1) throw DimensionError("noise length must be positive");
  std::mt19937_64 engine(model.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector eps(n);
  for (Eigen::Index i = 0; i < n; ++i) eps[i] = model.sigma * normal(engine);
  return eps;
}

}  // namespace wdsparse
