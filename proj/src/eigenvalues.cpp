#include "wdsparse/eigenvalues.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include "wdsparse/detail/min_norm_point.hpp"
#include "wdsparse/detail/smooth_min.hpp"

namespace wdsparse {

namespace {

using detail::Atom;
using detail::MinNormPointOptions;
using detail::MinNormPointResult;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Node solves use a looser iteration cap: their bounds stay valid either way.
constexpr int kNodeIterations = 400;
constexpr int kDescentSteps = 8;
constexpr long long kBruteForceBudget = 10'000'000;

void check_query(const DesignMatrix& x, const IndexSet& set, double big_l) {
  if (set.universe() != x.p()) {
    throw DimensionError("index set universe " + std::to_string(set.universe()) +
                         " does not match p = " + std::to_string(x.p()));
  }
  if (set.is_empty()) throw InvalidArgument("eigenvalue needs a nonempty set S");
  if (!(big_l >= 0.0) || !std::isfinite(big_l)) throw InvalidArgument("L must be finite and >= 0");
}

Matrix gather_columns(const Matrix& m, const IndexSet& set) {
  Matrix out(m.rows(), set.size());
  for (Eigen::Index k = 0; k < set.size(); ++k) {
    out.col(k) = m.col(set.indices()[static_cast<std::size_t>(k)]);
  }
  return out;
}

// The eigenvalue as the distance from the origin to
//   { X theta / sqrt(n) : theta_S in C, Omega^{S^c}(theta_{S^c}) <= L }
// for convex pieces C of the S-sphere's cone. Payloads are (theta_S, theta_{S^c})
// in compressed coordinates.
class DistanceProblem {
 public:
  DistanceProblem(const DesignMatrix& x, const IndexSet& set, double big_l, const NormSpec& omega,
                  const ResidualNorm& residual)
      : set_(set), omega_(omega), residual_(residual), big_l_(big_l) {
    const double root_n = std::sqrt(static_cast<double>(x.n()));
    xs_ = gather_columns(x.matrix(), set) / root_n;
    xc_ = gather_columns(x.matrix(), residual.complement) / root_n;
    s_ = set.size();
    m_ = residual.complement.size();
  }

  Eigen::Index s() const { return s_; }

  double omega_s(const Vector& u) const { return norm_eval(omega_, set_.scatter(u)); }

  Vector theta(const Vector& payload) const {
    return set_.scatter(payload.head(s_)) + residual_.complement.scatter(payload.tail(m_));
  }

  // Cell relaxation: theta_S ranges over the convex hull of the columns of v.
  MinNormPointResult solve_cell(const Matrix& v) const {
    const Matrix images = xs_ * v;
    auto oracle = [&](const Vector& d) {
      Eigen::Index best = 0;
      (images.transpose() * d).minCoeff(&best);
      return combine(images.col(best), v.col(best), d);
    };
    return detail::min_norm_point(oracle, combine(images.col(0), v.col(0), Vector()),
                                  node_options());
  }

  // theta_S fixed at b.
  MinNormPointResult solve_fixed(const Vector& b) const {
    const Vector image = xs_ * b;
    auto oracle = [&](const Vector& d) { return combine(image, b, d); };
    return detail::min_norm_point(oracle, combine(image, b, Vector()), node_options());
  }

  // Gradient of the fixed-b distance with respect to b, from its solution.
  Vector distance_gradient(const MinNormPointResult& r) const {
    if (r.distance == 0.0) return Vector::Zero(s_);
    return xs_.transpose() * r.point / r.distance;
  }

 private:
  static MinNormPointOptions node_options() {
    MinNormPointOptions o;
    o.max_iterations = kNodeIterations;
    return o;
  }

  // S-part atom plus the residual-ball point minimizing d^T X_{S^c} gamma.
  // An empty d selects gamma = 0.
  Atom combine(const Vector& image, const Vector& u, const Vector& d) const {
    Vector gamma = Vector::Zero(m_);
    if (m_ > 0 && big_l_ > 0.0 && d.size() > 0) {
      const Vector c = xc_.transpose() * d;
      gamma = -big_l_ * dual_maximizer(residual_.norm, c);
    }
    Atom a;
    a.point = image + xc_ * gamma;
    a.payload.resize(s_ + m_);
    a.payload << u, gamma;
    return a;
  }

  IndexSet set_;
  const NormSpec& omega_;
  const ResidualNorm& residual_;
  double big_l_;
  Matrix xs_;
  Matrix xc_;
  Eigen::Index s_ = 0;
  Eigen::Index m_ = 0;
};

struct Incumbent {
  double value = kInf;
  Vector witness;

  void offer(double v, const Vector& theta) {
    if (v < value) {
      value = v;
      witness = theta;
    }
  }
};

// Upper bound from a direction u of the S-sphere's cone.
void offer_direction(const DistanceProblem& prob, const Vector& u, Incumbent& best) {
  const double scale = prob.omega_s(u);
  if (!(scale > 0.0)) return;
  const Vector b = u / scale;
  const auto r = prob.solve_fixed(b);
  best.offer(r.distance, prob.theta(r.payload));
}

// Multistart descent on b -> dist(b) along the S-sphere, retracting by
// rescaling to Omega(b_S) = 1.
void multistart(const DistanceProblem& prob, const EigenvalueOptions& options, Incumbent& best) {
  const auto s = prob.s();
  for (int r = 0; r < options.restarts; ++r) {
    std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(r));
    std::normal_distribution<double> normal;
    Vector b(s);
    for (Eigen::Index k = 0; k < s; ++k) b[k] = normal(rng);
    const double scale = prob.omega_s(b);
    if (!(scale > 0.0)) continue;
    b /= scale;
    auto current = prob.solve_fixed(b);
    best.offer(current.distance, prob.theta(current.payload));
    double eta = 0.5;
    for (int step = 0; step < kDescentSteps && current.distance > kZeroEigenvalue; ++step) {
      const Vector g = prob.distance_gradient(current);
      const double gn = g.norm();
      if (gn == 0.0) break;
      Vector trial = b - eta * (b.norm() / gn) * g;
      const double ts = prob.omega_s(trial);
      if (!(ts > 0.0)) {
        eta *= 0.25;
        continue;
      }
      trial /= ts;
      auto next = prob.solve_fixed(trial);
      if (next.distance < current.distance) {
        b = trial;
        current = std::move(next);
        best.offer(current.distance, prob.theta(current.payload));
        eta *= 1.5;
      } else {
        eta *= 0.25;
      }
    }
  }
}

struct Cell {
  Matrix vertices;
  double lower = 0.0;
};

struct CellOrder {
  bool operator()(const Cell& a, const Cell& b) const { return a.lower > b.lower; }
};

EigenvalueResult finish(Incumbent& best, double lower, bool certified, long nodes) {
  EigenvalueResult out;
  out.witness = best.witness;
  out.upper_bound = best.value;
  out.lower_bound = std::min(std::max(0.0, lower), best.value);
  out.certified = certified;
  out.nodes = nodes;
  if (certified) out.lower_bound = out.upper_bound;
  out.value = out.upper_bound;
  if (out.value < kZeroEigenvalue) {
    out.value = 0.0;
    out.upper_bound = 0.0;
    if (certified) out.lower_bound = 0.0;
  }
  return out;
}

// Branch and bound over simplicial cells of the S-sphere, starting from the
// sign orthants (first sign fixed by symmetry theta -> -theta).
EigenvalueResult branch_and_bound(const DistanceProblem& prob, const EigenvalueOptions& options,
                                  Incumbent& best) {
  const auto s = prob.s();
  std::priority_queue<Cell, std::vector<Cell>, CellOrder> open;
  long nodes = 0;
  const double tol = options.gap_tolerance;

  auto process = [&](Matrix vertices) {
    ++nodes;
    const auto r = prob.solve_cell(vertices);
    const Vector u = r.payload.head(s);
    const double scale = prob.omega_s(u);
    if (std::abs(scale - 1.0) <= 1e-14) {
      best.offer(r.distance, prob.theta(r.payload));
    } else if (r.lower_bound < best.value - tol) {
      offer_direction(prob, u, best);
    }
    if (r.lower_bound < best.value - tol) open.push(Cell{std::move(vertices), r.lower_bound});
  };

  Vector unit_scale(s);
  for (Eigen::Index k = 0; k < s; ++k) {
    unit_scale[k] = 1.0 / prob.omega_s(Vector::Unit(s, k));
  }
  const std::uint64_t patterns = std::uint64_t{1} << (s - 1);
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    Matrix v = Matrix::Zero(s, s);
    for (Eigen::Index k = 0; k < s; ++k) {
      const bool negative = k > 0 && ((mask >> (k - 1)) & 1U);
      v(k, k) = negative ? -unit_scale[k] : unit_scale[k];
    }
    process(std::move(v));
  }

  while (!open.empty()) {
    if (open.top().lower >= best.value - tol) break;
    if (nodes >= options.node_budget) break;
    Cell cell = open.top();
    open.pop();
    Eigen::Index ea = 0;
    Eigen::Index eb = 1;
    double longest = -1.0;
    for (Eigen::Index a = 0; a < s; ++a) {
      for (Eigen::Index b = a + 1; b < s; ++b) {
        const double len = (cell.vertices.col(a) - cell.vertices.col(b)).norm();
        if (len > longest) {
          longest = len;
          ea = a;
          eb = b;
        }
      }
    }
    if (longest <= 1e-12) continue;  // cannot refine further; bound kept below
    Vector mid = 0.5 * (cell.vertices.col(ea) + cell.vertices.col(eb));
    mid /= prob.omega_s(mid);
    Matrix left = cell.vertices;
    left.col(ea) = mid;
    Matrix right = cell.vertices;
    right.col(eb) = mid;
    process(std::move(left));
    process(std::move(right));
  }

  const double open_lower = open.empty() ? best.value : open.top().lower;
  const double lower = std::min(open_lower, best.value);
  const bool certified = best.value - lower <= tol;
  return finish(best, lower, certified, nodes);
}

bool l1_sphere(const NormSpec& omega) {
  return omega.family() == NormFamily::L1 ||
         (omega.family() == NormFamily::Cone && omega.cone_spec().kind() == ConeKind::FullOrthant);
}

Vector project_l1_ball(const Vector& v, double radius) {
  if (radius <= 0.0) return Vector::Zero(v.size());
  if (v.lpNorm<1>() <= radius) return v;
  const Vector mag = detail::project_simplex(v.cwiseAbs() / radius) * radius;
  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) out[j] = std::copysign(mag[j], v[j]);
  return out;
}

}  // namespace

EigenvalueResult omega_eigenvalue(const DesignMatrix& x, const IndexSet& set, double big_l,
                                  const NormSpec& omega, const ResidualNorm& residual,
                                  const EigenvalueOptions& options) {
  check_query(x, set, big_l);
  omega.check_dimension(x.p());
  DistanceProblem prob(x, set, big_l, omega, residual);
  Incumbent best;
  const bool enumerate = set.size() <= options.orthant_cap;
  if (!l1_sphere(omega) || !enumerate) multistart(prob, options, best);
  if (!enumerate) return finish(best, 0.0, false, 0);
  return branch_and_bound(prob, options, best);
}

EigenvalueResult omega_eigenvalue(const DesignMatrix& x, const IndexSet& set, double big_l,
                                  const NormSpec& omega, const EigenvalueOptions& options) {
  check_query(x, set, big_l);
  return omega_eigenvalue(x, set, big_l, omega, residual_norm(omega, set), options);
}

EigenvalueResult l1_eigenvalue(const DesignMatrix& x, const IndexSet& set, double big_l,
                               const EigenvalueOptions& options) {
  return omega_eigenvalue(x, set, big_l, NormSpec::l1(), options);
}

double compatibility(const DesignMatrix& x, const IndexSet& set, double big_l,
                     const EigenvalueOptions& options) {
  const auto r = l1_eigenvalue(x, set, big_l, options);
  return static_cast<double>(set.size()) * r.value * r.value;
}

double effective_sparsity(double delta) {
  if (delta < kZeroEigenvalue) return kInf;
  return 1.0 / (delta * delta);
}

double effective_sparsity(const DesignMatrix& x, const IndexSet& set, double big_l,
                          const NormSpec& omega, const EigenvalueOptions& options) {
  return effective_sparsity(omega_eigenvalue(x, set, big_l, omega, options).value);
}

double restricted_sphere_residual(const DesignMatrix& x, const IndexSet& set,
                                  const Vector& gamma, Vector* minimizer) {
  const IndexSet rest = set.complement();
  if (gamma.size() != rest.size()) throw DimensionError("gamma must have length p - |S|");
  const double n = static_cast<double>(x.n());
  const Matrix xs = gather_columns(x.matrix(), set);
  const Vector c = gather_columns(x.matrix(), rest) * gamma;
  const Matrix a = xs.transpose() * xs / n;
  const Vector h = xs.transpose() * c / n;
  const double rho2 = 1.0 / static_cast<double>(set.size());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  const Vector lam = eig.eigenvalues();
  const Matrix& q = eig.eigenvectors();
  const Vector ht = q.transpose() * h;
  const double lam1 = lam[0];
  const double spread = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double tie = 1e-12 * spread;

  Vector bt(lam.size());
  double head_mass = 0.0;  // |h~| on the bottom eigenspace
  double tail_norm2 = 0.0;  // ||b||^2 at mu = lam1 from the other components
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] - lam1 <= tie) {
      head_mass += ht[i] * ht[i];
    } else {
      tail_norm2 += std::pow(ht[i] / (lam[i] - lam1), 2);
    }
  }
  const double hn = h.norm();
  if (head_mass <= std::pow(1e-14 * std::max(1.0, hn), 2) && tail_norm2 <= rho2) {
    // Hard case: mu = lambda_min, fill the bottom eigenspace.
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      bt[i] = lam[i] - lam1 <= tie ? 0.0 : ht[i] / (lam[i] - lam1);
    }
    bt[0] += std::sqrt(std::max(0.0, rho2 - tail_norm2));
  } else {
    auto norm2 = [&](double mu) {
      double total = 0.0;
      for (Eigen::Index i = 0; i < lam.size(); ++i) total += std::pow(ht[i] / (lam[i] - mu), 2);
      return total;
    };
    // ||b(mu)|| increases on (-inf, lam1); at lo it is at most rho.
    double lo = lam1 - hn / std::sqrt(rho2);
    double hi = lam1;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (norm2(mid) > rho2) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    const double mu = lo;
    for (Eigen::Index i = 0; i < lam.size(); ++i) bt[i] = ht[i] / (lam[i] - mu);
    const double bn = bt.norm();
    if (bn > 0.0) bt *= std::sqrt(rho2) / bn;
  }
  const Vector b = q * bt;
  if (minimizer) *minimizer = b;
  const Vector r = xs * b - c;
  return compensated_sum_squares(r) / n;
}

EigenvalueResult adaptive_restricted_eigenvalue(const DesignMatrix& x, const IndexSet& set,
                                                double big_l, const EigenvalueOptions& options) {
  check_query(x, set, big_l);
  const NormSpec omega = NormSpec::trivial_g(set);
  const ResidualNorm residual = residual_norm(omega, set);
  EigenvalueResult bb = omega_eigenvalue(x, set, big_l, omega, residual, options);

  // Projected gradient on gamma -> R^2(gamma) over the l1 ball, with the
  // sphere-constrained inner problem solved exactly.
  const IndexSet rest = set.complement();
  const auto m = rest.size();
  const double n = static_cast<double>(x.n());
  const Matrix xc = gather_columns(x.matrix(), rest);
  const Matrix xs = gather_columns(x.matrix(), set);
  double best_value = bb.upper_bound * bb.upper_bound;
  Vector best_witness = bb.witness;
  for (int r = 0; r < options.restarts; ++r) {
    Vector gamma = Vector::Zero(m);
    if (r > 0 && m > 0) {
      std::mt19937_64 rng(options.seed + 7919 * static_cast<std::uint64_t>(r));
      std::normal_distribution<double> normal;
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (Eigen::Index k = 0; k < m; ++k) gamma[k] = normal(rng);
      const double l1 = gamma.lpNorm<1>();
      if (l1 > 0.0) gamma *= big_l * unit(rng) / l1;
    }
    Vector b;
    double f = restricted_sphere_residual(x, set, gamma, &b);
    double step = n / std::max(1e-300, 2.0 * xc.squaredNorm());
    for (int it = 0; it < 200 && m > 0 && big_l > 0.0; ++it) {
      const Vector grad = -2.0 * xc.transpose() * (xs * b - xc * gamma) / n;
      bool moved = false;
      for (int k = 0; k < 40; ++k) {
        const Vector trial = project_l1_ball(gamma - step * grad, big_l);
        Vector tb;
        const double ft = restricted_sphere_residual(x, set, trial, &tb);
        const Vector d = trial - gamma;
        if (ft <= f + grad.dot(d) + d.squaredNorm() / (2.0 * step)) {
          moved = d.norm() > 1e-15 * std::max(1.0, gamma.norm());
          const bool improved = ft < f;
          gamma = trial;
          b = tb;
          f = ft;
          step *= improved ? 1.5 : 1.0;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    if (f < best_value) {
      best_value = f;
      best_witness = set.scatter(b) - rest.scatter(gamma);
    }
  }
  const double upper = std::sqrt(std::max(0.0, best_value));
  EigenvalueResult out = bb;
  if (upper < bb.upper_bound) {
    out.upper_bound = upper;
    out.witness = best_witness;
    out.value = upper < kZeroEigenvalue ? 0.0 : upper;
    if (out.value == 0.0) out.upper_bound = 0.0;
    out.lower_bound = std::min(out.lower_bound, out.upper_bound);
    out.certified = out.upper_bound - out.lower_bound <= options.gap_tolerance;
    if (out.certified) out.lower_bound = out.upper_bound;
  }
  return out;
}

double brute_force_eigenvalue(const DesignMatrix& x, const IndexSet& set, double big_l,
                              const NormSpec& omega, long long samples, std::uint64_t seed) {
  check_query(x, set, big_l);
  if (x.p() > 4) throw InvalidArgument("brute-force eigenvalue is limited to p <= 4");
  if (samples < 1) throw InvalidArgument("sample count must be positive");
  if (samples > kBruteForceBudget) throw InvalidArgument("resolution budget exceeded");
  const ResidualNorm residual = residual_norm(omega, set);
  const auto s = set.size();
  const auto m = residual.complement.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double best = kInf;
  const Matrix& xm = x.matrix();
  for (long long k = 0; k < samples; ++k) {
    Vector u(s);
    for (Eigen::Index i = 0; i < s; ++i) u[i] = normal(rng);
    Vector theta = set.scatter(u);
    const double scale = norm_eval(omega, theta);
    if (!(scale > 0.0)) continue;
    theta /= scale;
    if (m > 0 && big_l > 0.0) {
      Vector g(m);
      for (Eigen::Index i = 0; i < m; ++i) g[i] = normal(rng);
      const double gn = norm_eval(residual.norm, g);
      if (gn > 0.0) {
        // Half of the samples on the boundary, where the minimum usually sits.
        const double radius = (k % 2 == 0)
                                  ? big_l
                                  : big_l * std::pow(unit(rng), 1.0 / static_cast<double>(m));
        theta += residual.complement.scatter(g * (radius / gn));
      }
    }
    best = std::min(best, normalized_norm(xm * theta));
  }
  return best;
}

}  // namespace wdsparse
