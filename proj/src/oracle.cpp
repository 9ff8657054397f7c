#include "wdsparse/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <thread>

#include "wdsparse/json_io.hpp"

namespace wdsparse {

namespace {

constexpr std::uint64_t kDesignSeedMix = 0x9E3779B97F4A7C15ULL;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double squared_prediction(const DesignMatrix& x, const Vector& d) {
  return compensated_sum_squares(x.matrix() * d) / static_cast<double>(x.n());
}

double choose_lambda(const LambdaRule& rule, double lambda_sc) {
  if (rule.kind == LambdaRule::Kind::Fixed) return rule.value;
  return rule.value * lambda_sc + rule.offset;
}

struct Prepared {
  DesignMatrix x;
  Vector beta;
  IndexSet set;
  ResidualNorm residual;
  double approximation_error = 0.0;
};

ReplicateRecord run_replicate(const ExperimentConfig& config, const Prepared& prep, int index) {
  ReplicateRecord rec;
  rec.index = index;
  rec.noise_seed = config.seed + static_cast<std::uint64_t>(index);
  const auto& x = prep.x;
  const Vector eps = draw_noise(NoiseModel{config.sigma, rec.noise_seed}, x.n());
  const Vector y = x.matrix() * config.beta0 + eps;
  const Vector w = x.normalized_transpose_apply(eps);
  rec.lambda_s = dual_norm_eval(config.norm, restrict(w, prep.set));
  rec.lambda_sc = prep.residual.dual(w);
  rec.lambda = choose_lambda(config.lambda, rec.lambda_sc);
  rec.approximation_error = prep.approximation_error;
  for (double* f : {&rec.stretch, &rec.delta_lower, &rec.delta_upper, &rec.gamma2,
                    &rec.prediction_error, &rec.residual_norm_term, &rec.omega_term, &rec.lhs,
                    &rec.estimation_term, &rec.rhs, &rec.slack, &rec.kkt_residual}) {
    *f = kNaN;
  }
  if (!(rec.lambda > rec.lambda_sc)) {
    rec.status = ReplicateStatus::Inapplicable;
    rec.note = "lambda <= lambda^{S^c}";
    return rec;
  }
  const double d = config.delta_slack;
  rec.stretch = stretch_factor(rec.lambda, rec.lambda_s, rec.lambda_sc, d);

  bool gamma_known = true;
  if (prep.set.is_empty()) {
    // No theta_S with Omega(theta_S) = 1: the eigenvalue is +inf.
    rec.delta_lower = rec.delta_upper = kInf;
    rec.delta_certified = true;
    rec.gamma2 = 0.0;
  } else {
    const auto eig =
        omega_eigenvalue(x, prep.set, rec.stretch, config.norm, prep.residual, config.eigen);
    rec.delta_lower = eig.lower_bound;
    rec.delta_upper = eig.upper_bound;
    rec.delta_certified = eig.certified;
    if (eig.certified) {
      rec.gamma2 = effective_sparsity(eig.value);
    } else if (eig.lower_bound >= kZeroEigenvalue) {
      rec.gamma2 = 1.0 / (eig.lower_bound * eig.lower_bound);
    } else {
      gamma_known = false;
      rec.gamma2 = kInf;
    }
  }

  const auto fit = solve_penalized_ls(x, y, rec.lambda, config.norm, config.solve);
  rec.fit_converged = fit.converged;
  rec.kkt_residual = fit.kkt_residual;
  rec.prediction_error = squared_prediction(x, fit.beta - config.beta0);
  rec.residual_norm_term = prep.residual.eval(fit.beta);
  rec.omega_term = norm_eval(config.norm, restrict(fit.beta, prep.set) - prep.beta);
  rec.lhs = rec.prediction_error + d * (rec.lambda - rec.lambda_sc) * rec.residual_norm_term +
            d * (rec.lambda + rec.lambda_s) * rec.omega_term;
  const double factor = (1.0 + d) * (rec.lambda + rec.lambda_s);
  rec.estimation_term = rec.gamma2 == 0.0 ? 0.0 : factor * factor * rec.gamma2;
  rec.rhs = rec.approximation_error + rec.estimation_term;
  rec.slack = rec.rhs - rec.lhs;

  if (!gamma_known) {
    rec.status = ReplicateStatus::Unverifiable;
    rec.note = "no positive lower bound on the eigenvalue";
  } else if (!fit.converged) {
    rec.status = ReplicateStatus::Unverifiable;
    rec.note = "solver did not reach the KKT tolerance";
  } else if (rec.slack >= -kSlackTolerance) {
    rec.status = ReplicateStatus::Pass;
    if (std::isinf(rec.gamma2)) rec.note = "eigenvalue is zero: bound is vacuous";
  } else {
    rec.status = ReplicateStatus::Fail;
  }
  return rec;
}

}  // namespace

std::string to_string(ReplicateStatus status) {
  switch (status) {
    case ReplicateStatus::Pass:
      return "pass";
    case ReplicateStatus::Fail:
      return "fail";
    case ReplicateStatus::Inapplicable:
      return "inapplicable";
    case ReplicateStatus::Unverifiable:
      return "unverifiable";
  }
  return "unknown";
}

std::string to_string(Ordering ordering) {
  switch (ordering) {
    case Ordering::Holds:
      return "holds";
    case Ordering::Violated:
      return "violated";
    case Ordering::Undetermined:
      return "undetermined";
    case Ordering::Skipped:
      return "skipped";
  }
  return "unknown";
}

NoiseLambdas empirical_lambdas(const DesignMatrix& x, const Vector& eps, const IndexSet& set,
                               const NormSpec& omega) {
  const auto residual = residual_norm(omega, set);
  const Vector w = x.normalized_transpose_apply(eps);
  return {dual_norm_eval(omega, restrict(w, set)), residual.dual(w)};
}

double stretch_factor(double lambda, double lambda_s, double lambda_sc, double delta_slack) {
  if (!(delta_slack >= 0.0 && delta_slack < 1.0)) {
    throw InvalidArgument("slack parameter must lie in [0, 1)");
  }
  if (!(lambda > lambda_sc)) throw InapplicableError("lambda must exceed lambda^{S^c}");
  return ((lambda + lambda_s) / (lambda - lambda_sc)) * ((1.0 + delta_slack) / (1.0 - delta_slack));
}

DesignMatrix build_design(const ExperimentConfig& config) {
  if (config.design) return *config.design;
  const auto& s = config.synthetic;
  Matrix sigma(s.p, s.p);
  for (Eigen::Index j = 0; j < s.p; ++j) {
    for (Eigen::Index k = 0; k < s.p; ++k) {
      sigma(j, k) = std::pow(s.rho, static_cast<double>(std::abs(j - k)));
    }
  }
  const Matrix chol = sigma.llt().matrixL();
  std::mt19937_64 rng(config.seed ^ kDesignSeedMix);
  std::normal_distribution<double> normal;
  Matrix z(s.n, s.p);
  for (Eigen::Index i = 0; i < s.n; ++i) {
    for (Eigen::Index j = 0; j < s.p; ++j) z(i, j) = normal(rng);
  }
  return DesignMatrix(z * chol.transpose());
}

OracleSummary summarize(const std::vector<ReplicateRecord>& records) {
  OracleSummary s;
  s.replicates = static_cast<int>(records.size());
  std::vector<double> slacks;
  for (const auto& r : records) {
    switch (r.status) {
      case ReplicateStatus::Pass:
        ++s.passed;
        slacks.push_back(r.slack);
        break;
      case ReplicateStatus::Fail:
        ++s.failed;
        slacks.push_back(r.slack);
        break;
      case ReplicateStatus::Unverifiable:
        ++s.unverifiable;
        break;
      case ReplicateStatus::Inapplicable:
        ++s.inapplicable;
        break;
    }
  }
  s.applicability_rate =
      s.replicates == 0 ? 0.0
                        : static_cast<double>(s.replicates - s.inapplicable) / s.replicates;
  if (slacks.empty()) {
    s.min_slack = s.median_slack = kNaN;
  } else {
    std::sort(slacks.begin(), slacks.end());
    s.min_slack = slacks.front();
    const auto m = slacks.size();
    s.median_slack = m % 2 == 1 ? slacks[m / 2] : 0.5 * (slacks[m / 2 - 1] + slacks[m / 2]);
    if (std::isnan(s.median_slack)) s.median_slack = slacks[m / 2];  // inf + inf midpoints
  }
  return s;
}

OracleReport oracle_check(const ExperimentConfig& config) {
  Prepared prep{build_design(config), {}, {}, {}, 0.0};
  const auto p = prep.x.p();
  if (config.beta0.size() != p) throw DimensionError("beta0 must have length p");
  config.norm.check_dimension(p);
  prep.beta = config.beta.value_or(config.beta0);
  if (prep.beta.size() != p) throw DimensionError("beta must have length p");
  const IndexSet supp = support(prep.beta);
  prep.set = config.set.value_or(smallest_allowed_superset(config.norm, supp));
  if (prep.set.universe() != p) throw DimensionError("set universe must equal p");
  if (!supp.is_subset_of(prep.set)) throw InvalidArgument("set must contain the support of beta");
  prep.residual = residual_norm(config.norm, prep.set);
  prep.approximation_error = squared_prediction(prep.x, prep.beta - config.beta0);

  OracleReport report;
  report.set = prep.set;
  report.replicates.resize(static_cast<std::size_t>(config.replicates));
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, config.replicates);
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  auto work = [&](int slot) {
    try {
      for (int r = next++; r < config.replicates; r = next++) {
        report.replicates[static_cast<std::size_t>(r)] = run_replicate(config, prep, r);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(slot)] = std::current_exception();
      next = config.replicates;
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  report.summary = summarize(report.replicates);
  return report;
}

std::filesystem::path summary_path_for(const std::filesystem::path& report_path) {
  auto out = report_path;
  out.replace_extension(".summary.csv");
  return out;
}

OracleReport run_experiment(const ExperimentConfig& config,
                            const std::filesystem::path& report_path) {
  auto report = oracle_check(config);
  {
    std::ofstream out(report_path);
    if (!out) throw IoError(report_path.string() + ": cannot open for writing");
    for (const auto& r : report.replicates) out << replicate_to_json(r).dump() << '\n';
    if (!out) throw IoError(report_path.string() + ": write failed");
  }
  const auto summary_path = summary_path_for(report_path);
  std::ofstream out(summary_path);
  if (!out) throw IoError(summary_path.string() + ": cannot open for writing");
  write_summary_csv(out, report.summary);
  if (!out) throw IoError(summary_path.string() + ": write failed");
  return report;
}

ComparisonRecord comparison_check(const DesignMatrix& x, const IndexSet& set, double big_l,
                                  const ConeSpec& cone, const EigenvalueOptions& options) {
  ComparisonRecord out;
  out.adaptive = adaptive_restricted_eigenvalue(x, set, big_l, options);
  out.l1 = l1_eigenvalue(x, set, big_l, options);
  auto order = [](const EigenvalueResult& small, const EigenvalueResult& large) {
    if (small.upper_bound <= large.lower_bound + kSlackTolerance) return Ordering::Holds;
    if (small.lower_bound > large.upper_bound + kSlackTolerance) return Ordering::Violated;
    return Ordering::Undetermined;
  };
  out.adaptive_vs_l1 = order(out.adaptive, out.l1);

  const auto allowed = cone_allowed(cone, set);
  const Vector iota = restrict(Vector::Ones(x.p()), set);
  if (!allowed.allowed) {
    out.skip_reason = "set is not allowed for the cone: " + allowed.reason;
  } else if (!cone.contains(iota)) {
    out.skip_reason = "the constant vector on S is not in the cone";
  } else {
    out.cone = omega_eigenvalue(x, set, big_l, NormSpec::cone(cone), options);
    out.adaptive_vs_cone = order(out.adaptive, *out.cone);
  }
  return out;
}

PontilMaurerRecord pontil_maurer_check(const DesignMatrix& x, const ConeSpec& cone, int draws,
                                       std::uint64_t seed) {
  if (draws < 100) throw InvalidArgument("at least 100 draws are required");
  PontilMaurerRecord out;
  out.draws = draws;
  out.bound = pontil_maurer_bound(x, cone);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(draws));
  for (int k = 0; k < draws; ++k) {
    const Vector eps = draw_noise(NoiseModel{1.0, seed + static_cast<std::uint64_t>(k)}, x.n());
    values.push_back(cone_dual_eval(cone, x.normalized_transpose_apply(eps)));
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= draws;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= (draws - 1);
  out.mean = mean;
  out.standard_error = std::sqrt(var / draws);
  out.verdict = out.mean - 3.0 * out.standard_error <= out.bound;
  return out;
}

}  // namespace wdsparse
