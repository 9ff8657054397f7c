#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wdsparse/cone_norm.hpp"
#include "wdsparse/core.hpp"
#include "wdsparse/eigenvalues.hpp"
#include "wdsparse/norms.hpp"
#include "wdsparse/solvers.hpp"

namespace wdsparse {

/// lambda <= lambda^{S^c}: the oracle inequality makes no claim.
class InapplicableError : public Error {
 public:
  explicit InapplicableError(const std::string& message) : Error("inapplicable", message) {}
};

struct NoiseLambdas {
  double lambda_s = 0.0;
  double lambda_sc = 0.0;
};

/// lambda^S = Omega_*((eps^T X)_S / n), lambda^{S^c} = Omega^{S^c}_*((eps^T X)_{S^c} / n).
NoiseLambdas empirical_lambdas(const DesignMatrix& x, const Vector& eps, const IndexSet& set,
                               const NormSpec& omega);

/// L_S = ((lambda + lambda^S) / (lambda - lambda^{S^c})) ((1 + d) / (1 - d)).
double stretch_factor(double lambda, double lambda_s, double lambda_sc, double delta_slack);

struct LambdaRule {
  enum class Kind { Fixed, Multiplier };
  Kind kind = Kind::Multiplier;
  /// Fixed: lambda itself. Multiplier: c in lambda = c lambda^{S^c} + offset.
  double value = 1.5;
  double offset = 1e-6;
};

/// Rows i.i.d. N(0, Sigma) with Sigma_jk = rho^|j-k|.
struct SyntheticDesign {
  Eigen::Index n = 20;
  Eigen::Index p = 6;
  double rho = 0.0;
};

struct ExperimentConfig {
  /// Used when set; otherwise the synthetic generator.
  std::optional<DesignMatrix> design;
  SyntheticDesign synthetic;
  Vector beta0;
  /// Oracle candidate; defaults to beta0.
  std::optional<Vector> beta;
  /// Defaults to the smallest allowed superset of support(beta).
  std::optional<IndexSet> set;
  NormSpec norm;
  double sigma = 1.0;
  int replicates = 1;
  std::uint64_t seed = 1;
  LambdaRule lambda;
  double delta_slack = 0.0;
  EigenvalueOptions eigen;
  SolveOptions solve;
  /// Worker threads; 0 uses the hardware concurrency.
  int threads = 0;
};

enum class ReplicateStatus { Pass, Fail, Inapplicable, Unverifiable };
std::string to_string(ReplicateStatus status);

struct ReplicateRecord {
  int index = 0;
  std::uint64_t noise_seed = 0;
  double lambda_s = 0.0;
  double lambda_sc = 0.0;
  double lambda = 0.0;
  double stretch = 0.0;
  double delta_lower = 0.0;
  double delta_upper = 0.0;
  bool delta_certified = false;
  /// The effective sparsity used on the right: 1 / delta_lower^2.
  double gamma2 = 0.0;
  double prediction_error = 0.0;
  /// Omega^{S^c}(beta_hat_{S^c}).
  double residual_norm_term = 0.0;
  /// Omega(beta_hat_S - beta).
  double omega_term = 0.0;
  double lhs = 0.0;
  double approximation_error = 0.0;
  double estimation_term = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool fit_converged = false;
  double kkt_residual = 0.0;
  ReplicateStatus status = ReplicateStatus::Inapplicable;
  std::string note;
};

struct OracleSummary {
  int replicates = 0;
  int passed = 0;
  int failed = 0;
  int unverifiable = 0;
  int inapplicable = 0;
  double applicability_rate = 0.0;
  /// Over verified (passed or failed) replicates; NaN when there are none.
  double min_slack = 0.0;
  double median_slack = 0.0;
};

struct OracleReport {
  IndexSet set;
  std::vector<ReplicateRecord> replicates;
  OracleSummary summary;
};

/// Slack tolerance below which a replicate counts as a violation.
inline constexpr double kSlackTolerance = 1e-7;

DesignMatrix build_design(const ExperimentConfig& config);
OracleReport oracle_check(const ExperimentConfig& config);
OracleSummary summarize(const std::vector<ReplicateRecord>& records);

/// Runs the experiment, writes JSON lines to `report_path` and the summary
/// CSV next to it (extension replaced by .summary.csv). Returns the report.
OracleReport run_experiment(const ExperimentConfig& config,
                            const std::filesystem::path& report_path);
std::filesystem::path summary_path_for(const std::filesystem::path& report_path);

enum class Ordering { Holds, Violated, Undetermined, Skipped };
std::string to_string(Ordering ordering);

struct ComparisonRecord {
  EigenvalueResult adaptive;  // delta_{Omega_S}
  EigenvalueResult l1;        // delta
  std::optional<EigenvalueResult> cone;  // delta_Omega
  Ordering adaptive_vs_l1 = Ordering::Undetermined;
  Ordering adaptive_vs_cone = Ordering::Skipped;
  std::string skip_reason;
};

/// Checks delta_{Omega_S} <= delta and delta_{Omega_S} <= delta_Omega (the
/// latter when A_S is allowed and 1_S lies in A), each within 1e-7.
ComparisonRecord comparison_check(const DesignMatrix& x, const IndexSet& set, double big_l,
                                  const ConeSpec& cone, const EigenvalueOptions& options = {});

struct PontilMaurerRecord {
  int draws = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  double bound = 0.0;
  bool verdict = false;
};

/// Monte Carlo mean of Omega_*(eps^T X; A) / n with eps ~ N(0, I), compared
/// with the expectation bound.
PontilMaurerRecord pontil_maurer_check(const DesignMatrix& x, const ConeSpec& cone, int draws,
                                       std::uint64_t seed = 11);

}  // namespace wdsparse
