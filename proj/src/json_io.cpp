#include "wdsparse/json_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace wdsparse {

namespace {

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(where + ": missing key \"" + key + "\"", 0, 0);
  }
  return j.at(key);
}

Groups groups_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + " must be a list of index lists", 0, 0);
  std::vector<std::vector<long long>> raw;
  for (const auto& g : j) {
    if (!g.is_array()) throw ParseError(what + " must be a list of index lists", 0, 0);
    std::vector<long long> group;
    for (const auto& idx : g) {
      if (!idx.is_number_integer()) throw ParseError(what + ": indices must be integers", 0, 0);
      group.push_back(idx.get<long long>());
    }
    raw.push_back(std::move(group));
  }
  return groups_from_one_based(raw);
}

Json groups_to_json(const Groups& groups) { return Json(groups_to_one_based(groups)); }

Json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0, 0);
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json number_to_json(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double number_from_json(const Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
    if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParseError(what + " must be a number", 0, 0);
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_to_json(v[i]));
  return out;
}

Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + " must be a list of numbers", 0, 0);
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = number_from_json(j[i], what);
  }
  return v;
}

Json index_set_to_json(const IndexSet& set) { return Json(set.one_based()); }

IndexSet index_set_from_json(const Json& j, Eigen::Index p, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + " must be a list of 1-based indices", 0, 0);
  std::vector<long long> idx;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw ParseError(what + ": indices must be integers", 0, 0);
    idx.push_back(v.get<long long>());
  }
  return IndexSet::from_one_based(p, idx);
}

ConeSpec cone_from_json(const Json& j) {
  const auto kind = require(j, "cone", "cone spec").get<std::string>();
  if (kind == "full_orthant") return ConeSpec::full_orthant();
  if (kind == "monotone") return ConeSpec::monotone();
  if (kind == "group_constant") {
    return ConeSpec::group_constant(groups_from_json(require(j, "groups", "cone spec"), "groups"));
  }
  if (kind == "rays") {
    const auto& rays = require(j, "rays", "cone spec");
    if (!rays.is_array() || rays.empty()) throw ParseError("rays must be a nonempty list", 0, 0);
    const auto p = static_cast<Eigen::Index>(rays.front().size());
    Matrix m(p, static_cast<Eigen::Index>(rays.size()));
    for (std::size_t k = 0; k < rays.size(); ++k) {
      const Vector r = vector_from_json(rays[k], "ray");
      if (r.size() != p) throw ParseError("rays must all have the same length", 0, 0);
      m.col(static_cast<Eigen::Index>(k)) = r;
    }
    return ConeSpec::polyhedral_rays(std::move(m));
  }
  throw ParseError("unknown cone \"" + kind + "\"", 0, 0);
}

Json cone_to_json(const ConeSpec& cone) {
  switch (cone.kind()) {
    case ConeKind::FullOrthant:
      return {{"cone", "full_orthant"}};
    case ConeKind::Monotone:
      return {{"cone", "monotone"}};
    case ConeKind::GroupConstant:
      return {{"cone", "group_constant"}, {"groups", groups_to_json(cone.groups())}};
    case ConeKind::PolyhedralRays: {
      Json rays = Json::array();
      for (Eigen::Index k = 0; k < cone.rays().cols(); ++k) {
        rays.push_back(vector_to_json(cone.rays().col(k)));
      }
      return {{"cone", "rays"}, {"rays", rays}};
    }
  }
  return {};
}

NormSpec norm_from_json(const Json& j, Eigen::Index default_p) {
  const auto family = require(j, "family", "norm spec").get<std::string>();
  if (family == "l1") return NormSpec::l1();
  if (family == "group") {
    return NormSpec::group(groups_from_json(require(j, "groups", "norm spec"), "groups"));
  }
  if (family == "trivial_g") {
    Eigen::Index p = default_p;
    if (j.contains("p")) p = j.at("p").get<Eigen::Index>();
    if (p < 1) throw ParseError("trivial_g needs \"p\"", 0, 0);
    return NormSpec::trivial_g(index_set_from_json(require(j, "G", "norm spec"), p, "G"));
  }
  if (family == "cone") return NormSpec::cone(cone_from_json(j));
  throw ParseError("unknown norm family \"" + family + "\"", 0, 0);
}

Json norm_to_json(const NormSpec& spec) {
  switch (spec.family()) {
    case NormFamily::L1:
      return {{"family", "l1"}};
    case NormFamily::Group:
      return {{"family", "group"}, {"groups", groups_to_json(spec.groups())}};
    case NormFamily::TrivialG:
      return {{"family", "trivial_g"},
              {"p", spec.trivial_set().universe()},
              {"G", index_set_to_json(spec.trivial_set())}};
    case NormFamily::Cone: {
      Json out = cone_to_json(spec.cone_spec());
      out["family"] = "cone";
      return out;
    }
  }
  return {};
}

NormSpec load_norm_spec(const std::filesystem::path& path, Eigen::Index default_p) {
  try {
    return norm_from_json(parse_file(path), default_p);
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what(), 0, 0);
  }
}

Json eigenvalue_to_json(const EigenvalueResult& r) {
  return {{"value", number_to_json(r.value)},
          {"lower_bound", number_to_json(r.lower_bound)},
          {"upper_bound", number_to_json(r.upper_bound)},
          {"certified", r.certified},
          {"effective_sparsity", number_to_json(effective_sparsity(r.value))},
          {"witness", vector_to_json(r.witness)},
          {"nodes", r.nodes}};
}

Json fit_to_json(const FitResult& r) {
  return {{"beta", vector_to_json(r.beta)},
          {"objective", number_to_json(r.objective)},
          {"kkt_residual", number_to_json(r.kkt_residual)},
          {"iterations", r.iterations},
          {"converged", r.converged}};
}

Json replicate_to_json(const ReplicateRecord& r) {
  return {{"replicate", r.index},
          {"noise_seed", r.noise_seed},
          {"status", to_string(r.status)},
          {"lambda_S", number_to_json(r.lambda_s)},
          {"lambda_Sc", number_to_json(r.lambda_sc)},
          {"lambda", number_to_json(r.lambda)},
          {"L_S", number_to_json(r.stretch)},
          {"delta_lower", number_to_json(r.delta_lower)},
          {"delta_upper", number_to_json(r.delta_upper)},
          {"delta_certified", r.delta_certified},
          {"gamma2", number_to_json(r.gamma2)},
          {"prediction_error", number_to_json(r.prediction_error)},
          {"residual_norm_term", number_to_json(r.residual_norm_term)},
          {"omega_term", number_to_json(r.omega_term)},
          {"lhs", number_to_json(r.lhs)},
          {"approximation_error", number_to_json(r.approximation_error)},
          {"estimation_term", number_to_json(r.estimation_term)},
          {"rhs", number_to_json(r.rhs)},
          {"slack", number_to_json(r.slack)},
          {"fit_converged", r.fit_converged},
          {"kkt_residual", number_to_json(r.kkt_residual)},
          {"note", r.note}};
}

ReplicateRecord replicate_from_json(const Json& j) {
  ReplicateRecord r;
  auto num = [&](const char* key) { return number_from_json(require(j, key, "replicate"), key); };
  r.index = require(j, "replicate", "replicate").get<int>();
  r.noise_seed = require(j, "noise_seed", "replicate").get<std::uint64_t>();
  const auto status = require(j, "status", "replicate").get<std::string>();
  for (auto s : {ReplicateStatus::Pass, ReplicateStatus::Fail, ReplicateStatus::Inapplicable,
                 ReplicateStatus::Unverifiable}) {
    if (to_string(s) == status) r.status = s;
  }
  r.lambda_s = num("lambda_S");
  r.lambda_sc = num("lambda_Sc");
  r.lambda = num("lambda");
  r.stretch = num("L_S");
  r.delta_lower = num("delta_lower");
  r.delta_upper = num("delta_upper");
  r.delta_certified = require(j, "delta_certified", "replicate").get<bool>();
  r.gamma2 = num("gamma2");
  r.prediction_error = num("prediction_error");
  r.residual_norm_term = num("residual_norm_term");
  r.omega_term = num("omega_term");
  r.lhs = num("lhs");
  r.approximation_error = num("approximation_error");
  r.estimation_term = num("estimation_term");
  r.rhs = num("rhs");
  r.slack = num("slack");
  r.fit_converged = require(j, "fit_converged", "replicate").get<bool>();
  r.kkt_residual = num("kkt_residual");
  r.note = require(j, "note", "replicate").get<std::string>();
  return r;
}

Json summary_to_json(const OracleSummary& s) {
  return {{"replicates", s.replicates},
          {"passed", s.passed},
          {"failed", s.failed},
          {"unverifiable", s.unverifiable},
          {"inapplicable", s.inapplicable},
          {"applicability_rate", number_to_json(s.applicability_rate)},
          {"min_slack", number_to_json(s.min_slack)},
          {"median_slack", number_to_json(s.median_slack)}};
}

void write_summary_csv(std::ostream& out, const OracleSummary& s) {
  out << "replicates,passed,failed,unverifiable,inapplicable,applicability_rate,min_slack,"
         "median_slack\n";
  out << s.replicates << ',' << s.passed << ',' << s.failed << ',' << s.unverifiable << ','
      << s.inapplicable << ',' << format_double(s.applicability_rate) << ','
      << format_double(s.min_slack) << ',' << format_double(s.median_slack) << '\n';
}

ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  try {
    ExperimentConfig c;
    const auto& design = require(j, "design", "config");
    if (design.contains("matrix")) {
      c.design = load_matrix(resolve(base_dir, design.at("matrix").get<std::string>()));
    } else {
      const auto& syn = require(design, "synthetic", "design");
      c.synthetic.n = require(syn, "n", "synthetic").get<Eigen::Index>();
      c.synthetic.p = require(syn, "p", "synthetic").get<Eigen::Index>();
      c.synthetic.rho = syn.value("rho", 0.0);
      if (c.synthetic.n < 1 || c.synthetic.p < 1) throw InvalidArgument("synthetic n, p must be >= 1");
      if (!(std::abs(c.synthetic.rho) < 1.0)) throw InvalidArgument("synthetic rho must lie in (-1, 1)");
    }
    const Eigen::Index p = c.design ? c.design->p() : c.synthetic.p;
    c.beta0 = vector_from_json(require(j, "beta0", "config"), "beta0");
    if (c.beta0.size() != p) throw DimensionError("beta0 must have length p");
    if (j.contains("beta")) {
      c.beta = vector_from_json(j.at("beta"), "beta");
      if (c.beta->size() != p) throw DimensionError("beta must have length p");
    }
    if (j.contains("set")) c.set = index_set_from_json(j.at("set"), p, "set");
    c.norm = norm_from_json(require(j, "norm", "config"), p);
    c.norm.check_dimension(p);
    c.sigma = j.value("sigma", 1.0);
    if (!(c.sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
    c.replicates = j.value("replicates", 1);
    if (c.replicates < 1) throw InvalidArgument("replicates must be >= 1");
    c.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("lambda")) {
      const auto& l = j.at("lambda");
      const auto rule = l.value("rule", std::string("multiplier"));
      if (rule == "fixed") {
        c.lambda.kind = LambdaRule::Kind::Fixed;
      } else if (rule == "multiplier") {
        c.lambda.kind = LambdaRule::Kind::Multiplier;
      } else {
        throw ParseError("lambda rule must be \"fixed\" or \"multiplier\"", 0, 0);
      }
      c.lambda.value = l.value("value", c.lambda.value);
      c.lambda.offset = l.value("offset", c.lambda.offset);
      if (c.lambda.kind == LambdaRule::Kind::Multiplier && !(c.lambda.value > 1.0)) {
        throw InvalidArgument("lambda multiplier must exceed 1");
      }
    }
    c.delta_slack = j.value("delta_slack", 0.0);
    if (!(c.delta_slack >= 0.0 && c.delta_slack < 1.0)) {
      throw InvalidArgument("delta_slack must lie in [0, 1)");
    }
    c.threads = j.value("threads", 0);
    if (j.contains("eigen")) {
      const auto& e = j.at("eigen");
      c.eigen.restarts = e.value("restarts", c.eigen.restarts);
      c.eigen.node_budget = e.value("node_budget", c.eigen.node_budget);
      c.eigen.orthant_cap = e.value("orthant_cap", c.eigen.orthant_cap);
      c.eigen.seed = e.value("seed", c.eigen.seed);
    }
    if (j.contains("solve")) {
      const auto& s = j.at("solve");
      c.solve.tolerance = s.value("tolerance", c.solve.tolerance);
      c.solve.max_iterations = s.value("max_iterations", c.solve.max_iterations);
    }
    return c;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("config: ") + e.what(), 0, 0);
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const Json j = parse_file(path);
  try {
    return config_from_json(j, path.parent_path());
  } catch (const Error& e) {
    if (e.code() == "parse") throw ParseError(path.string() + ": " + e.what(), 0, 0);
    throw;
  }
}

}  // namespace wdsparse
