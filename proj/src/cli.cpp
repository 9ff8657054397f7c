#include "wdsparse/cli.hpp"

#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "wdsparse/eigenvalues.hpp"
#include "wdsparse/json_io.hpp"
#include "wdsparse/oracle.hpp"
#include "wdsparse/solvers.hpp"

namespace wdsparse::cli {

namespace {

struct Shared {
  std::string matrix;
  std::string norm_spec;
  std::string set;
  double big_l = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
};

std::vector<long long> parse_indices(const std::string& text) {
  std::vector<long long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("--set: \"" + item + "\" is not an integer");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw InvalidArgument("--set: \"" + item + "\" is not an integer");
    }
    out.push_back(v);
  }
  return out;
}

void emit(const Shared& s, const std::string& text, std::ostream& out) {
  if (s.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(s.out);
  if (!file) throw IoError(s.out + ": cannot open for writing");
  file << text;
}

std::string json_text(const Json& j) { return j.dump() + "\n"; }

NormSpec norm_or_l1(const Shared& s, Eigen::Index p) {
  if (s.norm_spec.empty()) return NormSpec::l1();
  return load_norm_spec(s.norm_spec, p);
}

Vector vector_arg(const std::string& inline_text, const std::string& file) {
  if (!inline_text.empty() && !file.empty()) {
    throw InvalidArgument("give either --vector or --vector-file, not both");
  }
  if (!file.empty()) return load_vector(file);
  if (inline_text.empty()) throw InvalidArgument("--vector or --vector-file is required");
  return parse_vector(inline_text);
}

int run_norm(const Shared& s, const std::string& vec, const std::string& vec_file, bool dual,
             std::ostream& out) {
  const Vector v = vector_arg(vec, vec_file);
  const NormSpec spec = load_norm_spec(s.norm_spec, v.size());
  if (dual) {
    const double value = dual_norm_eval(spec, v);
    if (s.format == "csv") {
      emit(s, "dual\n" + format_double(value) + "\n", out);
    } else {
      emit(s, json_text({{"dual", number_to_json(value)},
                         {"maximizer", vector_to_json(dual_maximizer(spec, v))}}),
           out);
    }
  } else {
    const double value = norm_eval(spec, v);
    if (s.format == "csv") {
      emit(s, "value\n" + format_double(value) + "\n", out);
    } else {
      emit(s, json_text({{"value", number_to_json(value)}}), out);
    }
  }
  return kOk;
}

int run_eigenvalue(const Shared& s, const std::string& kind, int restarts, std::ostream& out) {
  const DesignMatrix x = load_matrix(s.matrix);
  const IndexSet set = IndexSet::from_one_based(x.p(), parse_indices(s.set));
  EigenvalueOptions options;
  options.seed = s.seed;
  options.restarts = restarts;
  EigenvalueResult r;
  if (kind == "adaptive") {
    r = adaptive_restricted_eigenvalue(x, set, s.big_l, options);
  } else {
    r = omega_eigenvalue(x, set, s.big_l, norm_or_l1(s, x.p()), options);
  }
  const double phi2 = static_cast<double>(set.size()) * r.value * r.value;
  if (s.format == "csv") {
    emit(s,
         "value,lower_bound,upper_bound,certified,compatibility,effective_sparsity\n" +
             format_double(r.value) + "," + format_double(r.lower_bound) + "," +
             format_double(r.upper_bound) + "," + (r.certified ? "true" : "false") + "," +
             format_double(phi2) + "," + format_double(effective_sparsity(r.value)) + "\n",
         out);
  } else {
    Json j = eigenvalue_to_json(r);
    j["compatibility"] = number_to_json(phi2);
    j["set"] = index_set_to_json(set);
    j["L"] = number_to_json(s.big_l);
    emit(s, json_text(j), out);
  }
  return kOk;
}

int run_solve(const Shared& s, const std::string& response, double tol, int max_iter,
              std::ostream& out) {
  const DesignMatrix x = load_matrix(s.matrix);
  const Vector y = load_vector(response);
  SolveOptions options;
  options.tolerance = tol;
  options.max_iterations = max_iter;
  const auto fit = solve_penalized_ls(x, y, s.lambda, norm_or_l1(s, x.p()), options);
  if (s.format == "csv") {
    std::string text = "beta\n";
    for (Eigen::Index j = 0; j < fit.beta.size(); ++j) text += format_double(fit.beta[j]) + "\n";
    emit(s, text, out);
  } else {
    emit(s, json_text(fit_to_json(fit)), out);
  }
  return fit.converged ? kOk : kComputational;
}

int run_oracle(const std::string& config_path, const std::string& report_path, int threads,
               std::ostream& out, std::ostream& err) {
  auto config = load_experiment_config(config_path);
  if (threads > 0) config.threads = threads;
  const auto report = run_experiment(config, report_path);
  err << "replicates: " << report.summary.replicates << '\n';
  out << json_text({{"report", report_path},
                    {"summary_csv", summary_path_for(report_path).string()},
                    {"set", index_set_to_json(report.set)},
                    {"summary", summary_to_json(report.summary)}});
  return report.summary.failed == 0 ? kOk : kViolation;
}

int run_compare(const Shared& s, int restarts, std::ostream& out) {
  const DesignMatrix x = load_matrix(s.matrix);
  const IndexSet set = IndexSet::from_one_based(x.p(), parse_indices(s.set));
  const NormSpec spec = load_norm_spec(s.norm_spec, x.p());
  if (spec.family() != NormFamily::Cone) throw InvalidArgument("compare needs a cone norm spec");
  EigenvalueOptions options;
  options.seed = s.seed;
  options.restarts = restarts;
  const auto rec = comparison_check(x, set, s.big_l, spec.cone_spec(), options);
  Json j = {{"adaptive", eigenvalue_to_json(rec.adaptive)},
            {"l1", eigenvalue_to_json(rec.l1)},
            {"adaptive_vs_l1", to_string(rec.adaptive_vs_l1)},
            {"adaptive_vs_cone", to_string(rec.adaptive_vs_cone)}};
  if (rec.cone) j["cone"] = eigenvalue_to_json(*rec.cone);
  if (!rec.skip_reason.empty()) j["skip_reason"] = rec.skip_reason;
  if (s.format == "csv") {
    emit(s,
         "adaptive,l1,cone,adaptive_vs_l1,adaptive_vs_cone\n" + format_double(rec.adaptive.value) +
             "," + format_double(rec.l1.value) + "," +
             (rec.cone ? format_double(rec.cone->value) : std::string("")) + "," +
             to_string(rec.adaptive_vs_l1) + "," + to_string(rec.adaptive_vs_cone) + "\n",
         out);
  } else {
    emit(s, json_text(j), out);
  }
  const bool violated = rec.adaptive_vs_l1 == Ordering::Violated ||
                        rec.adaptive_vs_cone == Ordering::Violated;
  return violated ? kViolation : kOk;
}

int run_bound(const Shared& s, int draws, std::ostream& out) {
  const DesignMatrix x = load_matrix(s.matrix);
  const NormSpec spec = load_norm_spec(s.norm_spec, x.p());
  if (spec.family() != NormFamily::Cone) throw InvalidArgument("bound needs a cone norm spec");
  if (draws == 0) {
    const double b = pontil_maurer_bound(x, spec.cone_spec());
    emit(s, s.format == "csv" ? "bound\n" + format_double(b) + "\n"
                              : json_text({{"bound", number_to_json(b)}}),
         out);
    return kOk;
  }
  const auto rec = pontil_maurer_check(x, spec.cone_spec(), draws, s.seed);
  if (s.format == "csv") {
    emit(s,
         "bound,mean,standard_error,draws,verdict\n" + format_double(rec.bound) + "," +
             format_double(rec.mean) + "," + format_double(rec.standard_error) + "," +
             std::to_string(rec.draws) + "," + (rec.verdict ? "true" : "false") + "\n",
         out);
  } else {
    emit(s,
         json_text({{"bound", number_to_json(rec.bound)},
                    {"mean", number_to_json(rec.mean)},
                    {"standard_error", number_to_json(rec.standard_error)},
                    {"draws", rec.draws},
                    {"verdict", rec.verdict}}),
         out);
  }
  return rec.verdict ? kOk : kViolation;
}

int exit_code_for(const Error& e) {
  const auto& c = e.code();
  if (c == "parse" || c == "io" || c == "invalid_argument" || c == "dimension" ||
      c == "not_allowed") {
    return kUsage;
  }
  return kComputational;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weakly decomposable sparsity norms: evaluation, eigenvalues, solvers, oracle checks"};
  app.name("wdsparse");
  app.require_subcommand(1);
  Shared s;

  auto format_option = [&](CLI::App* sub) {
    sub->add_option("--format", s.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", s.out, "write output to this file");
  };

  std::string vec;
  std::string vec_file;
  auto* norm = app.add_subcommand("norm", "evaluate a norm");
  norm->add_option("--norm-spec", s.norm_spec, "norm spec JSON file")->required();
  norm->add_option("--vector", vec, "comma-separated vector");
  norm->add_option("--vector-file", vec_file, "vector CSV file");
  format_option(norm);

  auto* dual = app.add_subcommand("dual", "evaluate a dual norm");
  dual->add_option("--norm-spec", s.norm_spec, "norm spec JSON file")->required();
  dual->add_option("--vector", vec, "comma-separated vector");
  dual->add_option("--vector-file", vec_file, "vector CSV file");
  format_option(dual);

  std::string kind = "omega";
  int restarts = EigenvalueOptions{}.restarts;
  auto* eig = app.add_subcommand("eigenvalue", "compute an eigenvalue (default: l1)");
  eig->add_option("--matrix", s.matrix, "design CSV")->required();
  eig->add_option("--set", s.set, "1-based indices, comma-separated")->required();
  eig->add_option("--big-l", s.big_l, "the constant L")->required();
  eig->add_option("--norm-spec", s.norm_spec, "norm spec JSON file (default l1)");
  eig->add_option("--kind", kind, "omega or adaptive")->check(CLI::IsMember({"omega", "adaptive"}));
  eig->add_option("--restarts", restarts, "multistart count");
  eig->add_option("--seed", s.seed, "multistart seed");
  format_option(eig);

  std::string response;
  double tol = SolveOptions{}.tolerance;
  int max_iter = SolveOptions{}.max_iterations;
  auto* solve = app.add_subcommand("solve", "penalized least squares");
  solve->add_option("--matrix", s.matrix, "design CSV")->required();
  solve->add_option("--response", response, "response CSV")->required();
  solve->add_option("--norm-spec", s.norm_spec, "norm spec JSON file (default l1)");
  solve->add_option("--lambda", s.lambda, "penalty level")->required();
  solve->add_option("--tol", tol, "KKT tolerance");
  solve->add_option("--max-iter", max_iter, "iteration cap");
  format_option(solve);

  std::string config;
  std::string report = "report.jsonl";
  int threads = 0;
  auto* oracle = app.add_subcommand("oracle", "Monte Carlo check of the oracle inequality");
  oracle->add_option("--config", config, "experiment JSON")->required();
  oracle->add_option("--out", report, "JSON-lines report path")->required();
  oracle->add_option("--threads", threads, "worker threads");

  auto* compare = app.add_subcommand("compare", "eigenvalue orderings for a cone norm");
  compare->add_option("--matrix", s.matrix, "design CSV")->required();
  compare->add_option("--set", s.set, "1-based indices")->required();
  compare->add_option("--big-l", s.big_l, "the constant L")->required();
  compare->add_option("--norm-spec", s.norm_spec, "cone norm spec JSON file")->required();
  compare->add_option("--restarts", restarts, "multistart count");
  compare->add_option("--seed", s.seed, "multistart seed");
  format_option(compare);

  int draws = 1000;
  auto* bound = app.add_subcommand("bound", "expectation bound for the dual noise");
  bound->add_option("--matrix", s.matrix, "design CSV")->required();
  bound->add_option("--norm-spec", s.norm_spec, "cone norm spec JSON file")->required();
  bound->add_option("--draws", draws, "Monte Carlo draws (0: bound only)");
  bound->add_option("--seed", s.seed, "noise seed");
  format_option(bound);

  std::vector<const char*> argv{"wdsparse"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*norm) return run_norm(s, vec, vec_file, false, out);
    if (*dual) return run_norm(s, vec, vec_file, true, out);
    if (*eig) return run_eigenvalue(s, kind, restarts, out);
    if (*solve) return run_solve(s, response, tol, max_iter, out);
    if (*oracle) return run_oracle(config, report, threads, out, err);
    if (*compare) return run_compare(s, restarts, out);
    if (*bound) return run_bound(s, draws, out);
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kComputational;
  }
  return kUsage;
}

}  // namespace wdsparse::cli
