#pragma once

#include <filesystem>
#include <ostream>

#include <json.hpp>

#include "wdsparse/eigenvalues.hpp"
#include "wdsparse/norms.hpp"
#include "wdsparse/oracle.hpp"
#include "wdsparse/solvers.hpp"

namespace wdsparse {

using Json = nlohmann::json;

// Non-finite doubles travel as the strings "inf", "-inf" and "nan".
Json number_to_json(double v);
double number_from_json(const Json& j, const std::string& what);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& what);

// Indices are 1-based in JSON.
Json index_set_to_json(const IndexSet& set);
IndexSet index_set_from_json(const Json& j, Eigen::Index p, const std::string& what);

/**
 * {"family":"l1"}
 * {"family":"group","groups":[[1,2],[3,4]]}
 * {"family":"trivial_g","p":3,"G":[1,2]}
 * {"family":"cone","cone":"full_orthant"|"monotone"}
 * {"family":"cone","cone":"group_constant","groups":[[1,2],[3]]}
 * {"family":"cone","cone":"rays","rays":[[1,0,0],[1,1,0],[1,1,1]]}   one ray per list
 *
 * trivial_g may omit "p" when the dimension is known from context
 * (`default_p` > 0).
 */
NormSpec norm_from_json(const Json& j, Eigen::Index default_p = 0);
Json norm_to_json(const NormSpec& spec);
ConeSpec cone_from_json(const Json& j);
Json cone_to_json(const ConeSpec& cone);

NormSpec load_norm_spec(const std::filesystem::path& path, Eigen::Index default_p = 0);

Json eigenvalue_to_json(const EigenvalueResult& r);
Json fit_to_json(const FitResult& r);
Json replicate_to_json(const ReplicateRecord& r);
ReplicateRecord replicate_from_json(const Json& j);
Json summary_to_json(const OracleSummary& s);

void write_summary_csv(std::ostream& out, const OracleSummary& s);

/// Relative paths inside the config resolve against `base_dir`.
ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Shortest round-trip representation, with non-finite values as above.
std::string format_double(double v);

}  // namespace wdsparse
