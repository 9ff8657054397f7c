#include "wdsparse/norms.hpp"

#include <algorithm>
#include <cmath>

namespace wdsparse {

namespace {

double group_value(const Vector& beta, const std::vector<Eigen::Index>& g) {
  double ss = 0.0;
  for (auto j : g) ss += beta[j] * beta[j];
  return std::sqrt(static_cast<double>(g.size()) * ss);
}

// ||w_G||_2 / sqrt(|G|).
double group_dual(const Vector& w, const std::vector<Eigen::Index>& g) {
  double ss = 0.0;
  for (auto j : g) ss += w[j] * w[j];
  return std::sqrt(ss / static_cast<double>(g.size()));
}

Vector group_dual_maximizer(const Vector& w, const std::vector<Eigen::Index>& g) {
  Vector gamma = Vector::Zero(w.size());
  double ss = 0.0;
  for (auto j : g) ss += w[j] * w[j];
  if (ss == 0.0) return gamma;
  const double scale = 1.0 / std::sqrt(static_cast<double>(g.size()) * ss);
  for (auto j : g) gamma[j] = w[j] * scale;
  return gamma;
}

void block_shrink(const Vector& v, const std::vector<Eigen::Index>& g, double t, Vector& out) {
  double ss = 0.0;
  for (auto j : g) ss += v[j] * v[j];
  const double norm = std::sqrt(ss);
  const double threshold = t * std::sqrt(static_cast<double>(g.size()));
  if (norm <= threshold) {
    for (auto j : g) out[j] = 0.0;
    return;
  }
  const double scale = 1.0 - threshold / norm;
  for (auto j : g) out[j] = scale * v[j];
}

std::vector<Eigen::Index> trivial_complement(const NormSpec& spec) {
  return spec.trivial_set().complement().indices();
}

// Position of each kept index inside the complement of `set`.
std::vector<Eigen::Index> compressed_positions(const IndexSet& set) {
  std::vector<Eigen::Index> position(static_cast<std::size_t>(set.universe()), -1);
  const IndexSet rest = set.complement();
  for (std::size_t k = 0; k < rest.indices().size(); ++k) {
    position[static_cast<std::size_t>(rest.indices()[k])] = static_cast<Eigen::Index>(k);
  }
  return position;
}

// beta = c 1_{S cap G} + 1_{G \ S}: as c grows, Omega(beta) - Omega(beta_S)
// tends to zero while beta_{S^c} stays fixed, so no norm on S^c works.
Vector straddle_counterexample(Eigen::Index p, const std::vector<Eigen::Index>& g,
                               const IndexSet& set) {
  Vector beta = Vector::Zero(p);
  for (auto j : g) beta[j] = set.contains(j) ? 1e6 : 1.0;
  return beta;
}

bool is_allowed(const NormSpec& spec, const IndexSet& set) {
  return is_allowed_set(spec, set).allowed;
}

}  // namespace

NormSpec NormSpec::l1() { return NormSpec(); }

NormSpec NormSpec::group(Groups partition) {
  validate_partition(partition);
  NormSpec s;
  s.family_ = NormFamily::Group;
  s.groups_ = std::move(partition);
  return s;
}

NormSpec NormSpec::trivial_g(IndexSet g) {
  if (g.universe() < 1) throw InvalidArgument("trivial norm needs p >= 1");
  NormSpec s;
  s.family_ = NormFamily::TrivialG;
  s.trivial_ = std::move(g);
  return s;
}

NormSpec NormSpec::cone(ConeSpec cone) {
  NormSpec s;
  s.family_ = NormFamily::Cone;
  s.cone_ = std::move(cone);
  return s;
}

std::optional<Eigen::Index> NormSpec::dimension() const {
  switch (family_) {
    case NormFamily::L1:
      return std::nullopt;
    case NormFamily::Group: {
      Eigen::Index p = 0;
      for (const auto& g : groups_) p += static_cast<Eigen::Index>(g.size());
      return p;
    }
    case NormFamily::TrivialG:
      return trivial_.universe();
    case NormFamily::Cone:
      return cone_.dimension();
  }
  return std::nullopt;
}

void NormSpec::check_dimension(Eigen::Index p) const {
  if (auto d = dimension(); d && *d != p) {
    throw DimensionError(describe() + " norm has dimension " + std::to_string(*d) +
                         ", vector has length " + std::to_string(p));
  }
}

std::string NormSpec::describe() const {
  switch (family_) {
    case NormFamily::L1:
      return "l1";
    case NormFamily::Group:
      return "group";
    case NormFamily::TrivialG:
      return "trivial_g";
    case NormFamily::Cone:
      return "cone(" + cone_.describe() + ")";
  }
  return "unknown";
}

double norm_eval(const NormSpec& spec, const Vector& beta) {
  spec.check_dimension(beta.size());
  switch (spec.family()) {
    case NormFamily::L1:
      return beta.lpNorm<1>();
    case NormFamily::Group: {
      double total = 0.0;
      for (const auto& g : spec.groups()) total += group_value(beta, g);
      return total;
    }
    case NormFamily::TrivialG: {
      double total = spec.trivial_set().is_empty() ? 0.0
                                                   : group_value(beta, spec.trivial_set().indices());
      for (auto j : trivial_complement(spec)) total += std::abs(beta[j]);
      return total;
    }
    case NormFamily::Cone:
      return cone_norm_eval(spec.cone_spec(), beta).value;
  }
  return 0.0;
}

double dual_norm_eval(const NormSpec& spec, const Vector& w) {
  spec.check_dimension(w.size());
  switch (spec.family()) {
    case NormFamily::L1:
      return w.size() == 0 ? 0.0 : w.lpNorm<Eigen::Infinity>();
    case NormFamily::Group: {
      double best = 0.0;
      for (const auto& g : spec.groups()) best = std::max(best, group_dual(w, g));
      return best;
    }
    case NormFamily::TrivialG: {
      double best = spec.trivial_set().is_empty() ? 0.0
                                                  : group_dual(w, spec.trivial_set().indices());
      for (auto j : trivial_complement(spec)) best = std::max(best, std::abs(w[j]));
      return best;
    }
    case NormFamily::Cone:
      return cone_dual_eval(spec.cone_spec(), w);
  }
  return 0.0;
}

Vector dual_maximizer(const NormSpec& spec, const Vector& w) {
  spec.check_dimension(w.size());
  const auto p = w.size();
  Vector gamma = Vector::Zero(p);
  if (p == 0) return gamma;
  auto coordinate = [&](Eigen::Index j) {
    gamma.setZero();
    gamma[j] = w[j] >= 0.0 ? 1.0 : -1.0;
  };
  switch (spec.family()) {
    case NormFamily::L1: {
      Eigen::Index j = 0;
      w.cwiseAbs().maxCoeff(&j);
      if (w[j] != 0.0) coordinate(j);
      return gamma;
    }
    case NormFamily::Group: {
      double best = 0.0;
      for (const auto& g : spec.groups()) {
        const double d = group_dual(w, g);
        if (d > best) {
          best = d;
          gamma = group_dual_maximizer(w, g);
        }
      }
      return gamma;
    }
    case NormFamily::TrivialG: {
      double best = 0.0;
      if (!spec.trivial_set().is_empty()) {
        best = group_dual(w, spec.trivial_set().indices());
        if (best > 0.0) gamma = group_dual_maximizer(w, spec.trivial_set().indices());
      }
      for (auto j : trivial_complement(spec)) {
        if (std::abs(w[j]) > best) {
          best = std::abs(w[j]);
          coordinate(j);
        }
      }
      return gamma;
    }
    case NormFamily::Cone:
      return cone_dual_maximizer(spec.cone_spec(), w);
  }
  return gamma;
}

Vector prox(const NormSpec& spec, const Vector& v, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("prox parameter must be positive");
  spec.check_dimension(v.size());
  switch (spec.family()) {
    case NormFamily::L1: {
      Vector out(v.size());
      for (Eigen::Index j = 0; j < v.size(); ++j) {
        const double mag = std::abs(v[j]) - t;
        out[j] = mag > 0.0 ? std::copysign(mag, v[j]) : 0.0;
      }
      return out;
    }
    case NormFamily::Group: {
      Vector out(v.size());
      for (const auto& g : spec.groups()) block_shrink(v, g, t, out);
      return out;
    }
    case NormFamily::TrivialG: {
      Vector out(v.size());
      if (!spec.trivial_set().is_empty()) block_shrink(v, spec.trivial_set().indices(), t, out);
      for (auto j : trivial_complement(spec)) {
        const double mag = std::abs(v[j]) - t;
        out[j] = mag > 0.0 ? std::copysign(mag, v[j]) : 0.0;
      }
      return out;
    }
    case NormFamily::Cone:
      return cone_prox(spec.cone_spec(), v, t);
  }
  return v;
}

double ResidualNorm::eval(const Vector& beta) const {
  if (complement.is_empty()) return 0.0;
  return norm_eval(norm, complement.gather(beta));
}

double ResidualNorm::dual(const Vector& w) const {
  if (complement.is_empty()) return 0.0;
  return dual_norm_eval(norm, complement.gather(w));
}

AllowedCheck is_allowed_set(const NormSpec& spec, const IndexSet& set) {
  spec.check_dimension(set.universe());
  const auto p = set.universe();
  AllowedCheck out;
  auto straddles = [&](const std::vector<Eigen::Index>& g) {
    std::size_t inside = 0;
    for (auto j : g) inside += set.contains(j) ? 1 : 0;
    return inside != 0 && inside != g.size();
  };
  switch (spec.family()) {
    case NormFamily::L1:
      out.allowed = true;
      return out;
    case NormFamily::Group:
      for (std::size_t t = 0; t < spec.groups().size(); ++t) {
        if (straddles(spec.groups()[t])) {
          out.reason = "set is not a union of groups: it splits group " + std::to_string(t + 1);
          out.witness = straddle_counterexample(p, spec.groups()[t], set);
          return out;
        }
      }
      out.allowed = true;
      return out;
    case NormFamily::TrivialG:
      // G together with the singletons of G^c is a partition; the norm is the
      // group norm for it.
      if (straddles(spec.trivial_set().indices())) {
        out.reason = "set must contain G or be disjoint from it";
        out.witness = straddle_counterexample(p, spec.trivial_set().indices(), set);
        return out;
      }
      out.allowed = true;
      return out;
    case NormFamily::Cone:
      return cone_allowed(spec.cone_spec(), set);
  }
  return out;
}

ResidualNorm residual_norm(const NormSpec& spec, const IndexSet& set) {
  const auto check = is_allowed_set(spec, set);
  if (!check.allowed) throw NotAllowedError("not an allowed set: " + check.reason, check.witness);
  ResidualNorm out;
  out.complement = set.complement();
  if (out.complement.is_empty()) return out;
  switch (spec.family()) {
    case NormFamily::L1:
      break;
    case NormFamily::Group: {
      const auto position = compressed_positions(set);
      Groups kept;
      for (const auto& g : spec.groups()) {
        if (set.contains(g.front())) continue;
        std::vector<Eigen::Index> mapped;
        for (auto j : g) mapped.push_back(position[static_cast<std::size_t>(j)]);
        kept.push_back(std::move(mapped));
      }
      out.norm = NormSpec::group(std::move(kept));
      break;
    }
    case NormFamily::TrivialG: {
      const auto& g = spec.trivial_set();
      if (g.is_empty() || set.contains(g.indices().front())) break;
      const auto position = compressed_positions(set);
      std::vector<Eigen::Index> mapped;
      for (auto j : g.indices()) mapped.push_back(position[static_cast<std::size_t>(j)]);
      out.norm = NormSpec::trivial_g(IndexSet(out.complement.size(), std::move(mapped)));
      break;
    }
    case NormFamily::Cone:
      out.norm = NormSpec::cone(residual_cone(spec.cone_spec(), set));
      break;
  }
  return out;
}

double weak_decomposability_slack(const NormSpec& spec, const IndexSet& set, const Vector& beta) {
  const auto residual = residual_norm(spec, set);
  return norm_eval(spec, beta) - norm_eval(spec, restrict(beta, set)) - residual.eval(beta);
}

IndexSet smallest_allowed_superset(const NormSpec& spec, const IndexSet& set) {
  spec.check_dimension(set.universe());
  const auto p = set.universe();
  auto grow_by_groups = [&](const Groups& groups) {
    std::vector<Eigen::Index> out;
    for (const auto& g : groups) {
      const bool hit = std::any_of(g.begin(), g.end(), [&](auto j) { return set.contains(j); });
      if (hit) out.insert(out.end(), g.begin(), g.end());
    }
    std::sort(out.begin(), out.end());
    return IndexSet(p, std::move(out));
  };
  switch (spec.family()) {
    case NormFamily::L1:
      return set;
    case NormFamily::Group:
      return grow_by_groups(spec.groups());
    case NormFamily::TrivialG:
      return set.intersects(spec.trivial_set()) ? set.unite(spec.trivial_set()) : set;
    case NormFamily::Cone:
      break;
  }
  const auto& cone = spec.cone_spec();
  switch (cone.kind()) {
    case ConeKind::FullOrthant:
      return set;
    case ConeKind::Monotone:
      return set.is_empty() ? set : IndexSet::range(p, 0, set.indices().back() + 1);
    case ConeKind::GroupConstant:
      return grow_by_groups(cone.groups());
    case ConeKind::PolyhedralRays:
      break;
  }
  if (is_allowed(spec, set)) return set;
  // Allowed sets need not be closed under union here: search supersets by
  // size, falling back to the full set.
  const auto rest = set.complement().indices();
  const auto m = static_cast<int>(rest.size());
  if (m <= 16) {
    for (int extra = 1; extra < m; ++extra) {
      std::vector<bool> pick(static_cast<std::size_t>(m), false);
      std::fill(pick.begin(), pick.begin() + extra, true);
      do {
        std::vector<Eigen::Index> idx = set.indices();
        for (int k = 0; k < m; ++k) {
          if (pick[static_cast<std::size_t>(k)]) idx.push_back(rest[static_cast<std::size_t>(k)]);
        }
        std::sort(idx.begin(), idx.end());
        IndexSet candidate(p, std::move(idx));
        if (is_allowed(spec, candidate)) return candidate;
      } while (std::prev_permutation(pick.begin(), pick.end()));
    }
  }
  return IndexSet::all(p);
}

}  // namespace wdsparse
