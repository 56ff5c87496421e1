#include "efcp/law_config.hpp"

#include <cmath>

#include "efcp/errors.hpp"

namespace efcp {

using nlohmann::json;

namespace {

const json& field(const json& j, const std::string& name, const std::string& where) {
  if (!j.is_object() || !j.contains(name))
    throw InvalidInput(where + ": missing field \"" + name + "\"");
  return j.at(name);
}

template <class T>
T as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw InvalidInput(where + ": " + e.what());
  }
}

double weight(const json& entry, const std::string& at) {
  const auto w = as<double>(field(entry, "weight", at), at + ".weight");
  if (!(w >= 0.0) || !std::isfinite(w))
    throw InvalidInput(at + ".weight: must be a nonnegative number");
  return w;
}

PaintboxLaw parse(const json& j, const std::string& where) {
  const auto kind = as<std::string>(field(j, "kind", where), where + ".kind");
  try {
    if (kind == "point_mass")
      return PaintboxLaw::point_mass(stochastic_matrix_from_json(field(j, "columns", where)));
    if (kind == "atomic") {
      const json& atoms = field(j, "atoms", where);
      if (!atoms.is_array()) throw InvalidInput(where + ".atoms: expected an array");
      std::vector<StochasticMatrix> mats;
      std::vector<double> weights;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        const std::string at = where + ".atoms[" + std::to_string(i) + "]";
        weights.push_back(weight(atoms[i], at));
        mats.push_back(stochastic_matrix_from_json(field(atoms[i], "columns", at)));
      }
      return PaintboxLaw::atomic(std::move(mats), std::move(weights));
    }
    if (kind == "dirichlet_columns")
      return PaintboxLaw::dirichlet_columns(
          as<std::vector<std::vector<double>>>(field(j, "alphas", where), where + ".alphas"));
    if (kind == "self_similar")
      return PaintboxLaw::self_similar(
          as<std::vector<double>>(field(j, "alpha", where), where + ".alpha"));
    if (kind == "permutation_mix") {
      if (j.value("uniform", false))
        return PaintboxLaw::uniform_permutations(as<int>(field(j, "k", where), where + ".k"));
      const json& perms = field(j, "perms", where);
      if (!perms.is_array()) throw InvalidInput(where + ".perms: expected an array");
      std::vector<std::vector<int>> ps;
      std::vector<double> weights;
      for (std::size_t i = 0; i < perms.size(); ++i) {
        const std::string at = where + ".perms[" + std::to_string(i) + "]";
        auto p = as<std::vector<int>>(field(perms[i], "perm", at), at + ".perm");
        for (int& c : p) --c;
        ps.push_back(std::move(p));
        weights.push_back(weight(perms[i], at));
      }
      return PaintboxLaw::permutation_mix(std::move(ps), std::move(weights));
    }
    if (kind == "mixture") {
      const json& comps = field(j, "components", where);
      if (!comps.is_array()) throw InvalidInput(where + ".components: expected an array");
      std::vector<PaintboxLaw> laws;
      std::vector<double> weights;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string at = where + ".components[" + std::to_string(i) + "]";
        weights.push_back(weight(comps[i], at));
        laws.push_back(parse(field(comps[i], "law", at), at + ".law"));
      }
      return PaintboxLaw::mixture(std::move(laws), std::move(weights));
    }
  } catch (const InvalidInput& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    throw InvalidInput(where + ": " + msg);
  }
  throw InvalidInput(where + ".kind: unknown law kind \"" + kind + "\"");
}

}  // namespace

json to_json(const StochasticMatrix& s) { return columns_of(s); }

StochasticMatrix stochastic_matrix_from_json(const json& columns) {
  return StochasticMatrix::from_columns(
      as<std::vector<std::vector<double>>>(columns, "columns"));
}

PaintboxLaw law_from_json(const json& j) { return parse(j, "law"); }

json law_to_json(const PaintboxLaw& law) {
  struct Visitor {
    json operator()(const AtomicLaw& l) const {
      json atoms = json::array();
      for (std::size_t i = 0; i < l.atoms.size(); ++i)
        atoms.push_back({{"weight", l.weights[i]}, {"columns", to_json(l.atoms[i])}});
      return {{"kind", "atomic"}, {"atoms", atoms}};
    }
    json operator()(const DirichletColumnsLaw& l) const {
      return {{"kind", "dirichlet_columns"}, {"alphas", l.alphas}};
    }
    json operator()(const SelfSimilarLaw& l) const {
      return {{"kind", "self_similar"}, {"alpha", l.alpha}};
    }
    json operator()(const PermutationMixLaw& l) const {
      json perms = json::array();
      for (std::size_t i = 0; i < l.perms.size(); ++i) {
        auto p = l.perms[i];
        for (int& c : p) ++c;
        perms.push_back({{"perm", p}, {"weight", l.weights[i]}});
      }
      return {{"kind", "permutation_mix"}, {"perms", perms}};
    }
    json operator()(const PointMassLaw& l) const {
      return {{"kind", "point_mass"}, {"columns", to_json(l.matrix)}};
    }
    json operator()(const MixtureLaw& l) const {
      json comps = json::array();
      for (std::size_t i = 0; i < l.components.size(); ++i)
        comps.push_back({{"weight", l.weights[i]}, {"law", law_to_json(l.components[i])}});
      return {{"kind", "mixture"}, {"components", comps}};
    }
  };
  return std::visit(Visitor{}, law.spec());
}

}  // namespace efcp
