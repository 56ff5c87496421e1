#pragma once

// JSON form of paintbox laws. One object per law, tagged by "kind":
//
//   {"kind": "point_mass", "columns": [[0.8, 0.2], [0.3, 0.7]]}
//   {"kind": "atomic", "atoms": [{"weight": 0.5, "columns": [[..], [..]]}, ...]}
//   {"kind": "dirichlet_columns", "alphas": [[1, 2], [2, 1]]}
//   {"kind": "self_similar", "alpha": [1, 1]}
//   {"kind": "permutation_mix", "perms": [{"perm": [2, 1], "weight": 1}]}
//   {"kind": "permutation_mix", "uniform": true, "k": 3}
//   {"kind": "mixture", "components": [{"weight": 0.5, "law": {...}}, ...]}
//
// Matrices are given as lists of columns. Permutations are 1-based:
// perm[c] is the color that color c + 1 is repainted with.

#include <json.hpp>

#include "efcp/paintbox.hpp"

namespace efcp {

/// Throws InvalidInput naming the offending field.
PaintboxLaw law_from_json(const nlohmann::json& j);
nlohmann::json law_to_json(const PaintboxLaw& law);

nlohmann::json to_json(const StochasticMatrix& s);
StochasticMatrix stochastic_matrix_from_json(const nlohmann::json& columns);

}  // namespace efcp
