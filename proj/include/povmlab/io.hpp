#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "povmlab/ensemble.hpp"
#include "povmlab/solver.hpp"

namespace povmlab::io {

/// Unreadable file or document that does not follow the schema.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrices are d x d nested arrays of [re, im] pairs.
//
//   ensemble: { "dim": d, "priors": [p_1, ...], "states": [S_1, ...] }
//   povm:     { "dim": d, "elements": [M_0, M_1, ...] }   (M_0 inconclusive)
//
// Structural problems throw ParseError. Operators that are not Hermitian
// throw ValidationError; traces, priors and positivity are left to
// validate() so that every violation can be reported.

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index dim);

nlohmann::json ensemble_to_json(const StateEnsemble& e);
StateEnsemble ensemble_from_json(const nlohmann::json& j);

nlohmann::json povm_to_json(const Povm& povm);
Povm povm_from_json(const nlohmann::json& j);

std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

StateEnsemble load_ensemble(const std::filesystem::path& path);
Povm load_povm(const std::filesystem::path& path);

}  // namespace povmlab::io
