#include "povmlab/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace povmlab::io {

using nlohmann::json;

namespace {

Eigen::Index read_dim(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j["dim"].is_number_integer()) {
    throw ParseError("document needs an integer \"dim\" field");
  }
  const auto d = j["dim"].get<long long>();
  if (d < 1) throw ParseError(fmt::format("dim must be positive, got {}", d));
  return static_cast<Eigen::Index>(d);
}

const json& read_array(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw ParseError(fmt::format("document needs an array \"{}\"", key));
  }
  return j[key];
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, Eigen::Index dim) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
    throw ParseError(fmt::format("matrix must have {} rows", dim));
  }
  Matrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      throw ParseError(fmt::format("matrix row {} must have {} entries", r, dim));
    }
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto& z = row[c];
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
        throw ParseError(fmt::format("entry ({}, {}) must be [re, im]", r, c));
      }
      m(r, c) = Complex(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

json ensemble_to_json(const StateEnsemble& e) {
  json states = json::array();
  for (const auto& rho : e.states) states.push_back(matrix_to_json(rho.matrix()));
  return json{{"dim", e.dim()}, {"priors", e.priors}, {"states", std::move(states)}};
}

StateEnsemble ensemble_from_json(const json& j) {
  const auto dim = read_dim(j);
  const auto& priors = read_array(j, "priors");
  const auto& states = read_array(j, "states");
  StateEnsemble e;
  for (const auto& p : priors) {
    if (!p.is_number()) throw ParseError("priors must be numbers");
    e.priors.push_back(p.get<double>());
  }
  for (std::size_t k = 0; k < states.size(); ++k) {
    try {
      e.states.emplace_back(matrix_from_json(states[k], dim));
    } catch (const ValidationError& err) {
      throw ValidationError(fmt::format("state {}: {}", k, err.what()));
    }
  }
  return e;
}

json povm_to_json(const Povm& povm) {
  json elements = json::array();
  for (const auto& el : povm.elements) elements.push_back(matrix_to_json(el.matrix()));
  return json{{"dim", povm.dim()}, {"elements", std::move(elements)}};
}

Povm povm_from_json(const json& j) {
  const auto dim = read_dim(j);
  const auto& elements = read_array(j, "elements");
  Povm povm;
  for (std::size_t k = 0; k < elements.size(); ++k) {
    try {
      povm.elements.emplace_back(matrix_from_json(elements[k], dim));
    } catch (const ValidationError& err) {
      throw ValidationError(fmt::format("element {}: {}", k, err.what()));
    }
  }
  return povm;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_json(const std::filesystem::path& path) {
  const auto text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(fmt::format("{}: {}", path.string(), err.what()));
  }
}

StateEnsemble load_ensemble(const std::filesystem::path& path) {
  return ensemble_from_json(read_json(path));
}

Povm load_povm(const std::filesystem::path& path) { return povm_from_json(read_json(path)); }

}  // namespace povmlab::io
