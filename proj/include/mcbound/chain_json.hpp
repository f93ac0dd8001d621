#pragma once

// JSON form of a transition matrix: {"size": n, "rows": [["1/4","0",...],...]}.
// Entries are "p/q" strings so the matrix round-trips exactly.

#include <fstream>
#include <string>

#include <json.hpp>

#include "mcbound/finite_chain.hpp"

namespace mcb {

inline nlohmann::json matrix_to_json(const StochasticMatrix& p) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < p.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& v : p.row(i)) row.push_back(to_string(v));
    rows.push_back(std::move(row));
  }
  return {{"size", p.size()}, {"rows", std::move(rows)}};
}

inline StochasticMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("size") || !j.contains("rows"))
    throw InvalidArgument("matrix JSON needs \"size\" and \"rows\"");
  for (const auto& [key, _] : j.items())
    if (key != "size" && key != "rows") throw InvalidArgument("unknown matrix field \"" + key + "\"");
  if (!j["size"].is_number_unsigned()) throw InvalidArgument("\"size\" must be a positive integer");
  const auto n = j["size"].get<std::size_t>();
  const auto& rows = j["rows"];
  if (!rows.is_array() || rows.size() != n) throw InvalidArgument("\"rows\" must hold size rows");
  SquareMatrix<Rational> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array() || rows[i].size() != n)
      throw InvalidArgument("row " + std::to_string(i + 1) + " must hold size entries");
    for (std::size_t k = 0; k < n; ++k) {
      const auto& e = rows[i][k];
      if (e.is_string()) {
        m(i, k) = parse_rational(e.get<std::string>());
      } else if (e.is_number_integer()) {
        m(i, k) = Rational(e.get<long>());
      } else {
        throw InvalidArgument("matrix entries must be \"p/q\" strings or integers");
      }
    }
  }
  return StochasticMatrix(std::move(m));
}

inline StochasticMatrix load_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open matrix file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("matrix file '" + path + "' is not valid JSON: " + e.what());
  }
  return matrix_from_json(j);
}

}  // namespace mcb
