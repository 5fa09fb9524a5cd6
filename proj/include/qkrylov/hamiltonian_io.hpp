#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkrylov/pauli.hpp"
#include "qkrylov/types.hpp"

namespace qkrylov {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double real_coefficient(const nlohmann::json& c, std::size_t index) {
  const std::string where = "term " + std::to_string(index);
  if (c.is_number()) return c.get<double>();
  // [re, im] pairs are accepted only with a zero imaginary part.
  if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number()) {
    if (c[1].get<double>() != 0.0) {
      throw ParseError(where + ": coefficient has imaginary part " + c[1].dump() +
                       "; Hamiltonians must be Hermitian with real Pauli coefficients");
    }
    return c[0].get<double>();
  }
  throw ParseError(where + ": coefficient must be a real number, got " + c.dump());
}

}  // namespace detail

/// {"n_qubits": n, "terms": [{"pauli": "XZIY", "coeff": 0.5}, ...], "metadata": {...}}
/// Character k of a Pauli label acts on qubit k. Duplicate strings are merged.
inline PauliSum parse_hamiltonian_json(std::string_view text, nlohmann::json* metadata = nullptr) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("Hamiltonian document must be a JSON object");
  if (!doc.contains("n_qubits") || !doc["n_qubits"].is_number_integer()) {
    throw ParseError("missing integer field 'n_qubits'");
  }
  const auto n = doc["n_qubits"].get<long long>();
  if (n < 1 || n > static_cast<long long>(PauliString::kMaxQubits)) {
    throw ParseError("n_qubits must lie in [1, " + std::to_string(PauliString::kMaxQubits) + "]");
  }
  if (!doc.contains("terms") || !doc["terms"].is_array()) {
    throw ParseError("missing array field 'terms'");
  }
  std::vector<PauliTerm> terms;
  std::size_t index = 0;
  for (const auto& t : doc["terms"]) {
    const std::string where = "term " + std::to_string(index);
    if (!t.is_object() || !t.contains("pauli") || !t["pauli"].is_string() || !t.contains("coeff")) {
      throw ParseError(where + ": expected {\"pauli\": string, \"coeff\": number}");
    }
    const auto label = t["pauli"].get<std::string>();
    if (label.size() != static_cast<std::size_t>(n)) {
      throw ParseError(where + ": Pauli string '" + label + "' has length " +
                       std::to_string(label.size()) + ", expected n_qubits = " + std::to_string(n));
    }
    const double c = detail::real_coefficient(t["coeff"], index);
    try {
      terms.push_back({c, PauliString::from_label(label)});
    } catch (const InvalidInput& e) {
      throw ParseError(where + ": " + e.what());
    }
    ++index;
  }
  if (metadata) *metadata = doc.value("metadata", nlohmann::json::object());
  return PauliSum(static_cast<std::size_t>(n), terms);
}

/// Plain text: one "coeff PAULI" pair per line; '#' starts a comment.
inline PauliSum parse_hamiltonian_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::size_t n = 0;
  std::vector<PauliTerm> terms;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string coeff_text, label, extra;
    if (!(fields >> coeff_text)) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (!(fields >> label) || (fields >> extra)) {
      throw ParseError(where + ": expected '<coeff> <pauli>'");
    }
    double c = 0.0;
    std::size_t pos = 0;
    try {
      c = std::stod(coeff_text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != coeff_text.size()) {
      throw ParseError(where + ": coefficient '" + coeff_text + "' is not a real number");
    }
    if (n == 0) n = label.size();
    if (label.size() != n) {
      throw ParseError(where + ": Pauli string '" + label + "' has length " +
                       std::to_string(label.size()) + ", expected " + std::to_string(n));
    }
    try {
      terms.push_back({c, PauliString::from_label(label)});
    } catch (const InvalidInput& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  if (terms.empty()) throw ParseError("no Hamiltonian terms found");
  return PauliSum(n, terms);
}

/// JSON when the first non-blank character is '{', the text format otherwise.
inline PauliSum parse_hamiltonian_file(const std::string& path, nlohmann::json* metadata = nullptr) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open Hamiltonian file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && text[first] == '{') return parse_hamiltonian_json(text, metadata);
    return parse_hamiltonian_text(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline std::string serialize_hamiltonian_json(const PauliSum& h,
                                              const nlohmann::json& metadata = nlohmann::json::object()) {
  nlohmann::json doc;
  doc["n_qubits"] = h.n_qubits();
  doc["terms"] = nlohmann::json::array();
  for (const auto& t : h.terms()) {
    doc["terms"].push_back({{"pauli", t.string.label()}, {"coeff", t.coeff}});
  }
  doc["metadata"] = metadata;
  return doc.dump(2) + "\n";
}

}  // namespace qkrylov
