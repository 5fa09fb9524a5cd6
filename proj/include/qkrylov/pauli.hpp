#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <map>
#include <utility>
#include <vector>

#include "qkrylov/types.hpp"

namespace qkrylov {

/// Tensor product of single-qubit Paulis, stored as X and Z bit masks.
///
/// Qubit k corresponds to bit k of a basis-state index and to character k of
/// the text label, so "XZ" is X on qubit 0 and Z on qubit 1. A qubit with both
/// bits set carries Y = i X Z.
class PauliString {
 public:
  static constexpr std::size_t kMaxQubits = 62;

  PauliString() = default;

  PauliString(std::size_t n_qubits, std::uint64_t x_mask, std::uint64_t z_mask)
      : n_qubits_(n_qubits), x_(x_mask), z_(z_mask) {
    if (n_qubits == 0 || n_qubits > kMaxQubits) {
      throw InvalidInput("PauliString: qubit count must be in [1, 62]");
    }
    const std::uint64_t valid = (std::uint64_t{1} << n_qubits) - 1;
    if ((x_mask & ~valid) != 0 || (z_mask & ~valid) != 0) {
      throw InvalidInput("PauliString: mask has bits beyond n_qubits");
    }
  }

  static PauliString identity(std::size_t n_qubits) { return {n_qubits, 0, 0}; }

  /// Parses a label over {I, X, Y, Z}; its length sets the qubit count.
  static PauliString from_label(std::string_view label) {
    if (label.empty() || label.size() > kMaxQubits) {
      throw InvalidInput("PauliString: label length must be in [1, 62]");
    }
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    for (std::size_t k = 0; k < label.size(); ++k) {
      const std::uint64_t bit = std::uint64_t{1} << k;
      switch (label[k]) {
        case 'I': case 'i': break;
        case 'X': case 'x': x |= bit; break;
        case 'Y': case 'y': x |= bit; z |= bit; break;
        case 'Z': case 'z': z |= bit; break;
        default:
          throw InvalidInput("PauliString: invalid character '" +
                             std::string(1, label[k]) + "' in label '" +
                             std::string(label) + "'");
      }
    }
    return {label.size(), x, z};
  }

  std::string label() const {
    std::string out(n_qubits_, 'I');
    for (std::size_t k = 0; k < n_qubits_; ++k) {
      const bool xb = (x_ >> k) & 1U;
      const bool zb = (z_ >> k) & 1U;
      out[k] = xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
    }
    return out;
  }

  std::size_t n_qubits() const { return n_qubits_; }
  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }
  bool is_identity() const { return x_ == 0 && z_ == 0; }

  /// Phase picked up by basis state |b> under this string: P|b> = phase(b) |b ^ x>.
  cplx phase(std::uint64_t basis) const {
    static constexpr cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const int y_count = std::popcount(x_ & z_);
    const int z_parity = std::popcount(basis & z_) & 1;
    const cplx p = kIPow[y_count & 3];
    return z_parity ? -p : p;
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::size_t n_qubits_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

struct PauliTerm {
  double coeff = 0.0;
  PauliString string;

  friend bool operator==(const PauliTerm&, const PauliTerm&) = default;
};

/// Real-weighted sum of Pauli strings in canonical merged form.
///
/// Duplicate strings are merged on construction (first-appearance order is
/// kept) and terms whose merged |coeff| falls below 1e-15 are dropped.
class PauliSum {
 public:
  static constexpr double kDropTolerance = 1e-15;

  explicit PauliSum(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits == 0 || n_qubits > PauliString::kMaxQubits) {
      throw InvalidInput("PauliSum: qubit count must be in [1, 62]");
    }
  }

  PauliSum(std::size_t n_qubits, std::span<const PauliTerm> terms)
      : PauliSum(n_qubits) {
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::size_t> index;
    std::vector<PauliTerm> merged;
    for (const auto& t : terms) {
      if (t.string.n_qubits() != n_qubits) {
        throw InvalidInput("PauliSum: term '" + t.string.label() + "' has " +
                           std::to_string(t.string.n_qubits()) +
                           " qubits, expected " + std::to_string(n_qubits));
      }
      if (!std::isfinite(t.coeff)) {
        throw InvalidInput("PauliSum: non-finite coefficient");
      }
      auto [it, inserted] = index.try_emplace(
          std::pair{t.string.x_mask(), t.string.z_mask()}, merged.size());
      if (inserted) {
        merged.push_back(t);
      } else {
        merged[it->second].coeff += t.coeff;
      }
    }
    for (auto& t : merged) {
      if (std::abs(t.coeff) >= kDropTolerance) terms_.push_back(std::move(t));
    }
  }

  PauliSum(std::size_t n_qubits, std::initializer_list<PauliTerm> terms)
      : PauliSum(n_qubits, std::span<const PauliTerm>(terms.begin(), terms.size())) {}

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return dimension_for(n_qubits_); }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  std::vector<double> coefficients() const {
    std::vector<double> c;
    c.reserve(terms_.size());
    for (const auto& t : terms_) c.push_back(t.coeff);
    return c;
  }

  friend bool operator==(const PauliSum&, const PauliSum&) = default;

 private:
  std::size_t n_qubits_;
  std::vector<PauliTerm> terms_;
};

inline void check_dimension(std::size_t n_qubits, const StateVector& v,
                            const char* where) {
  if (static_cast<std::size_t>(v.size()) != dimension_for(n_qubits)) {
    throw InvalidInput(std::string(where) + ": vector has " +
                       std::to_string(v.size()) + " amplitudes, expected " +
                       std::to_string(dimension_for(n_qubits)));
  }
}

/// Returns P v without materializing P.
inline StateVector apply_pauli(const PauliString& p, const StateVector& v) {
  check_dimension(p.n_qubits(), v, "apply_pauli");
  StateVector out(v.size());
  const std::uint64_t x = p.x_mask();
  for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(v.size()); ++b) {
    out[static_cast<Eigen::Index>(b ^ x)] = p.phase(b) * v[static_cast<Eigen::Index>(b)];
  }
  return out;
}

/// Transition amplitude <bra|P|ket>.
inline cplx pauli_transition(const StateVector& bra, const PauliString& p,
                             const StateVector& ket) {
  check_dimension(p.n_qubits(), bra, "pauli_transition");
  check_dimension(p.n_qubits(), ket, "pauli_transition");
  const std::uint64_t x = p.x_mask();
  cplx acc{0.0, 0.0};
  for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(ket.size()); ++b) {
    acc += std::conj(bra[static_cast<Eigen::Index>(b ^ x)]) * p.phase(b) *
           ket[static_cast<Eigen::Index>(b)];
  }
  return acc;
}

inline StateVector apply_sum(const PauliSum& h, const StateVector& v) {
  check_dimension(h.n_qubits(), v, "apply_sum");
  StateVector out = StateVector::Zero(v.size());
  for (const auto& term : h.terms()) {
    const std::uint64_t x = term.string.x_mask();
    for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(v.size()); ++b) {
      out[static_cast<Eigen::Index>(b ^ x)] +=
          term.coeff * term.string.phase(b) * v[static_cast<Eigen::Index>(b)];
    }
  }
  return out;
}

inline CMatrix to_dense(const PauliSum& h, std::size_t dense_cap = kDefaultDenseCap) {
  const std::size_t dim = h.dimension();
  if (dim > dense_cap) {
    throw InvalidInput("to_dense: dimension 2^" + std::to_string(h.n_qubits()) +
                       " = " + std::to_string(dim) + " exceeds dense cap " +
                       std::to_string(dense_cap));
  }
  const auto n = static_cast<Eigen::Index>(dim);
  CMatrix m = CMatrix::Zero(n, n);
  for (const auto& term : h.terms()) {
    const std::uint64_t x = term.string.x_mask();
    for (std::uint64_t b = 0; b < dim; ++b) {
      m(static_cast<Eigen::Index>(b ^ x), static_cast<Eigen::Index>(b)) +=
          term.coeff * term.string.phase(b);
    }
  }
  return m;
}

inline double one_norm(const PauliSum& h) {
  double s = 0.0;
  for (const auto& t : h.terms()) s += std::abs(t.coeff);
  return s;
}

enum class ModelKind { tfim_chain, heisenberg_chain };

inline ModelKind parse_model_kind(std::string_view name) {
  if (name == "tfim" || name == "tfim_chain") return ModelKind::tfim_chain;
  if (name == "heisenberg" || name == "heisenberg_chain") return ModelKind::heisenberg_chain;
  throw InvalidInput("unknown model kind '" + std::string(name) + "'");
}

inline std::string to_string(ModelKind k) {
  return k == ModelKind::tfim_chain ? "tfim_chain" : "heisenberg_chain";
}

/// Open-chain spin models.
///   tfim_chain:       -J sum Z_i Z_{i+1} - g sum X_i     params = {J, g}
///   heisenberg_chain:  J sum (XX + YY + ZZ)_{i,i+1}       params = {J}
/// Missing parameters default to 1.
inline PauliSum model_hamiltonian(ModelKind kind, std::size_t n_sites,
                                  std::span<const double> params = {}) {
  if (n_sites < 2) throw InvalidInput("model_hamiltonian: n_sites must be >= 2");
  if (n_sites > PauliString::kMaxQubits) {
    throw InvalidInput("model_hamiltonian: too many sites");
  }
  auto param = [&](std::size_t i) { return i < params.size() ? params[i] : 1.0; };
  auto two_site = [n_sites](char a, std::size_t i) {
    std::string s(n_sites, 'I');
    s[i] = a;
    s[i + 1] = a;
    return PauliString::from_label(s);
  };
  std::vector<PauliTerm> terms;
  switch (kind) {
    case ModelKind::tfim_chain: {
      if (params.size() > 2) throw InvalidInput("tfim_chain takes at most 2 params (J, g)");
      const double j = param(0);
      const double g = param(1);
      for (std::size_t i = 0; i + 1 < n_sites; ++i) terms.push_back({-j, two_site('Z', i)});
      for (std::size_t i = 0; i < n_sites; ++i) {
        std::string s(n_sites, 'I');
        s[i] = 'X';
        terms.push_back({-g, PauliString::from_label(s)});
      }
      break;
    }
    case ModelKind::heisenberg_chain: {
      if (params.size() > 1) throw InvalidInput("heisenberg_chain takes at most 1 param (J)");
      const double j = param(0);
      for (std::size_t i = 0; i + 1 < n_sites; ++i) {
        for (char a : {'X', 'Y', 'Z'}) terms.push_back({j, two_site(a, i)});
      }
      break;
    }
  }
  return PauliSum(n_sites, terms);
}

}  // namespace qkrylov
