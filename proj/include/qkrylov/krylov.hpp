#pragma once

#include <cmath>
#include <compare>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "qkrylov/exact.hpp"
#include "qkrylov/pauli.hpp"
#include "qkrylov/references.hpp"
#include "qkrylov/types.hpp"

namespace qkrylov {

/// QKS_U projects exp(-i H tau); QKS_H projects H itself.
enum class Variant { qks_u, qks_h };

/// How successive Krylov blocks are generated from the references.
enum class Generator {
  time_evolution,     // U(t) = exp(-i H t), used by both variants
  hamiltonian_power,  // H^k, unnormalized states; noiseless only
};

inline std::string to_string(Variant v) { return v == Variant::qks_u ? "qks-u" : "qks-h"; }

inline Variant parse_variant(std::string_view s) {
  if (s == "qks-u" || s == "qks_u" || s == "QKS-U" || s == "QKS_U" || s == "u") return Variant::qks_u;
  if (s == "qks-h" || s == "qks_h" || s == "QKS-H" || s == "QKS_H" || s == "h") return Variant::qks_h;
  throw InvalidInput("unknown variant '" + std::string(s) + "' (expected qks-u or qks-h)");
}

struct KrylovConfig {
  Variant variant = Variant::qks_u;
  std::size_t K = 0;  // Krylov iterations
  std::size_t B = 1;  // block size
  double t = 1.0;     // generation time step (a.u.)
  double tau = 1.0;   // T-matrix evolution time for QKS-U (a.u.)
  bool normalize_hamiltonian = true;
  Generator generator = Generator::time_evolution;

  std::size_t dimension() const { return (K + 1) * B; }

  void validate() const {
    if (B < 1) throw InvalidInput("KrylovConfig: B must be >= 1");
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("KrylovConfig: t must be > 0");
    if (generator == Generator::hamiltonian_power && variant != Variant::qks_h) {
      throw InvalidInput("KrylovConfig: the Hamiltonian-power generator is only defined for QKS-H");
    }
    if (variant == Variant::qks_u) {
      if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidInput("KrylovConfig: tau must be > 0");
      if (normalize_hamiltonian && (t > std::numbers::pi || tau > std::numbers::pi)) {
        throw InvalidInput("KrylovConfig: QKS-U times must lie in (0, pi] for the normalized Hamiltonian");
      }
    }
  }
};

/// Paper defaults: QKS-U uses the normalized Hamiltonian with t = tau = 1;
/// QKS-H evolves the raw Hamiltonian with t = 1/||H||, the same basis.
inline KrylovConfig default_config(Variant v, double h_norm, std::size_t K = 0,
                                   std::size_t B = 1) {
  KrylovConfig c;
  c.variant = v;
  c.K = K;
  c.B = B;
  if (v == Variant::qks_u) {
    c.t = c.tau = 1.0;
    c.normalize_hamiltonian = true;
  } else {
    c.t = c.tau = 1.0 / h_norm;
    c.normalize_hamiltonian = false;
  }
  return c;
}

/// Factor converting configured times into physical times for the raw H.
inline double time_scale(const KrylovConfig& cfg, double h_norm) {
  if (!cfg.normalize_hamiltonian) return 1.0;
  if (!(h_norm > 0.0)) throw InvalidInput("normalized evolution requires ||H|| > 0");
  return 1.0 / h_norm;
}

/// Energy units per unit eigenphase for QKS-U (||H|| when normalized).
inline double energy_scale(const KrylovConfig& cfg, double h_norm) {
  return cfg.normalize_hamiltonian ? h_norm : 1.0;
}

struct KrylovMatrices {
  CMatrix S;
  CMatrix T;
  KrylovConfig config;
  std::size_t distinct_circuits = 0;
  bool gaussian_approximation = false;  // set when a noisy draw used it

  /// Leading block for fewer iterations (nesting property).
  KrylovMatrices leading(std::size_t K) const;
};

// ---------------------------------------------------------------------------
// Circuit identification

/// One measured expectation value: <ref_bra| O U(steps*t + tau_count*tau) |ref_ket>
/// with O = 1 (overlap) or H (hamiltonian). For the power generator the
/// "steps" field holds the moment order and tau_count is zero.
struct CircuitKey {
  enum class Kind { overlap, hamiltonian };
  Kind kind = Kind::overlap;
  std::size_t bra = 0;
  std::size_t ket = 0;
  long steps = 0;
  int tau_count = 0;

  bool self_conjugate() const { return bra == ket && steps == 0 && tau_count == 0; }
  friend auto operator<=>(const CircuitKey&, const CircuitKey&) = default;
};

struct CircuitRef {
  CircuitKey key;
  bool conjugate = false;  // matrix entry is conj(value(key))
};

namespace detail {

/// tau / t when it is an integer within 1e-12, otherwise -1.
inline long tau_in_steps(const KrylovConfig& cfg) {
  const double r = cfg.tau / cfg.t;
  const double rr = std::round(r);
  if (rr >= 1.0 && std::abs(r - rr) < 1e-12) return static_cast<long>(rr);
  return -1;
}

inline CircuitRef canonical(CircuitKey k, const KrylovConfig& cfg) {
  if (cfg.generator == Generator::hamiltonian_power) {
    if (k.bra > k.ket) {
      std::swap(k.bra, k.ket);
      return {k, true};
    }
    return {k, false};
  }
  const long m = tau_in_steps(cfg);
  if (m > 0 && k.tau_count != 0) {
    k.steps += k.tau_count * m;
    k.tau_count = 0;
  }
  const double total = static_cast<double>(k.steps) * cfg.t + k.tau_count * cfg.tau;
  const bool flip = total < 0.0 || (k.steps == 0 && k.tau_count == 0 && k.bra > k.ket);
  if (flip) {
    std::swap(k.bra, k.ket);
    k.steps = -k.steps;
    k.tau_count = -k.tau_count;
    return {k, true};
  }
  return {k, false};
}

}  // namespace detail

/// Circuit behind S_ij, with i = k*B + b.
inline CircuitRef circuit_for_overlap(const KrylovConfig& cfg, std::size_t i, std::size_t j) {
  const auto ki = static_cast<long>(i / cfg.B), kj = static_cast<long>(j / cfg.B);
  CircuitKey key{CircuitKey::Kind::overlap, i % cfg.B, j % cfg.B, 0, 0};
  key.steps = cfg.generator == Generator::hamiltonian_power ? ki + kj : kj - ki;
  return detail::canonical(key, cfg);
}

/// Circuit behind T_ij.
inline CircuitRef circuit_for_projected(const KrylovConfig& cfg, std::size_t i, std::size_t j) {
  const auto ki = static_cast<long>(i / cfg.B), kj = static_cast<long>(j / cfg.B);
  CircuitKey key{CircuitKey::Kind::overlap, i % cfg.B, j % cfg.B, 0, 0};
  if (cfg.generator == Generator::hamiltonian_power) {
    key.steps = ki + kj + 1;
  } else if (cfg.variant == Variant::qks_u) {
    key.steps = kj - ki;
    key.tau_count = 1;
  } else {
    key.kind = CircuitKey::Kind::hamiltonian;
    key.steps = kj - ki;
  }
  return detail::canonical(key, cfg);
}

/// Every distinct circuit needed for S and T, in canonical order.
inline std::set<CircuitKey> distinct_circuits(const KrylovConfig& cfg) {
  std::set<CircuitKey> keys;
  const std::size_t d = cfg.dimension();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      keys.insert(circuit_for_overlap(cfg, i, j).key);
      keys.insert(circuit_for_projected(cfg, i, j).key);
    }
  }
  return keys;
}

/// Number of distinct expectation values for S and T after merging
/// Hermitian-conjugate pairs and S/T coincidences (tau a multiple of t).
inline std::size_t count_distinct_circuits(const KrylovConfig& cfg) {
  return distinct_circuits(cfg).size();
}

// ---------------------------------------------------------------------------
// Exact assembly

/// Hamiltonian together with its spectral data; the common input of the
/// Krylov builders.
struct HamiltonianData {
  const PauliSum& h;
  const SpectralDecomposition& spectrum;
  double norm;

  HamiltonianData(const PauliSum& h_, const SpectralDecomposition& d)
      : h(h_), spectrum(d), norm(spectral_norm(d)) {}
};

/// Applies the generator k times to ref.
inline StateVector krylov_state(const StateVector& ref, std::size_t k,
                                const HamiltonianData& ham, const KrylovConfig& cfg) {
  if (cfg.generator == Generator::hamiltonian_power) {
    StateVector v = ref;
    for (std::size_t p = 0; p < k; ++p) v = apply_sum(ham.h, v);
    return v;
  }
  const double dt = cfg.t * time_scale(cfg, ham.norm);
  return evolve(ham.spectrum, ref, static_cast<double>(k) * dt);
}

/// f(H)|v>: H for QKS-H (and the power generator), U(tau) for QKS-U.
inline StateVector apply_projected_operator(const StateVector& v, const HamiltonianData& ham,
                                            const KrylovConfig& cfg) {
  if (cfg.variant == Variant::qks_h) return apply_sum(ham.h, v);
  return evolve(ham.spectrum, v, cfg.tau * time_scale(cfg, ham.norm));
}

/// Ordered basis: all B references at power 0, then power 1, ... up to K.
inline std::vector<StateVector> build_basis(std::span<const ReferenceState> refs,
                                            const HamiltonianData& ham,
                                            const KrylovConfig& cfg) {
  cfg.validate();
  if (refs.empty()) throw InvalidInput("build_basis: no references");
  if (refs.size() != cfg.B) {
    throw InvalidInput("build_basis: got " + std::to_string(refs.size()) +
                       " references for block size " + std::to_string(cfg.B));
  }
  std::vector<StateVector> basis;
  basis.reserve(cfg.dimension());
  for (std::size_t k = 0; k <= cfg.K; ++k) {
    for (const auto& r : refs) basis.push_back(krylov_state(r.state, k, ham, cfg));
  }
  return basis;
}

inline KrylovMatrices assemble_exact(std::span<const StateVector> basis,
                                     const HamiltonianData& ham, const KrylovConfig& cfg) {
  if (basis.empty()) throw InvalidInput("assemble_exact: empty basis");
  const auto d = static_cast<Eigen::Index>(basis.size());
  CMatrix S(d, d), T(d, d);
  std::vector<StateVector> images;
  images.reserve(basis.size());
  for (const auto& v : basis) images.push_back(apply_projected_operator(v, ham, cfg));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      S(i, j) = basis[i].dot(basis[j]);
      T(i, j) = basis[i].dot(images[j]);
    }
  }
  return {std::move(S), std::move(T), cfg, count_distinct_circuits(cfg), false};
}

/// Incrementally grown Krylov space: each extend() appends one block of B
/// states and the matching block row/column of S and T.
class KrylovSpace {
 public:
  KrylovSpace(std::vector<ReferenceState> refs, const HamiltonianData& ham, KrylovConfig cfg)
      : refs_(std::move(refs)), ham_(ham), cfg_(cfg) {
    cfg_.K = 0;
    cfg_.validate();
    if (refs_.empty()) throw InvalidInput("KrylovSpace: no references");
    if (refs_.size() != cfg_.B) {
      throw InvalidInput("KrylovSpace: reference count does not match block size");
    }
    append_block(0);
  }

  std::size_t iterations() const { return cfg_.K; }
  const KrylovConfig& config() const { return cfg_; }
  const std::vector<ReferenceState>& references() const { return refs_; }
  const std::vector<StateVector>& basis() const { return basis_; }
  const HamiltonianData& hamiltonian() const { return ham_; }

  void extend() {
    ++cfg_.K;
    append_block(cfg_.K);
  }

  void grow_to(std::size_t K) {
    while (cfg_.K < K) extend();
  }

  /// Exact matrices for K <= iterations().
  KrylovMatrices matrices(std::size_t K) const {
    if (K > cfg_.K) throw InvalidInput("KrylovSpace::matrices: K beyond grown size");
    KrylovConfig c = cfg_;
    c.K = K;
    const auto d = static_cast<Eigen::Index>(c.dimension());
    return {S_.topLeftCorner(d, d), T_.topLeftCorner(d, d), c, count_distinct_circuits(c), false};
  }

  KrylovMatrices matrices() const { return matrices(cfg_.K); }

 private:
  void append_block(std::size_t k) {
    const auto old = static_cast<Eigen::Index>(basis_.size());
    for (const auto& r : refs_) {
      basis_.push_back(krylov_state(r.state, k, ham_, cfg_));
      images_.push_back(apply_projected_operator(basis_.back(), ham_, cfg_));
    }
    const auto d = static_cast<Eigen::Index>(basis_.size());
    S_.conservativeResize(d, d);
    T_.conservativeResize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = (i < old ? old : 0); j < d; ++j) {
        S_(i, j) = basis_[i].dot(basis_[j]);
        T_(i, j) = basis_[i].dot(images_[j]);
        if (j != i) {
          S_(j, i) = basis_[j].dot(basis_[i]);
          T_(j, i) = basis_[j].dot(images_[i]);
        }
      }
    }
  }

  std::vector<ReferenceState> refs_;
  HamiltonianData ham_;
  KrylovConfig cfg_;
  std::vector<StateVector> basis_;
  std::vector<StateVector> images_;
  CMatrix S_;
  CMatrix T_;
};

inline KrylovMatrices KrylovMatrices::leading(std::size_t K) const {
  if (K > config.K) throw InvalidInput("KrylovMatrices::leading: K beyond stored size");
  KrylovConfig c = config;
  c.K = K;
  const auto d = static_cast<Eigen::Index>(c.dimension());
  return {S.topLeftCorner(d, d), T.topLeftCorner(d, d), c, count_distinct_circuits(c),
          gaussian_approximation};
}

}  // namespace qkrylov
