#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "qkrylov/krylov.hpp"
#include "qkrylov/pauli.hpp"
#include "qkrylov/rng.hpp"
#include "qkrylov/types.hpp"

namespace qkrylov {

/// Finite-sampling model for Hadamard-test estimates.
struct NoiseSpec {
  std::uint64_t shots_per_part = 1'000'000;  // M, per real and per imaginary part
  std::uint64_t seed = 0;
  bool enabled = false;
  bool sample_diagonal = true;  // sample S diagonal circuits even though they are exactly 1

  /// Statistical error scale used by the adaptive thresholds: 1/sqrt(M).
  double noise_level() const {
    return enabled ? 1.0 / std::sqrt(static_cast<double>(shots_per_part)) : 0.0;
  }
};

/// Above this shot count a moment-matched Gaussian replaces the binomial draw.
inline constexpr std::uint64_t kExactBinomialLimit = 10'000'000;

inline bool uses_gaussian_approximation(std::uint64_t shots) {
  return shots > kExactBinomialLimit;
}

/// Hadamard-test estimate of x in [-1, 1] from M single-shot outcomes:
/// k ~ Binomial(M, (1+x)/2), estimate 2k/M - 1.
inline double sample_part(double x, std::uint64_t shots, Rng& rng) {
  if (shots == 0) throw InvalidInput("sample_part: shot count must be positive");
  if (!(std::abs(x) <= 1.0 + 1e-9)) {
    throw InvalidInput("sample_part: value " + std::to_string(x) + " outside [-1, 1]");
  }
  const double p = std::clamp((1.0 + x) / 2.0, 0.0, 1.0);
  if (p >= 1.0) return 1.0;
  if (p <= 0.0) return -1.0;
  const auto m = static_cast<double>(shots);
  double k = 0.0;
  if (uses_gaussian_approximation(shots)) {
    std::normal_distribution<double> normal(m * p, std::sqrt(m * p * (1.0 - p)));
    k = std::clamp(std::round(normal(rng)), 0.0, m);
  } else {
    std::binomial_distribution<std::int64_t> binom(static_cast<std::int64_t>(shots), p);
    k = static_cast<double>(binom(rng));
  }
  return 2.0 * k / m - 1.0;
}

/// Independent estimates of the real and imaginary parts. Self-conjugate
/// circuits (real by construction) only sample the real part.
inline cplx noisy_overlap(cplx value, const NoiseSpec& spec, Rng& real_rng, Rng& imag_rng,
                          bool self_conjugate = false) {
  if (!spec.enabled) return value;
  const double re = sample_part(value.real(), spec.shots_per_part, real_rng);
  const double im =
      self_conjugate ? 0.0 : sample_part(value.imag(), spec.shots_per_part, imag_rng);
  return {re, im};
}

inline cplx noisy_overlap(cplx value, const NoiseSpec& spec, Rng& rng,
                          bool self_conjugate = false) {
  return noisy_overlap(value, spec, rng, rng, self_conjugate);
}

/// Deterministic weighted sampling: m_i = round(|c_i| / sum|c| * M), halves
/// rounded away from zero.
inline std::vector<std::uint64_t> allocate_shots(std::span<const double> coeffs,
                                                 std::uint64_t shots) {
  if (shots == 0) throw InvalidInput("allocate_shots: shot count must be positive");
  double total = 0.0;
  for (double c : coeffs) total += std::abs(c);
  if (!(total > 0.0)) throw InvalidInput("allocate_shots: all coefficients are zero");
  std::vector<std::uint64_t> out;
  out.reserve(coeffs.size());
  for (double c : coeffs) {
    out.push_back(static_cast<std::uint64_t>(
        std::round(std::abs(c) / total * static_cast<double>(shots))));
  }
  return out;
}

/// <bra|H|ket> estimated term by term; term i receives m_i shots per part and
/// contributes nothing when m_i = 0.
inline cplx noisy_hamiltonian_element(const StateVector& bra, const StateVector& ket,
                                      const PauliSum& h, const NoiseSpec& spec,
                                      Rng& real_rng, Rng& imag_rng,
                                      bool self_conjugate = false) {
  const auto& terms = h.terms();
  if (!spec.enabled) {
    cplx acc{0.0, 0.0};
    for (const auto& t : terms) acc += t.coeff * pauli_transition(bra, t.string, ket);
    return acc;
  }
  if (terms.empty()) return {0.0, 0.0};
  const auto coeffs = h.coefficients();
  const auto shots = allocate_shots(coeffs, spec.shots_per_part);
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (shots[i] == 0) continue;
    const cplx exact = pauli_transition(bra, terms[i].string, ket);
    const double re = sample_part(exact.real(), shots[i], real_rng);
    const double im = self_conjugate ? 0.0 : sample_part(exact.imag(), shots[i], imag_rng);
    acc += terms[i].coeff * cplx{re, im};
  }
  return acc;
}

inline cplx noisy_hamiltonian_element(const StateVector& bra, const StateVector& ket,
                                      const PauliSum& h, const NoiseSpec& spec, Rng& rng,
                                      bool self_conjugate = false) {
  return noisy_hamiltonian_element(bra, ket, h, spec, rng, rng, self_conjugate);
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t as_id(long v) { return static_cast<std::uint64_t>(v); }

}  // namespace detail

/// Exact value of one circuit for a time-evolution Krylov space.
inline cplx circuit_value(const CircuitKey& key, std::span<const ReferenceState> refs,
                          const HamiltonianData& ham, const KrylovConfig& cfg) {
  const double scale = time_scale(cfg, ham.norm);
  const double time = (static_cast<double>(key.steps) * cfg.t + key.tau_count * cfg.tau) * scale;
  const StateVector ket = evolve(ham.spectrum, refs[key.ket].state, time);
  if (key.kind == CircuitKey::Kind::overlap) return refs[key.bra].state.dot(ket);
  return refs[key.bra].state.dot(apply_sum(ham.h, ket));
}

/// Shot-noise corrupted S and T for K iterations.
///
/// Every distinct circuit is sampled once from its own stream, derived from
/// (seed, circuit, part), and all matrix entries measuring that circuit share
/// the draw (conjugated for mirrored entries). The result is Hermitian in S
/// by construction and nests: the leading block for K' < K equals the matrices
/// sampled directly at K'.
inline KrylovMatrices sample_noisy(const KrylovSpace& space, const NoiseSpec& spec,
                                   std::size_t K) {
  KrylovConfig cfg = space.config();
  if (cfg.generator != Generator::time_evolution) {
    throw InvalidInput("sample_noisy: shot noise needs the time-evolution generator");
  }
  if (K > cfg.K) throw InvalidInput("sample_noisy: K beyond grown Krylov space");
  cfg.K = K;
  if (!spec.enabled) return space.matrices(K);

  const auto& refs = space.references();
  const auto& ham = space.hamiltonian();
  std::map<CircuitKey, cplx> sampled;
  for (const auto& key : distinct_circuits(cfg)) {
    const std::uint64_t kind = key.kind == CircuitKey::Kind::overlap ? 0 : 1;
    Rng real_rng = make_stream(spec.seed, {kind, key.bra, key.ket, detail::as_id(key.steps),
                                           detail::as_id(key.tau_count), 0});
    Rng imag_rng = make_stream(spec.seed, {kind, key.bra, key.ket, detail::as_id(key.steps),
                                           detail::as_id(key.tau_count), 1});
    const bool self_conj = key.self_conjugate();
    cplx value;
    if (key.kind == CircuitKey::Kind::overlap) {
      const cplx exact = circuit_value(key, refs, ham, cfg);
      if (self_conj && !spec.sample_diagonal) {
        value = {exact.real(), 0.0};
      } else {
        value = noisy_overlap(exact, spec, real_rng, imag_rng, self_conj);
      }
    } else {
      const double time = static_cast<double>(key.steps) * cfg.t * time_scale(cfg, ham.norm);
      const StateVector ket = evolve(ham.spectrum, refs[key.ket].state, time);
      value = noisy_hamiltonian_element(refs[key.bra].state, ket, ham.h, spec, real_rng,
                                        imag_rng, self_conj);
    }
    sampled.emplace(key, value);
  }

  const auto d = static_cast<Eigen::Index>(cfg.dimension());
  CMatrix S(d, d), T(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto s = circuit_for_overlap(cfg, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      const auto t = circuit_for_projected(cfg, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      const cplx sv = sampled.at(s.key);
      const cplx tv = sampled.at(t.key);
      S(i, j) = s.conjugate ? std::conj(sv) : sv;
      T(i, j) = t.conjugate ? std::conj(tv) : tv;
    }
  }
  return {std::move(S), std::move(T), cfg, sampled.size(),
          uses_gaussian_approximation(spec.shots_per_part)};
}

}  // namespace qkrylov
