#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkrylov/types.hpp"

namespace qkrylov {

enum class FilterMode { off, metric_only, filtering };

inline std::string to_string(FilterMode m) {
  switch (m) {
    case FilterMode::off: return "off";
    case FilterMode::metric_only: return "metric_only";
    case FilterMode::filtering: return "filtering";
  }
  return "off";
}

inline FilterMode parse_filter_mode(std::string_view s) {
  if (s == "off") return FilterMode::off;
  if (s == "metric_only" || s == "metric-only" || s == "metric") return FilterMode::metric_only;
  if (s == "filtering" || s == "filter" || s == "on") return FilterMode::filtering;
  throw InvalidInput("unknown filter mode '" + std::string(s) +
                     "' (expected off, metric_only, filtering)");
}

struct FilterVerdict {
  cplx eigenvalue;
  bool accepted = false;
  double deviation = 0.0;
  double threshold = 0.0;
  double energy = 0.0;
  bool near_branch_cut = false;  // unitary only: |arg| within the tolerance of pi
};

/// Unitarity check on QKS-U eigenvalues. `h_norm` is the energy scale of the
/// evolution: ||H|| for the normalized Hamiltonian, 1 for the raw one.
inline std::vector<FilterVerdict> unitary_filter(std::span<const cplx> lams, double tau,
                                                 double h_norm) {
  if (!(tau > 0.0)) throw InvalidInput("unitary_filter: tau must be > 0");
  if (!(h_norm > 0.0)) throw InvalidInput("unitary_filter: h_norm must be > 0");
  const double threshold = kChemicalAccuracy * tau / h_norm;
  std::vector<FilterVerdict> out;
  out.reserve(lams.size());
  for (const cplx& lam : lams) {
    FilterVerdict v;
    v.eigenvalue = lam;
    v.deviation = std::abs(1.0 - std::abs(lam));
    v.threshold = threshold;
    v.accepted = v.deviation < threshold;
    const double phase = std::arg(lam);  // (-pi, pi]
    v.energy = -phase * h_norm / tau;
    v.near_branch_cut = std::numbers::pi - std::abs(phase) < kChemicalAccuracy;
    out.push_back(v);
  }
  return out;
}

/// Real-spectrum check on QKS-H eigenvalues.
inline std::vector<FilterVerdict> imaginary_filter(std::span<const cplx> lams) {
  std::vector<FilterVerdict> out;
  out.reserve(lams.size());
  for (const cplx& lam : lams) {
    FilterVerdict v;
    v.eigenvalue = lam;
    v.deviation = std::abs(lam.imag());
    v.threshold = kChemicalAccuracy;
    v.accepted = v.deviation < kChemicalAccuracy;
    v.energy = lam.real();
    out.push_back(v);
  }
  return out;
}

struct GroundEstimate {
  double energy = 0.0;
  FilterVerdict verdict;
};

/// Lowest extracted energy, over accepted verdicts when filtering. nullopt
/// means every candidate was eliminated.
inline std::optional<GroundEstimate> ground_energy(std::span<const FilterVerdict> verdicts,
                                                   bool filtering_enabled) {
  if (verdicts.empty()) throw InvalidInput("ground_energy: no eigenvalues");
  const FilterVerdict* best = nullptr;
  for (const auto& v : verdicts) {
    if (filtering_enabled && !v.accepted) continue;
    if (!best || v.energy < best->energy) best = &v;
  }
  if (!best) return std::nullopt;
  return GroundEstimate{best->energy, *best};
}

}  // namespace qkrylov
