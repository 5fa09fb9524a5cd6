#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qkrylov/types.hpp"

namespace qkrylov {

struct ReferenceState {
  StateVector state;
  std::string label;
  double overlap_sq = 0.0;  // |<state|GS>|^2
};

namespace detail {

inline std::string ket_label(std::uint64_t basis, std::size_t n_qubits) {
  std::string s(n_qubits, '0');
  for (std::size_t q = 0; q < n_qubits; ++q) {
    if ((basis >> q) & 1U) s[q] = '1';
  }
  return "|" + s + ">";
}

/// Spatial-orbital occupations with qubits (2k, 2k+1) read as the alpha/beta
/// spin orbitals of orbital k. A trailing unpaired qubit is its own orbital.
inline std::string occupation_pattern(std::uint64_t basis, std::size_t n_qubits) {
  std::string occ;
  for (std::size_t q = 0; q < n_qubits; q += 2) {
    int count = static_cast<int>((basis >> q) & 1U);
    if (q + 1 < n_qubits) count += static_cast<int>((basis >> (q + 1)) & 1U);
    occ.push_back(static_cast<char>('0' + count));
  }
  return occ;
}

inline bool is_open_shell(const std::string& pattern) {
  return pattern.find('1') != std::string::npos;
}

}  // namespace detail

/// Overlaps closer than this are ties, resolved by the smallest basis index.
inline constexpr double kOverlapTieTolerance = 1e-12;

/// Candidate references ranked by overlap with the ground state.
///
/// With grouping, open-shell configurations that share a spatial occupation
/// pattern are merged into one state carrying the ground-state amplitudes
/// restricted to the group; closed-shell configurations stay single basis
/// states.
inline std::vector<ReferenceState> select_references(const StateVector& gs,
                                                     std::size_t n_qubits,
                                                     std::size_t max_refs,
                                                     bool grouping) {
  if (static_cast<std::size_t>(gs.size()) != dimension_for(n_qubits)) {
    throw InvalidInput("select_references: ground state has wrong dimension");
  }
  if (max_refs < 1) throw InvalidInput("select_references: max_refs must be >= 1");
  if (std::abs(gs.norm() - 1.0) > 1e-10) {
    throw InvalidInput("select_references: ground state is not normalized (norm " +
                       std::to_string(gs.norm()) + ")");
  }

  struct Candidate {
    std::vector<std::uint64_t> support;
    double weight = 0.0;
    std::string label;
  };
  std::vector<Candidate> candidates;
  std::map<std::string, std::size_t> group_of_pattern;

  for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(gs.size()); ++b) {
    const double w = std::norm(gs[static_cast<Eigen::Index>(b)]);
    if (w < 1e-14) continue;
    if (grouping) {
      const std::string pattern = detail::occupation_pattern(b, n_qubits);
      if (detail::is_open_shell(pattern)) {
        auto [it, inserted] = group_of_pattern.try_emplace(pattern, candidates.size());
        if (inserted) candidates.push_back({{}, 0.0, "occ:" + pattern});
        candidates[it->second].support.push_back(b);
        candidates[it->second].weight += w;
        continue;
      }
    }
    candidates.push_back({{b}, w, detail::ket_label(b, n_qubits)});
  }
  if (candidates.empty()) {
    throw InvalidInput("select_references: every basis overlap with the ground state is below 1e-14");
  }

  // Descending weight, then runs of near-equal weights reordered by their
  // smallest basis index (support vectors are built in ascending order).
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.weight > b.weight; });
  for (std::size_t lo = 0; lo < candidates.size();) {
    std::size_t hi = lo + 1;
    while (hi < candidates.size() &&
           candidates[hi - 1].weight - candidates[hi].weight <= kOverlapTieTolerance) {
      ++hi;
    }
    std::sort(candidates.begin() + static_cast<std::ptrdiff_t>(lo),
              candidates.begin() + static_cast<std::ptrdiff_t>(hi),
              [](const Candidate& a, const Candidate& b) {
                return a.support.front() < b.support.front();
              });
    lo = hi;
  }

  std::vector<ReferenceState> refs;
  const std::size_t count = std::min(max_refs, candidates.size());
  refs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& c = candidates[i];
    StateVector s = StateVector::Zero(gs.size());
    if (c.support.size() == 1) {
      s[static_cast<Eigen::Index>(c.support.front())] = 1.0;
    } else {
      for (auto b : c.support) {
        s[static_cast<Eigen::Index>(b)] = gs[static_cast<Eigen::Index>(b)];
      }
      s /= s.norm();
    }
    const double overlap = std::norm(s.dot(gs));
    refs.push_back({std::move(s), c.label, overlap});
  }
  return refs;
}

inline ReferenceState single_reference(const StateVector& gs, std::size_t n_qubits,
                                       bool grouping = true) {
  return select_references(gs, n_qubits, 1, grouping).front();
}

}  // namespace qkrylov
