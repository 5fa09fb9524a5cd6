#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "qkrylov/pauli.hpp"
#include "qkrylov/types.hpp"

namespace qkrylov {

/// Full Hermitian eigendecomposition of a Pauli-sum Hamiltonian.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;  // ascending
  CMatrix eigenvectors;         // columns
  std::size_t n_qubits = 0;

  Eigen::Index dimension() const { return eigenvalues.size(); }
};

/// Degeneracy tolerance for the ground space, in Hartree.
inline constexpr double kDegeneracyTolerance = 1e-10;

inline SpectralDecomposition diagonalize(const PauliSum& h,
                                         std::size_t dense_cap = kDefaultDenseCap) {
  const CMatrix m = to_dense(h, dense_cap);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("diagonalize: Hermitian eigensolver did not converge for " +
                           std::to_string(h.n_qubits()) + "-qubit Hamiltonian");
  }
  SpectralDecomposition d{solver.eigenvalues(), solver.eigenvectors(), h.n_qubits()};

  // Full residual check up to 1024 states; larger systems spot-check the
  // low end of the spectrum and the top eigenpair.
  const double scale = std::max(1.0, d.eigenvalues.cwiseAbs().maxCoeff());
  const Eigen::Index dim = d.dimension();
  auto residual_of = [&](Eigen::Index k) {
    return (m * d.eigenvectors.col(k) - d.eigenvalues[k] * d.eigenvectors.col(k)).norm();
  };
  double residual = 0.0;
  if (dim <= 1024) {
    for (Eigen::Index k = 0; k < dim; ++k) residual = std::max(residual, residual_of(k));
  } else {
    for (Eigen::Index k = 0; k < 8; ++k) residual = std::max(residual, residual_of(k));
    residual = std::max(residual, residual_of(dim - 1));
  }
  if (residual > 1e-10 * scale) {
    throw NumericalFailure("diagonalize: residual " + std::to_string(residual) +
                           " exceeds 1e-10 * ||H|| = " + std::to_string(1e-10 * scale));
  }
  return d;
}

inline double spectral_norm(const SpectralDecomposition& d) {
  if (d.eigenvalues.size() == 0) return 0.0;
  return d.eigenvalues.cwiseAbs().maxCoeff();
}

/// exp(-i H time) v through the stored eigenbasis.
inline StateVector evolve(const SpectralDecomposition& d, const StateVector& v,
                          double time) {
  if (v.size() != d.dimension()) {
    throw InvalidInput("evolve: vector has " + std::to_string(v.size()) +
                       " amplitudes, expected " + std::to_string(d.dimension()));
  }
  StateVector coords = d.eigenvectors.adjoint() * v;
  for (Eigen::Index k = 0; k < coords.size(); ++k) {
    coords[k] *= std::polar(1.0, -d.eigenvalues[k] * time);
  }
  return d.eigenvectors * coords;
}

struct GroundState {
  double energy = 0.0;
  StateVector state;
  bool degenerate = false;
};

inline GroundState ground_state(const SpectralDecomposition& d) {
  if (d.dimension() == 0) throw InvalidInput("ground_state: empty decomposition");
  GroundState gs{d.eigenvalues[0], d.eigenvectors.col(0), false};
  if (d.dimension() > 1) {
    gs.degenerate = (d.eigenvalues[1] - d.eigenvalues[0]) < kDegeneracyTolerance;
  }
  return gs;
}

}  // namespace qkrylov
