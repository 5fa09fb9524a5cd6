#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qkrylov {

using cplx = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Largest dense dimension (2^n) the exact engine builds unless overridden.
inline constexpr std::size_t kDefaultDenseCap = std::size_t{1} << 12;

/// Chemical accuracy in Hartree (1 kcal/mol).
inline constexpr double kChemicalAccuracy = 1.6e-3;

/// Input violates a documented precondition (bad dimensions, malformed data).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to converge or a residual check failed.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected run configuration; the CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::size_t dimension_for(std::size_t n_qubits) {
  return std::size_t{1} << n_qubits;
}

}  // namespace qkrylov
