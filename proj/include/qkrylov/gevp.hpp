#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qkrylov/types.hpp"

namespace qkrylov {

enum class RegMethod { none, fixed, elbow, lit_a, lit_b };

/// Singular-value truncation strategy for the overlap matrix.
struct RegularizationSpec {
  RegMethod method = RegMethod::none;
  double sigma = 0.0;        // fixed threshold
  double noise_level = 0.0;  // 1/sqrt(M), zero when noiseless
  double n_f = 1.0;          // algorithm-dependent normalization for lit_a

  static RegularizationSpec none() { return {}; }
  static RegularizationSpec fixed(double s) {
    if (!(s >= 0.0)) throw InvalidInput("fixed threshold must be >= 0");
    return {RegMethod::fixed, s, 0.0, 1.0};
  }
  static RegularizationSpec of(RegMethod m) { return {m, 0.0, 0.0, 1.0}; }
};

inline std::string format_sigma(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", s);
  return buf;
}

inline std::string label(const RegularizationSpec& r) {
  switch (r.method) {
    case RegMethod::none: return "none";
    case RegMethod::fixed: return "fixed:" + format_sigma(r.sigma);
    case RegMethod::elbow: return "elbow";
    case RegMethod::lit_a: return "lit_a";
    case RegMethod::lit_b: return "lit_b";
  }
  return "none";
}

/// Parses "none", "fixed:<sigma>", "elbow", "lit_a", "lit_b".
inline RegularizationSpec parse_regularization(std::string_view text) {
  if (text == "none") return RegularizationSpec::none();
  if (text == "elbow") return RegularizationSpec::of(RegMethod::elbow);
  if (text == "lit_a" || text == "lit-a") return RegularizationSpec::of(RegMethod::lit_a);
  if (text == "lit_b" || text == "lit-b") return RegularizationSpec::of(RegMethod::lit_b);
  if (text.starts_with("fixed:")) {
    const std::string num(text.substr(6));
    std::size_t pos = 0;
    double s = 0.0;
    try {
      s = std::stod(num, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != num.size() || !std::isfinite(s) || s < 0.0) {
      throw InvalidInput("invalid fixed threshold '" + num + "'");
    }
    return RegularizationSpec::fixed(s);
  }
  throw InvalidInput("unknown regularization '" + std::string(text) +
                     "' (expected none, fixed:<sigma>, elbow, lit_a, lit_b)");
}

/// S = W * diag(sigma) * Z with W, Z unitary and sigma descending.
struct SvdResult {
  CMatrix W;
  Eigen::VectorXd sigma;
  CMatrix Z;
};

inline SvdResult svd(const CMatrix& S) {
  if (S.rows() != S.cols()) throw InvalidInput("svd: matrix must be square");
  if (!S.allFinite()) throw NumericalFailure("svd: matrix has non-finite entries");
  Eigen::JacobiSVD<CMatrix> dec(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (dec.info() != Eigen::Success) throw NumericalFailure("svd: decomposition did not converge");
  return {dec.matrixU(), dec.singularValues(), dec.matrixV().adjoint()};
}

/// 2-norm condition number from descending singular values; +inf when the
/// smallest is below 1e-300.
inline double condition_from_singular_values(std::span<const double> sv) {
  if (sv.empty()) return std::numeric_limits<double>::infinity();
  const double lo = sv.back();
  if (lo < 1e-300) return std::numeric_limits<double>::infinity();
  return sv.front() / lo;
}

inline double condition_number(const CMatrix& S) {
  const auto dec = svd(S);
  if (dec.sigma.size() == 0 || dec.sigma[0] == 0.0) {
    throw InvalidInput("condition_number: zero matrix");
  }
  return condition_from_singular_values({dec.sigma.data(), static_cast<std::size_t>(dec.sigma.size())});
}

/// Knee of the (index, log10 sigma) curve: the point farthest from the chord
/// joining the first and last points. Returns nullopt for fewer than three
/// values or a curve with no bend.
inline std::optional<std::size_t> elbow_index(std::span<const double> singular_values) {
  const std::size_t n = singular_values.size();
  if (n < 3) return std::nullopt;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = std::log10(std::max(singular_values[i], 1e-300));
  const double dx = static_cast<double>(n - 1);
  const double dy = y[n - 1] - y[0];
  const double len = std::hypot(dx, dy);
  std::size_t best = 0;
  double best_dist = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double dist = std::abs(dy * static_cast<double>(i) - dx * (y[i] - y[0])) / len;
    if (dist > best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  if (best_dist < 1e-12) return std::nullopt;
  return best;
}

struct Threshold {
  double value = 0.0;
  bool warning = false;  // elbow undefined, fell back to 0
};

inline double lit_a_threshold(double noise_level, std::size_t krylov_size, double n_f) {
  return 0.1 * noise_level * static_cast<double>(krylov_size) * n_f;
}

inline double lit_b_threshold(double noise_level, std::size_t krylov_size) {
  const auto d = static_cast<double>(krylov_size);
  return 2.0 * std::sqrt(d * std::log(2.0 * d)) * noise_level;
}

inline Threshold choose_threshold(const RegularizationSpec& spec,
                                  std::span<const double> singular_values,
                                  std::size_t krylov_size) {
  if (krylov_size < 1) throw InvalidInput("choose_threshold: krylov_size must be >= 1");
  if (singular_values.empty()) throw InvalidInput("choose_threshold: no singular values");
  switch (spec.method) {
    case RegMethod::none: return {0.0, false};
    case RegMethod::fixed: return {spec.sigma, false};
    case RegMethod::lit_a: return {lit_a_threshold(spec.noise_level, krylov_size, spec.n_f), false};
    case RegMethod::lit_b: return {lit_b_threshold(spec.noise_level, krylov_size), false};
    case RegMethod::elbow: {
      const auto knee = elbow_index(singular_values);
      if (!knee) return {0.0, true};
      return {singular_values[*knee], false};
    }
  }
  return {0.0, false};
}

/// (S, T) projected onto the singular directions of S above the threshold.
struct Regularized {
  Eigen::VectorXd s_diag;  // kept singular values, the diagonal of S~
  CMatrix S_tilde;         // (W^-1 S Z^-1)_II
  CMatrix T_tilde;         // (W^-1 T Z^-1)_II
  std::vector<std::size_t> kept;

  bool eliminated() const { return kept.empty(); }
};

inline Regularized regularize(const SvdResult& dec, const CMatrix& S, const CMatrix& T,
                              double threshold) {
  if (S.rows() != T.rows() || S.cols() != T.cols()) {
    throw InvalidInput("regularize: S and T must have the same shape");
  }
  Regularized out;
  for (Eigen::Index i = 0; i < dec.sigma.size(); ++i) {
    if (dec.sigma[i] > threshold) out.kept.push_back(static_cast<std::size_t>(i));
  }
  const auto k = static_cast<Eigen::Index>(out.kept.size());
  out.s_diag.resize(k);
  out.S_tilde.resize(k, k);
  out.T_tilde.resize(k, k);
  if (k == 0) return out;
  // W and Z are unitary, so W^-1 = W^H and Z^-1 = Z^H.
  const CMatrix s_full = dec.W.adjoint() * S * dec.Z.adjoint();
  const CMatrix t_full = dec.W.adjoint() * T * dec.Z.adjoint();
  for (Eigen::Index a = 0; a < k; ++a) {
    const auto ia = static_cast<Eigen::Index>(out.kept[static_cast<std::size_t>(a)]);
    out.s_diag[a] = dec.sigma[ia];
    for (Eigen::Index b = 0; b < k; ++b) {
      const auto ib = static_cast<Eigen::Index>(out.kept[static_cast<std::size_t>(b)]);
      out.S_tilde(a, b) = s_full(ia, ib);
      out.T_tilde(a, b) = t_full(ia, ib);
    }
  }
  return out;
}

inline Regularized regularize(const CMatrix& S, const CMatrix& T, double threshold) {
  return regularize(svd(S), S, T, threshold);
}

struct Eigenpairs {
  Eigen::VectorXcd values;
  std::optional<CMatrix> vectors;  // columns, in the projected basis
};

/// Eigenvalues of diag(s)^-1 T~ (general complex, unordered).
inline Eigenpairs solve(const Eigen::VectorXd& s_diag, const CMatrix& T_tilde,
                        bool with_vectors = false) {
  if (T_tilde.rows() != s_diag.size() || T_tilde.cols() != s_diag.size()) {
    throw InvalidInput("solve: dimension mismatch between S~ and T~");
  }
  if ((s_diag.array() <= 0.0).any()) throw InvalidInput("solve: S~ must be positive diagonal");
  if (s_diag.size() == 0) return {Eigen::VectorXcd(0), std::nullopt};
  const CMatrix m = s_diag.cwiseInverse().cast<cplx>().asDiagonal() * T_tilde;
  Eigen::ComplexEigenSolver<CMatrix> es(m, with_vectors);
  if (es.info() != Eigen::Success) throw NumericalFailure("solve: complex eigensolver did not converge");
  Eigenpairs out{es.eigenvalues(), std::nullopt};
  if (with_vectors) out.vectors = es.eigenvectors();
  return out;
}

/// Overload for an explicit S~; it must be (numerically) diagonal and positive.
inline Eigenpairs solve(const CMatrix& S_tilde, const CMatrix& T_tilde, bool with_vectors = false) {
  const Eigen::VectorXd diag = S_tilde.diagonal().real();
  const double off = (S_tilde - CMatrix(diag.cast<cplx>().asDiagonal())).cwiseAbs().maxCoeff();
  const double scale = diag.size() ? diag.cwiseAbs().maxCoeff() : 0.0;
  if (diag.size() && off > 1e-10 * std::max(scale, 1.0)) {
    throw InvalidInput("solve: S~ is not diagonal; regularize first");
  }
  return solve(diag, T_tilde, with_vectors);
}

struct GevpSolution {
  Eigen::VectorXcd eigenvalues;
  std::optional<CMatrix> eigenvectors;
  std::vector<std::size_t> kept_indices;
  Eigen::VectorXd singular_values;  // of the unregularized S, descending
  double condition_number = 0.0;    // unregularized S
  double condition_number_post = std::numeric_limits<double>::quiet_NaN();  // S~
  double threshold_used = 0.0;
  bool threshold_warning = false;

  bool eliminated() const { return kept_indices.empty(); }
};

/// Full pipeline: SVD, threshold, projection, solve.
inline GevpSolution solve_gevp(const CMatrix& S, const CMatrix& T, const RegularizationSpec& spec,
                               bool with_vectors = false) {
  const auto dec = svd(S);
  const std::span<const double> sv(dec.sigma.data(), static_cast<std::size_t>(dec.sigma.size()));
  GevpSolution sol;
  sol.singular_values = dec.sigma;
  sol.condition_number = condition_from_singular_values(sv);
  const auto thr = choose_threshold(spec, sv, static_cast<std::size_t>(S.rows()));
  sol.threshold_used = thr.value;
  sol.threshold_warning = thr.warning;
  const auto reg = regularize(dec, S, T, thr.value);
  sol.kept_indices = reg.kept;
  if (reg.eliminated()) return sol;
  sol.condition_number_post = reg.s_diag[0] / reg.s_diag[reg.s_diag.size() - 1];
  auto eig = solve(reg.s_diag, reg.T_tilde, with_vectors);
  sol.eigenvalues = std::move(eig.values);
  sol.eigenvectors = std::move(eig.vectors);
  return sol;
}

}  // namespace qkrylov
