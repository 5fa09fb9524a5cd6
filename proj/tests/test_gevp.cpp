#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "qkrylov/exact.hpp"
#include "qkrylov/gevp.hpp"
#include "qkrylov/krylov.hpp"
#include "qkrylov/references.hpp"

using namespace qkrylov;

namespace {

std::vector<cplx> to_list(const Eigen::VectorXcd& v) { return {v.data(), v.data() + v.size()}; }

CMatrix diag(std::initializer_list<double> d) {
  const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(d.begin(), static_cast<Eigen::Index>(d.size()));
  return v.cast<cplx>().asDiagonal();
}

/// S = A^H A, T = A^H G A: the pencil's eigenvalues are those of G.
struct Pencil {
  oracle::Mat S, T;
};

Pencil random_pencil(oracle::Gen& gen, std::size_t n, double cond) {
  const oracle::Mat a = gen.factor_with_condition(n, cond);
  oracle::Mat g(n);
  for (auto& z : g.a) z = gen.complex_normal();
  const oracle::Mat ah = oracle::adjoint(a);
  return {oracle::mul(ah, a), oracle::mul(oracle::mul(ah, g), a)};
}

std::vector<cplx> oracle_pencil_eigenvalues(const Pencil& p) {
  return oracle::qr_eigenvalues(oracle::mul(oracle::inverse(p.S), p.T));
}

struct Tfim4 {
  PauliSum h = model_hamiltonian(ModelKind::tfim_chain, 4);
  SpectralDecomposition d = diagonalize(h);
  GroundState gs = ground_state(d);
  HamiltonianData data() const { return {h, d}; }
};

const Tfim4& tfim4() {
  static const Tfim4 f;
  return f;
}

KrylovSpace tfim_space(Variant v, std::size_t K) {
  const auto& f = tfim4();
  KrylovSpace space({single_reference(f.gs.state, 4)}, f.data(), default_config(v, f.data().norm));
  space.grow_to(K);
  return space;
}

}  // namespace

TEST(Svd, Examples) {
  const auto id = svd(CMatrix::Identity(3, 3));
  EXPECT_LT((id.sigma - Eigen::VectorXd::Ones(3)).norm(), 1e-15);
  const auto d = svd(diag({4.0, 1.0}));
  EXPECT_DOUBLE_EQ(d.sigma[0], 4.0);
  EXPECT_DOUBLE_EQ(d.sigma[1], 1.0);
  EXPECT_THROW(svd(CMatrix::Zero(2, 3)), InvalidInput);
}

TEST(Svd, HermitianPsdMatchesEigenOracle) {
  oracle::Gen gen(41);
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::Mat a = gen.factor_with_condition(8, std::pow(10.0, gen.uniform(0, 6)));
    const oracle::Mat s = oracle::mul(oracle::adjoint(a), a);
    const auto want = oracle::jacobi_hermitian(s).values;
    const auto got = svd(oracle::to_eigen(s));
    for (std::size_t i = 0; i < 8; ++i) {
      EXPECT_NEAR(got.sigma[static_cast<Eigen::Index>(i)], std::abs(want[7 - i]), 1e-10);
    }
  }
}

TEST(Svd, FactorsAreUnitaryAndReconstruct) {
  oracle::Gen gen(42);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix s = oracle::to_eigen(gen.hermitian(7));
    const auto dec = svd(s);
    const auto I = CMatrix::Identity(7, 7);
    EXPECT_LT((dec.W.adjoint() * dec.W - I).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((dec.Z * dec.Z.adjoint() - I).cwiseAbs().maxCoeff(), 1e-12);
    const CMatrix back = dec.W * dec.sigma.cast<cplx>().asDiagonal() * dec.Z;
    EXPECT_LT((back - s).cwiseAbs().maxCoeff(), 1e-12);
    for (Eigen::Index i = 1; i < 7; ++i) EXPECT_GE(dec.sigma[i - 1], dec.sigma[i]);
    EXPECT_GE(dec.sigma[6], 0.0);
  }
}

TEST(ChooseThreshold, FormulaExamples) {
  EXPECT_NEAR(lit_a_threshold(1e-3, 10, 20.0), 0.02, 1e-15);
  EXPECT_NEAR(lit_b_threshold(1e-3, 16), 1.4893e-2, 1e-6);
  const double sv[] = {1.0, 0.5};
  RegularizationSpec a = RegularizationSpec::of(RegMethod::lit_a);
  a.noise_level = 1e-3;
  a.n_f = 20.0;
  EXPECT_NEAR(choose_threshold(a, sv, 10).value, 0.02, 1e-15);
  EXPECT_EQ(choose_threshold(RegularizationSpec::fixed(1e-6), sv, 2).value, 1e-6);
  EXPECT_EQ(choose_threshold(RegularizationSpec::none(), sv, 2).value, 0.0);
  EXPECT_THROW(RegularizationSpec::fixed(-1.0), InvalidInput);
}

TEST(ChooseThreshold, ElbowOnSyntheticLCurve) {
  std::vector<double> sv;
  for (double l : {0.0, -0.2, -0.5, -5.8, -6.0, -6.1}) sv.push_back(std::pow(10.0, l));
  ASSERT_EQ(elbow_index(sv), std::optional<std::size_t>(3));
  const auto thr = choose_threshold(RegularizationSpec::of(RegMethod::elbow), sv, 6);
  EXPECT_NEAR(std::log10(thr.value), -5.8, 1e-12);
  EXPECT_FALSE(thr.warning);
}

TEST(ChooseThreshold, ElbowUndefinedFallsBackToZero) {
  const double two[] = {1.0, 1e-3};
  const auto thr = choose_threshold(RegularizationSpec::of(RegMethod::elbow), two, 2);
  EXPECT_EQ(thr.value, 0.0);
  EXPECT_TRUE(thr.warning);
  // A straight line in log space has no knee.
  const double line[] = {1.0, 1e-1, 1e-2, 1e-3};
  EXPECT_FALSE(elbow_index(line).has_value());
}

TEST(ChooseThreshold, ElbowMatchesBruteForceChordDistance) {
  oracle::Gen gen(43);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + gen.index(20);
    std::vector<double> logs(n);
    for (auto& l : logs) l = gen.uniform(-16.0, 0.0);
    std::sort(logs.begin(), logs.end(), std::greater<>());
    std::vector<double> sv;
    for (double l : logs) sv.push_back(std::pow(10.0, l));
    // Distance from (i, y_i) to the line through the end points, by projection.
    const double x1 = static_cast<double>(n - 1);
    const double y0 = std::log10(sv.front()), y1 = std::log10(sv.back());
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double px = static_cast<double>(i), py = std::log10(sv[i]) - y0;
      const double ux = x1 / std::hypot(x1, y1 - y0), uy = (y1 - y0) / std::hypot(x1, y1 - y0);
      const double along = px * ux + py * uy;
      const double d = std::hypot(px - along * ux, py - along * uy);
      if (d > best_d + 1e-12) {
        best_d = d;
        best = i;
      }
    }
    const auto knee = elbow_index(sv);
    ASSERT_TRUE(knee.has_value());
    EXPECT_EQ(*knee, best);
  }
}

TEST(Regularize, DiagonalExample) {
  const auto reg = regularize(diag({1.0, 1e-8}), diag({2.0, 3.0}), 1e-6);
  ASSERT_EQ(reg.kept.size(), 1u);
  EXPECT_NEAR(std::abs(reg.S_tilde(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(reg.T_tilde(0, 0) - 2.0), 0.0, 1e-15);
  const auto eig = solve(reg.S_tilde, reg.T_tilde);
  ASSERT_EQ(eig.values.size(), 1);
  EXPECT_NEAR(std::abs(eig.values[0] - 2.0), 0.0, 1e-14);
}

TEST(Regularize, EverythingBelowThresholdIsEliminated) {
  const auto reg = regularize(diag({1e-3, 1e-4}), diag({1.0, 1.0}), 1.0);
  EXPECT_TRUE(reg.eliminated());
  const auto sol = solve_gevp(diag({1e-3, 1e-4}), diag({1.0, 1.0}), RegularizationSpec::fixed(1.0));
  EXPECT_TRUE(sol.eliminated());
  EXPECT_EQ(sol.eigenvalues.size(), 0);
  EXPECT_TRUE(std::isnan(sol.condition_number_post));
  EXPECT_DOUBLE_EQ(sol.condition_number, 10.0);
}

TEST(Regularize, ProjectedOverlapIsDiagonal) {
  oracle::Gen gen(44);
  const auto p = random_pencil(gen, 6, 1e4);
  const auto reg = regularize(oracle::to_eigen(p.S), oracle::to_eigen(p.T), 0.0);
  EXPECT_EQ(reg.kept.size(), 6u);
  const CMatrix want = reg.s_diag.cast<cplx>().asDiagonal();
  EXPECT_LT((reg.S_tilde - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Regularize, ZeroThresholdIsANoOp) {
  oracle::Gen gen(45);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_pencil(gen, 6, std::pow(10.0, gen.uniform(0, 4)));
    const auto sol = solve_gevp(oracle::to_eigen(p.S), oracle::to_eigen(p.T), RegularizationSpec::fixed(0.0));
    EXPECT_EQ(sol.kept_indices.size(), 6u);
    EXPECT_LT(oracle::matched_distance(to_list(sol.eigenvalues), oracle_pencil_eigenvalues(p)), 1e-8);
  }
}

TEST(Regularize, PlantedSmallSingularValueIsRemoved) {
  oracle::Gen gen(46);
  const oracle::Mat u = gen.unitary(5);
  oracle::Mat d(5);
  const double planted[] = {1.0, 0.5, 0.2, 0.1, 1e-9};
  for (std::size_t i = 0; i < 5; ++i) d(i, i) = planted[i];
  const CMatrix S = oracle::to_eigen(oracle::mul(oracle::mul(u, d), oracle::adjoint(u)));
  const CMatrix T = oracle::to_eigen(oracle::mul(oracle::mul(u, gen.hermitian(5)), oracle::adjoint(u)));
  const auto sol = solve_gevp(S, T, RegularizationSpec::fixed(1e-6));
  EXPECT_EQ(sol.kept_indices, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(sol.eigenvalues.size(), 4);
  EXPECT_NEAR(sol.condition_number_post, 10.0, 1e-8);
  EXPECT_NEAR(sol.condition_number, 1e9, 1e3);
  EXPECT_EQ(sol.threshold_used, 1e-6);
}

TEST(Solve, Examples) {
  const auto a = solve(CMatrix(CMatrix::Identity(2, 2)), diag({2.0, 5.0}));
  EXPECT_LT(oracle::matched_distance(to_list(a.values), {2.0, 5.0}), 1e-14);

  const CMatrix s = diag({3.0, 0.5, 7.0});
  const auto b = solve(s, CMatrix(s * diag({-1.0, 4.0, 0.25})));
  EXPECT_LT(oracle::matched_distance(to_list(b.values), {-1.0, 4.0, 0.25}), 1e-14);
}

TEST(Solve, Errors) {
  CMatrix s = CMatrix::Identity(2, 2);
  s(0, 1) = 0.5;
  EXPECT_THROW(solve(s, diag({1.0, 1.0})), InvalidInput);
  EXPECT_THROW(solve(Eigen::VectorXd(Eigen::VectorXd::Ones(3)), diag({1.0, 1.0})), InvalidInput);
  EXPECT_THROW(solve(Eigen::VectorXd(Eigen::Vector2d(1.0, 0.0)), diag({1.0, 1.0})), InvalidInput);
}

TEST(Solve, RandomPencilsMatchInverseTimesTOracle) {
  oracle::Gen gen(47);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_pencil(gen, 6, std::pow(10.0, gen.uniform(0, 3)));
    const auto sol = solve_gevp(oracle::to_eigen(p.S), oracle::to_eigen(p.T), RegularizationSpec::none(), true);
    ASSERT_EQ(sol.eigenvalues.size(), 6);
    EXPECT_LT(oracle::matched_distance(to_list(sol.eigenvalues), oracle_pencil_eigenvalues(p)), 1e-8);
    ASSERT_TRUE(sol.eigenvectors.has_value());
  }
}

TEST(Solve, InvariantUnderUnitaryConjugation) {
  oracle::Gen gen(48);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_pencil(gen, 6, 1e2);
    const oracle::Mat u = gen.unitary(6);
    const oracle::Mat uh = oracle::adjoint(u);
    const CMatrix s2 = oracle::to_eigen(oracle::mul(oracle::mul(uh, p.S), u));
    const CMatrix t2 = oracle::to_eigen(oracle::mul(oracle::mul(uh, p.T), u));
    const auto a = solve_gevp(oracle::to_eigen(p.S), oracle::to_eigen(p.T), RegularizationSpec::none());
    const auto b = solve_gevp(s2, t2, RegularizationSpec::none());
    EXPECT_LT(oracle::matched_distance(to_list(a.eigenvalues), to_list(b.eigenvalues)), 1e-8);
  }
}

TEST(ConditionNumber, Examples) {
  EXPECT_DOUBLE_EQ(condition_number(CMatrix::Identity(4, 4)), 1.0);
  EXPECT_NEAR(condition_number(diag({10.0, 1e-3})), 1e4, 1e-8);
  EXPECT_THROW(condition_number(CMatrix::Zero(2, 2)), InvalidInput);
  EXPECT_TRUE(std::isinf(condition_number(diag({1.0, 0.0}))));
}

TEST(ConditionNumber, GrowsWithKrylovDimensionUntilSaturation) {
  const auto space = tfim_space(Variant::qks_u, 12);
  double prev = 1.0;
  for (std::size_t K = 1; K <= 7; ++K) {
    const double k = condition_number(space.matrices(K).S);
    EXPECT_GE(k, prev * 0.99) << K;
    prev = k;
  }
}

TEST(SolveGevp, RitzValuesBoundTheGroundEnergyFromAbove) {
  const auto& f = tfim4();
  const auto space = tfim_space(Variant::qks_h, 8);
  std::size_t checked = 0;
  for (std::size_t K = 0; K <= 8; ++K) {
    const auto m = space.matrices(K);
    const auto sol = solve_gevp(m.S, m.T, RegularizationSpec::none());
    if (sol.condition_number > 1e6) break;
    ++checked;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& l : sol.eigenvalues) {
      EXPECT_LT(std::abs(l.imag()), 1e-9) << K;
      lo = std::min(lo, l.real());
    }
    EXPECT_GE(lo, f.gs.energy - 1e-9) << K;
  }
  EXPECT_GE(checked, 3u);
}

// Each Ritz value is a Rayleigh quotient of U, so |L| <= 1 always; it reaches
// the unit circle once the Krylov space is invariant under U.
TEST(SolveGevp, UnitaryVariantEigenvaluesLieInTheUnitDisk) {
  const auto space = tfim_space(Variant::qks_u, 8);
  for (std::size_t K = 0; K <= 8; ++K) {
    const auto m = space.matrices(K);
    const auto sol = solve_gevp(m.S, m.T, RegularizationSpec::none());
    if (sol.condition_number > 1e6) break;
    for (const auto& l : sol.eigenvalues) EXPECT_LE(std::abs(l), 1.0 + 1e-9) << K;
  }
}

TEST(SolveGevp, UnitaryVariantOnAnInvariantSpaceIsUnitary) {
  oracle::Gen gen(49);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<PauliTerm> terms;
    for (int k = 0; k < 6; ++k) terms.push_back({gen.normal(), PauliString::from_label(gen.pauli_label(2))});
    const PauliSum h(2, terms);
    const auto d = diagonalize(h);
    const HamiltonianData data(h, d);
    const auto gs = ground_state(d);
    StateVector ref = oracle::to_eigen(gen.state(4));
    KrylovSpace space({ReferenceState{ref, "random", 1.0}}, data, default_config(Variant::qks_u, data.norm));
    space.grow_to(3);  // four vectors span the whole space
    const auto m = space.matrices();
    const auto sol = solve_gevp(m.S, m.T, RegularizationSpec::none());
    ASSERT_LT(sol.condition_number, 1e8);
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& l : sol.eigenvalues) {
      EXPECT_NEAR(std::abs(l), 1.0, 1e-9) << trial;
      lowest = std::min(lowest, -std::arg(l) * data.norm);
    }
    EXPECT_NEAR(lowest, gs.energy, 1e-7) << trial;
  }
}

TEST(SolveGevp, SolutionShapeInvariants) {
  const auto space = tfim_space(Variant::qks_u, 10);
  for (const char* r : {"none", "fixed:1e-6", "elbow"}) {
    const auto m = space.matrices(10);
    const auto sol = solve_gevp(m.S, m.T, parse_regularization(r));
    EXPECT_EQ(static_cast<std::size_t>(sol.eigenvalues.size()), sol.kept_indices.size()) << r;
    for (Eigen::Index i = 1; i < sol.singular_values.size(); ++i)
      EXPECT_GE(sol.singular_values[i - 1], sol.singular_values[i]);
    EXPECT_DOUBLE_EQ(sol.condition_number,
                     sol.singular_values[0] / sol.singular_values[sol.singular_values.size() - 1]);
  }
}

TEST(ParseRegularization, LabelsRoundTrip) {
  for (const char* r : {"none", "elbow", "lit_a", "lit_b", "fixed:1e-06", "fixed:0.001"}) {
    EXPECT_EQ(label(parse_regularization(r)), r);
  }
  EXPECT_EQ(label(parse_regularization("fixed:1e-6")), "fixed:1e-06");
  EXPECT_THROW(parse_regularization("tikhonov"), InvalidInput);
  EXPECT_THROW(parse_regularization("fixed:abc"), InvalidInput);
  EXPECT_THROW(parse_regularization("fixed:-1"), InvalidInput);
}
