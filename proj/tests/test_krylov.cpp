#include <gtest/gtest.h>

#include "oracle.hpp"
#include "qkrylov/exact.hpp"
#include "qkrylov/krylov.hpp"
#include "qkrylov/references.hpp"

using namespace qkrylov;

namespace {

struct Fixture {
  PauliSum h;
  SpectralDecomposition d;
  GroundState gs;

  explicit Fixture(PauliSum ham) : h(std::move(ham)), d(diagonalize(h)), gs(ground_state(d)) {}
  HamiltonianData data() const { return {h, d}; }
  std::vector<ReferenceState> refs(std::size_t B, bool grouping = true) const {
    return select_references(gs.state, h.n_qubits(), B, grouping);
  }
};

const Fixture& tfim4() {
  static const Fixture f(model_hamiltonian(ModelKind::tfim_chain, 4));
  return f;
}

const Fixture& heis4() {
  static const Fixture f(model_hamiltonian(ModelKind::heisenberg_chain, 4));
  return f;
}

double max_toeplitz_deviation(const CMatrix& m) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const cplx want = i <= j ? m(0, j - i) : std::conj(m(0, i - j));
      dev = std::max(dev, std::abs(m(i, j) - want));
    }
  return dev;
}

}  // namespace

TEST(KrylovConfig, Validation) {
  KrylovConfig c = default_config(Variant::qks_u, 4.0);
  EXPECT_NO_THROW(c.validate());
  c.t = 3.5;
  EXPECT_THROW(c.validate(), InvalidInput);
  c.t = std::numbers::pi;
  EXPECT_NO_THROW(c.validate());
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = default_config(Variant::qks_u, 4.0);
  c.B = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = default_config(Variant::qks_u, 4.0);
  c.generator = Generator::hamiltonian_power;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = default_config(Variant::qks_u, 4.0);
  c.normalize_hamiltonian = false;
  c.t = 10.0;
  c.tau = 10.0;
  EXPECT_NO_THROW(c.validate());
}

TEST(KrylovConfig, Defaults) {
  const auto u = default_config(Variant::qks_u, 4.0);
  EXPECT_EQ(u.t, 1.0);
  EXPECT_EQ(u.tau, 1.0);
  EXPECT_TRUE(u.normalize_hamiltonian);
  const auto h = default_config(Variant::qks_h, 4.0);
  EXPECT_DOUBLE_EQ(h.t, 0.25);
  EXPECT_FALSE(h.normalize_hamiltonian);
}

TEST(BuildBasis, KZeroIsTheReference) {
  const auto& f = tfim4();
  const auto refs = f.refs(1);
  auto cfg = default_config(Variant::qks_u, f.data().norm, 0, 1);
  const auto basis = build_basis(refs, f.data(), cfg);
  ASSERT_EQ(basis.size(), 1u);
  EXPECT_LT((basis[0] - refs[0].state).norm(), 1e-15);
}

TEST(BuildBasis, UnitaryPowers) {
  const auto& f = tfim4();
  const auto refs = f.refs(1);
  const double norm = f.data().norm;
  auto cfg = default_config(Variant::qks_u, norm, 2, 1);
  cfg.t = cfg.tau = 0.7;
  const auto basis = build_basis(refs, f.data(), cfg);
  ASSERT_EQ(basis.size(), 3u);
  EXPECT_LT((basis[2] - evolve(f.d, refs[0].state, 2 * 0.7 / norm)).norm(), 1e-12);
}

TEST(BuildBasis, BlockOrderingIsPowerMajor) {
  const auto& f = heis4();
  const auto refs = f.refs(2);
  auto cfg = default_config(Variant::qks_u, f.data().norm, 1, 2);
  const auto basis = build_basis(refs, f.data(), cfg);
  ASSERT_EQ(basis.size(), 4u);
  const double dt = 1.0 / f.data().norm;
  EXPECT_LT((basis[0] - refs[0].state).norm(), 1e-14);
  EXPECT_LT((basis[1] - refs[1].state).norm(), 1e-14);
  EXPECT_LT((basis[2] - evolve(f.d, refs[0].state, dt)).norm(), 1e-12);
  EXPECT_LT((basis[3] - evolve(f.d, refs[1].state, dt)).norm(), 1e-12);
}

TEST(BuildBasis, Errors) {
  const auto& f = tfim4();
  auto cfg = default_config(Variant::qks_u, f.data().norm, 1, 2);
  EXPECT_THROW(build_basis(f.refs(1), f.data(), cfg), InvalidInput);
  EXPECT_THROW(build_basis(std::vector<ReferenceState>{}, f.data(), cfg), InvalidInput);
  EXPECT_THROW(KrylovSpace(f.refs(1), f.data(), cfg), InvalidInput);
}

TEST(AssembleExact, SingleStateQksH) {
  const auto& f = tfim4();
  const auto refs = f.refs(1);
  auto cfg = default_config(Variant::qks_h, f.data().norm, 0, 1);
  const auto m = assemble_exact(build_basis(refs, f.data(), cfg), f.data(), cfg);
  ASSERT_EQ(m.S.rows(), 1);
  EXPECT_NEAR(std::abs(m.S(0, 0) - 1.0), 0.0, 1e-15);
  const cplx e = refs[0].state.dot(apply_sum(f.h, refs[0].state));
  EXPECT_LT(std::abs(m.T(0, 0) - e), 1e-14);
}

TEST(AssembleExact, QksUProjectedIsShiftedOverlap) {
  const auto& f = tfim4();
  auto cfg = default_config(Variant::qks_u, f.data().norm, 6, 1);
  const auto m = assemble_exact(build_basis(f.refs(1), f.data(), cfg), f.data(), cfg);
  for (Eigen::Index i = 0; i < m.S.rows(); ++i)
    for (Eigen::Index j = 0; j + 1 < m.S.cols(); ++j) EXPECT_LT(std::abs(m.T(i, j) - m.S(i, j + 1)), 1e-12);
}

TEST(AssembleExact, OverlapsMatchTaylorEvolvedVectors) {
  const auto& f = tfim4();
  auto cfg = default_config(Variant::qks_u, f.data().norm, 4, 1);
  const auto refs = f.refs(1);
  const auto m = assemble_exact(build_basis(refs, f.data(), cfg), f.data(), cfg);

  oracle::Mat hm(16);
  for (const auto& t : f.h.terms()) hm = oracle::add(hm, oracle::pauli_matrix(t.string.label()), t.coeff);
  const oracle::Mat step = oracle::expm_minus_i(hm, 1.0 / f.data().norm);
  std::vector<oracle::Vec> states{oracle::from_eigen(StateVector(refs[0].state))};
  for (int k = 1; k <= 4; ++k) states.push_back(oracle::mul(step, states.back()));
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = 0; j < states.size(); ++j) {
      const cplx want = oracle::dot(states[i], states[j]);
      EXPECT_LT(std::abs(m.S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - want), 1e-12);
    }
}

TEST(CountDistinctCircuits, Examples) {
  KrylovConfig u = default_config(Variant::qks_u, 1.0, 3, 1);
  EXPECT_EQ(count_distinct_circuits(u), 5u);
  u.K = 0;
  EXPECT_EQ(count_distinct_circuits(u), 2u);
  KrylovConfig h = default_config(Variant::qks_h, 1.0, 0, 2);
  EXPECT_EQ(count_distinct_circuits(h), 6u);
}

TEST(CountDistinctCircuits, NonCommensurateTauKeepsSeparateCircuits) {
  KrylovConfig u = default_config(Variant::qks_u, 1.0, 3, 1);
  u.tau = 0.5;
  // S offsets 0..3 plus T offsets -3..3 shifted by tau, none coinciding.
  EXPECT_EQ(count_distinct_circuits(u), 4u + 7u);
}

TEST(KrylovSpace, IncrementalEqualsDirectAssembly) {
  for (const Fixture* f : {&tfim4(), &heis4()}) {
    for (Variant v : {Variant::qks_u, Variant::qks_h}) {
      for (std::size_t B : {1u, 2u}) {
        auto cfg = default_config(v, f->data().norm, 0, B);
        KrylovSpace space(f->refs(B), f->data(), cfg);
        space.grow_to(6);
        cfg.K = 6;
        const auto direct = assemble_exact(build_basis(f->refs(B), f->data(), cfg), f->data(), cfg);
        const auto inc = space.matrices();
        EXPECT_LT((inc.S - direct.S).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((inc.T - direct.T).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_EQ(inc.distinct_circuits, direct.distinct_circuits);
      }
    }
  }
}

TEST(KrylovSpace, MatrixInvariants) {
  for (const Fixture* f : {&tfim4(), &heis4()}) {
    for (Variant v : {Variant::qks_u, Variant::qks_h}) {
      for (std::size_t B : {1u, 2u, 3u}) {
        KrylovSpace space(f->refs(B), f->data(), default_config(v, f->data().norm, 0, B));
        space.grow_to(8);
        const auto m = space.matrices();
        const auto n = m.S.rows();
        EXPECT_LT((m.S - m.S.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
        for (Eigen::Index i = 0; i < n; ++i) EXPECT_NEAR(std::abs(m.S(i, i) - 1.0), 0.0, 1e-12);
        const auto eig = oracle::jacobi_hermitian(oracle::from_eigen(CMatrix(m.S)));
        EXPECT_GT(eig.values.front(), -1e-10);
        if (v == Variant::qks_h) EXPECT_LT((m.T - m.T.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
        // Nesting: the leading block is unchanged by growth.
        const auto small = space.matrices(5);
        const auto d = small.S.rows();
        EXPECT_EQ(small.S, m.S.topLeftCorner(d, d));
        EXPECT_EQ(m.leading(5).T, small.T);
      }
    }
  }
}

TEST(KrylovSpace, SingleReferenceQksUIsToeplitz) {
  for (const Fixture* f : {&tfim4(), &heis4()}) {
    KrylovSpace space(f->refs(1), f->data(), default_config(Variant::qks_u, f->data().norm));
    space.grow_to(10);
    const auto m = space.matrices();
    EXPECT_LT(max_toeplitz_deviation(m.S), 1e-12);
    for (Eigen::Index i = 0; i < m.T.rows(); ++i)
      for (Eigen::Index j = 0; j < m.T.cols(); ++j) {
        if (i > 0 && j > 0) EXPECT_LT(std::abs(m.T(i, j) - m.T(i - 1, j - 1)), 1e-12);
      }
  }
}

TEST(KrylovSpace, HamiltonianPowerGenerator) {
  const auto& f = tfim4();
  auto cfg = default_config(Variant::qks_h, f.data().norm, 0, 1);
  cfg.generator = Generator::hamiltonian_power;
  KrylovSpace space(f.refs(1), f.data(), cfg);
  space.grow_to(3);
  const auto m = space.matrices();
  const StateVector r = f.refs(1)[0].state;
  std::vector<StateVector> pw{r};
  for (int k = 1; k <= 7; ++k) pw.push_back(apply_sum(f.h, pw.back()));
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double scale = std::max(1.0, pw[static_cast<std::size_t>(i + j)].norm());
      EXPECT_LT(std::abs(m.S(i, j) - r.dot(pw[static_cast<std::size_t>(i + j)])), 1e-12 * scale);
      EXPECT_LT(std::abs(m.T(i, j) - r.dot(pw[static_cast<std::size_t>(i + j + 1)])), 1e-12 * scale * 5);
    }
}
