#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracle.hpp"
#include "qkrylov/exact.hpp"
#include "qkrylov/filters.hpp"
#include "qkrylov/gevp.hpp"
#include "qkrylov/krylov.hpp"
#include "qkrylov/references.hpp"

using namespace qkrylov;

TEST(UnitaryFilter, Examples) {
  const cplx lams[] = {0.9998 * std::polar(1.0, -0.3), cplx(0.95, 0.0), std::polar(1.0, -0.5)};
  const auto a = unitary_filter(std::span(lams, 2), 1.0, 1.0);
  EXPECT_NEAR(a[0].deviation, 2e-4, 1e-15);
  EXPECT_TRUE(a[0].accepted);
  EXPECT_NEAR(a[0].energy, 0.3, 1e-14);
  EXPECT_DOUBLE_EQ(a[0].threshold, 1.6e-3);
  EXPECT_NEAR(a[1].deviation, 0.05, 1e-15);
  EXPECT_FALSE(a[1].accepted);

  const auto b = unitary_filter(std::span(lams + 2, 1), 1.0, 2.0);
  EXPECT_NEAR(b[0].energy, 1.0, 1e-14);
  EXPECT_NEAR(b[0].deviation, 0.0, 1e-15);
  EXPECT_TRUE(b[0].accepted);
  EXPECT_DOUBLE_EQ(b[0].threshold, 0.8e-3);
}

TEST(UnitaryFilter, FlagsTheBranchCut) {
  const cplx lams[] = {std::polar(1.0, std::numbers::pi - 1e-4), std::polar(1.0, 3.0)};
  const auto v = unitary_filter(lams, 1.0, 1.0);
  EXPECT_TRUE(v[0].near_branch_cut);
  EXPECT_FALSE(v[1].near_branch_cut);
}

TEST(UnitaryFilter, Errors) {
  const cplx lams[] = {1.0};
  EXPECT_THROW(unitary_filter(lams, 0.0, 1.0), InvalidInput);
  EXPECT_THROW(unitary_filter(lams, 1.0, 0.0), InvalidInput);
}

TEST(UnitaryFilter, EnergyExtractionInvertsThePhase) {
  oracle::Gen gen(51);
  for (int trial = 0; trial < 500; ++trial) {
    const double norm = gen.uniform(0.1, 20.0);
    const double tau = gen.uniform(0.05, std::numbers::pi);
    // |E tau / norm| < pi
    const double e = gen.uniform(-0.999, 0.999) * std::numbers::pi * norm / tau;
    const cplx lam[] = {std::polar(1.0, -e * tau / norm)};
    const auto v = unitary_filter(lam, tau, norm);
    EXPECT_NEAR(v[0].energy, e, 1e-12 * std::max(1.0, std::abs(e)));
    EXPECT_TRUE(v[0].accepted);
  }
}

TEST(ImaginaryFilter, Examples) {
  const cplx lams[] = {{-1.5, 1e-5}, {-1.5, 0.01}, {2.0, 0.0}};
  const auto v = imaginary_filter(lams);
  EXPECT_TRUE(v[0].accepted);
  EXPECT_DOUBLE_EQ(v[0].energy, -1.5);
  EXPECT_FALSE(v[1].accepted);
  EXPECT_EQ(v[2].deviation, 0.0);
  EXPECT_TRUE(v[2].accepted);
}

TEST(Filters, VerdictsAreConsistentAndLeaveEigenvaluesUntouched) {
  oracle::Gen gen(52);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<cplx> lams(1 + gen.index(12));
    for (auto& l : lams) l = std::polar(gen.uniform(0.99, 1.01), gen.uniform(-3.1, 3.1));
    const auto u = unitary_filter(lams, gen.uniform(0.1, 3.0), gen.uniform(0.5, 5.0));
    const auto h = imaginary_filter(lams);
    for (std::size_t i = 0; i < lams.size(); ++i) {
      EXPECT_EQ(u[i].eigenvalue, lams[i]);
      EXPECT_EQ(h[i].eigenvalue, lams[i]);
      EXPECT_EQ(u[i].accepted, u[i].deviation < u[i].threshold);
      EXPECT_EQ(h[i].accepted, h[i].deviation < h[i].threshold);
    }
  }
}

TEST(GroundEnergy, Examples) {
  std::vector<FilterVerdict> v(2);
  v[0].energy = -1.8;
  v[0].accepted = true;
  v[1].energy = -2.1;
  v[1].accepted = true;
  auto g = ground_energy(v, true);
  ASSERT_TRUE(g.has_value());
  EXPECT_EQ(g->energy, -2.1);

  v[0].accepted = v[1].accepted = false;
  EXPECT_FALSE(ground_energy(v, true).has_value());
  g = ground_energy(v, false);
  ASSERT_TRUE(g.has_value());
  EXPECT_EQ(g->energy, -2.1);
  EXPECT_THROW(ground_energy(std::vector<FilterVerdict>{}, false), InvalidInput);
}

TEST(GroundEnergy, UnfilteredEqualsMinimumExtractedEnergy) {
  oracle::Gen gen(53);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<cplx> lams(1 + gen.index(12));
    for (auto& l : lams) l = {gen.uniform(-5, 5), gen.uniform(-0.01, 0.01)};
    const auto v = imaginary_filter(lams);
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& l : lams) lo = std::min(lo, l.real());
    EXPECT_EQ(ground_energy(v, false)->energy, lo);
  }
}

TEST(GroundEnergy, NoiselessUnitaryVariantReachesTheGroundState) {
  const auto h = model_hamiltonian(ModelKind::tfim_chain, 4);
  const auto d = diagonalize(h);
  const auto gs = ground_state(d);
  const HamiltonianData data(h, d);
  KrylovSpace space({single_reference(gs.state, 4)}, data, default_config(Variant::qks_u, data.norm));
  space.grow_to(9);
  const auto m = space.matrices();
  const auto sol = solve_gevp(m.S, m.T, RegularizationSpec::none());
  const auto v = unitary_filter(std::span(sol.eigenvalues.data(), static_cast<std::size_t>(sol.eigenvalues.size())),
                                1.0, data.norm);
  const auto g = ground_energy(v, true);
  ASSERT_TRUE(g.has_value());
  EXPECT_LT(std::abs(g->energy - gs.energy), 1e-8);
}

TEST(FilterMode, Parsing) {
  EXPECT_EQ(parse_filter_mode("off"), FilterMode::off);
  EXPECT_EQ(parse_filter_mode("metric-only"), FilterMode::metric_only);
  EXPECT_EQ(parse_filter_mode("filtering"), FilterMode::filtering);
  EXPECT_EQ(to_string(FilterMode::metric_only), "metric_only");
  EXPECT_THROW(parse_filter_mode("sometimes"), InvalidInput);
}
