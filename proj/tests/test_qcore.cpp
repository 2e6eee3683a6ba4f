#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qsa/amplitude.hpp"
#include "qsa/qcore.hpp"
#include "qsa/random.hpp"
#include "qsa/stats.hpp"

using namespace qsa;

TEST(RandomSource, SameSeedSameStream) {
  RandomSource a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c();
    EXPECT_EQ(x, y);
    differs = differs || x != z;
  }
  EXPECT_TRUE(differs);
}

TEST(RandomSource, SubstreamsAreIndependentOfThreadCount) {
  auto body = [](RandomSource& rng, std::size_t) { return rng.uniform() + rng.binomial(100, 0.3); };
  const auto one = run_repetitions(7, 500, body, 1);
  const auto four = run_repetitions(7, 500, body, 4);
  EXPECT_EQ(one, four);
}

TEST(ApplyUnitary, IdentityAndGlobalPhase) {
  RandomSource rng(1);
  const ComplexVector psi = random_state(4, rng);
  EXPECT_LT((apply_unitary(Unitary::identity(4), psi) - psi).norm(), 1e-14);

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = d(1, 1) = std::polar(1.0, std::numbers::pi / 2);
  const ComplexVector out = apply_unitary(Unitary(d), basis_state(2, 0));
  EXPECT_NEAR(std::abs(out(0) - Complex(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(out(1)), 0.0, 1e-15);
}

TEST(ApplyUnitary, RandomUnitaryPreservesNorm) {
  RandomSource rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Unitary u = random_unitary(8, rng);
    const ComplexVector psi = random_state(8, rng);
    EXPECT_NEAR(apply_unitary(u, psi).norm(), 1.0, 1e-10);
  }
}

TEST(ApplyUnitary, Errors) {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(Unitary{m}, PreconditionError);
  EXPECT_THROW(apply_unitary(Unitary::identity(3), basis_state(2, 0)), DimensionError);
}

TEST(MeasureProjector, DeterministicBranchesUseNoRandomness) {
  RandomSource rng(3);
  const Projector p1 = Projector::onto_basis(2, {1});
  const auto in = measure_projector(basis_state(2, 1), p1, rng);
  EXPECT_EQ(in.bit, 1);
  EXPECT_DOUBLE_EQ(in.probability, 1.0);
  const auto out = measure_projector(basis_state(2, 0), p1, rng);
  EXPECT_EQ(out.bit, 0);
  EXPECT_DOUBLE_EQ(out.probability, 0.0);
  EXPECT_EQ(rng.counter(), 0u);
}

TEST(MeasureProjector, EmpiricalLaw) {
  ComplexVector psi(2);
  psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const Projector p1 = Projector::onto_basis(2, {1});
  const std::size_t n = 100'000;
  const auto bits = run_repetitions(11, n, [&](RandomSource& rng, std::size_t) {
    const auto m = measure_projector(psi, p1, rng);
    EXPECT_NEAR(m.post_state.norm(), 1.0, 1e-12);
    return m.bit;
  }, 1);
  Proportion f{0, n};
  for (int b : bits) f.successes += b;
  EXPECT_LE(std::abs(f.value() - 0.5), 4 * f.standard_error_at(0.5));
}

TEST(Eigendecompose, SimpleSpectra) {
  for (const auto& e : eigendecompose_unitary(Unitary::identity(3))) EXPECT_NEAR(e.phase, 0.0, 1e-12);
  ComplexMatrix z = ComplexMatrix::Identity(2, 2);
  z(1, 1) = -1.0;
  const auto pairs = eigendecompose_unitary(Unitary(z));
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_NEAR(pairs[0].phase, 0.0, 1e-12);
  EXPECT_NEAR(pairs[1].phase, 0.5, 1e-12);
}

TEST(Eigendecompose, ReconstructsRandomUnitaries) {
  RandomSource rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const Unitary u = random_unitary(16, rng);
    const auto pairs = eigendecompose_unitary(u);
    EXPECT_LT((reconstruct(pairs) - u.matrix()).cwiseAbs().maxCoeff(), 1e-8);
    for (std::size_t i = 0; i < pairs.size(); ++i)
      for (std::size_t j = 0; j < pairs.size(); ++j)
        EXPECT_NEAR(std::abs(pairs[i].vector.dot(pairs[j].vector)), i == j ? 1.0 : 0.0, 1e-8);
  }
}

TEST(GroverOperator, FixedPointWhenPIsZero) {
  const ComplexVector psi = basis_state(2, 0);
  const auto g = grover_operator(psi, Projector::onto_basis(2, {1}));
  EXPECT_TRUE(g.degenerate);
  EXPECT_LT((apply_unitary(g.op, psi) - psi).norm(), 1e-14);
}

TEST(GroverOperator, HalfAmplitudePlanePhases) {
  ComplexVector psi(2);
  psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  auto phases = grover_plane_phases(psi, Projector::onto_basis(2, {1}));
  std::sort(phases.begin(), phases.end());
  ASSERT_EQ(phases.size(), 2u);
  EXPECT_NEAR(phases[0], 0.25, 1e-10);
  EXPECT_NEAR(phases[1], 0.75, 1e-10);
}

TEST(GroverOperator, RandomPlanesMatchArcsin) {
  RandomSource rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const ComplexVector psi = random_state(8, rng);
    std::vector<Eigen::Index> good;
    for (Eigen::Index i = 0; i < 8; ++i)
      if (rng.bernoulli(0.5)) good.push_back(i);
    if (good.empty() || good.size() == 8) continue;
    const Projector proj = Projector::onto_basis(8, good);
    const double p = (proj.matrix() * psi).squaredNorm();
    const double expected = std::asin(std::sqrt(p)) / std::numbers::pi;
    for (double ph : grover_plane_phases(psi, proj)) {
      const double d = std::min(std::abs(ph - expected), std::abs(ph - (1.0 - expected)));
      EXPECT_LT(d, 1e-8);
    }
  }
}

TEST(TwoLevelState, NormAndMeasurement) {
  const auto s = TwoLevelState::from_amplitude(0.3);
  EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
  EXPECT_NEAR(s.overlap_squared(s.orthogonal()), 0.0, 1e-15);
  RandomSource rng(6);
  TwoLevelState state = s;
  const TwoLevelState good{Complex(1, 0), Complex(0, 0), s.basis};
  const bool hit = measure_along(state, good, rng);
  EXPECT_NEAR(state.overlap_squared(hit ? good : good.orthogonal()), 1.0, 1e-12);
}

TEST(Stats, BinomialTestAndSlope) {
  EXPECT_TRUE(binomial_test_not_below(140, 200, 2.0 / 3.0));
  EXPECT_FALSE(binomial_test_not_below(100, 200, 2.0 / 3.0));
  EXPECT_NEAR(fit_slope({1, 2, 3, 4}, {3, 5, 7, 9}), 2.0, 1e-12);
  MomentAccumulator m = moments({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(m.mean(), 2.5);
  EXPECT_NEAR(m.variance(), 5.0 / 3.0, 1e-12);
}
