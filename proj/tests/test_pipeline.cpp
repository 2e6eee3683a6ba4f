#include <gtest/gtest.h>

#include <cmath>

#include "qsa/pipeline.hpp"
#include "qsa/stats.hpp"

using namespace qsa;

namespace {

GibbsModel constant_model() { return potts(make_graph(2, {}), 3); }

}  // namespace

TEST(Schedule, ConstantHamiltonianIsOneStep) {
  const auto m = constant_model();
  const auto s = generate_schedule(m, kDefaultB, 0.25, Beta::inf());
  ASSERT_EQ(s.length(), 1u);
  EXPECT_TRUE(s.betas.back().infinite);
  EXPECT_NEAR(s.chebyshev_values[0], 1.0, 1e-12);
  EXPECT_NEAR(s.fidelity_values[0], 1.0, 1e-12);
}

TEST(Schedule, CertifiedAndReverified) {
  for (const auto& m : {potts(builtin_graph("triangle"), 3), potts(builtin_graph("cycle4"), 3),
                        matchings(builtin_graph("triangle")), independent_sets(builtin_graph("grid3x3"))}) {
    const auto s = generate_schedule(m, kDefaultB, 0.25, default_target(m, std::nullopt));
    ASSERT_GE(s.length(), 1u);
    for (std::size_t i = 0; i < s.length(); ++i) {
      EXPECT_LE(s.chebyshev_values[i], kDefaultB * (1 + 1e-12)) << m.name;
      EXPECT_GE(s.fidelity_values[i], (1 - 1e-12) / kDefaultB) << m.name;
      EXPECT_TRUE(s.betas[i] < s.betas[i + 1]);
    }
    EXPECT_TRUE(verify_schedule(m, s));
  }
}

TEST(Schedule, FerromagneticNeedsFiniteTarget) {
  const auto m = ising(builtin_graph("edge"));
  EXPECT_THROW(default_target(m, std::nullopt), PreconditionError);
  const auto s = generate_schedule(m, kDefaultB, 0.25, Beta::finite(std::log(2.0)));
  EXPECT_TRUE(verify_schedule(m, s));
  EXPECT_EQ(s.betas.back(), Beta::finite(std::log(2.0)));
}

TEST(Schedule, TamperedValuesFailVerification) {
  const auto m = potts(builtin_graph("triangle"), 3);
  auto s = generate_schedule(m, kDefaultB, 0.25, Beta::inf());
  s.chebyshev_values[0] += 1e-6;
  EXPECT_FALSE(verify_schedule(m, s));
}

TEST(Plan, TelescopingProduct) {
  for (const auto& m : {potts(builtin_graph("grid2x2"), 3), matchings(builtin_graph("cycle5")),
                        independent_sets(path_graph(5))}) {
    PartitionConfig cfg;
    cfg.averaging_scale = 1e-3;
    const auto plan = plan_partition(m, cfg);
    double prod = 1.0;
    for (const auto& x : plan.ratios) prod *= x.mean();
    EXPECT_NEAR(combine_product(plan, prod) / plan.z_truth, 1.0, 1e-9) << m.name;
    for (double g : plan.gaps) EXPECT_GT(g, 0.0);
  }
}

TEST(Plan, BackwardModelsUseInvertedAccuracy) {
  PartitionConfig cfg;
  cfg.eps = 0.25;
  const auto plan = plan_partition(matchings(builtin_graph("triangle")), cfg);
  EXPECT_TRUE(plan.inverted);
  EXPECT_NEAR(plan.eps_product, 0.2, 1e-15);
  EXPECT_NEAR(plan.z_known, 1.0, 1e-12);
  EXPECT_NEAR(plan.z_truth, 4.0, 1e-12);
}

TEST(Estimate, ConstantHamiltonianIsExact) {
  const auto plan = plan_partition(constant_model(), PartitionConfig{});
  RandomSource rng(80);
  const auto r = estimate_partition(plan, 80, rng);
  EXPECT_NEAR(r.estimate, 9.0, 1e-12);
  EXPECT_TRUE(r.success);
  const auto c = classical_baseline(plan, 80, rng);
  EXPECT_NEAR(c.estimate, 9.0, 1e-12);
}

TEST(Estimate, DeterministicGivenSeed) {
  PartitionConfig cfg;
  cfg.averaging_scale = 0.01;
  const auto plan = plan_partition(potts(builtin_graph("triangle"), 3), cfg);
  RandomSource a(81), b(81);
  const auto ra = estimate_partition(plan, 81, a), rb = estimate_partition(plan, 81, b);
  EXPECT_EQ(ra.estimate, rb.estimate);
  EXPECT_EQ(ra.ledger.reflections, rb.ledger.reflections);
  EXPECT_EQ(ra.ledger.walk_steps, rb.ledger.walk_steps);
}

TEST(Estimate, LedgerConservation) {
  PartitionConfig cfg;
  cfg.averaging_scale = 0.01;
  const auto plan = plan_partition(independent_sets(path_graph(3)), cfg);
  RandomSource rng(82);
  const auto r = estimate_partition(plan, 82, rng);
  double refl = 0.0, steps = 0.0;
  for (const auto& s : r.stages) {
    refl += s.reflections;
    steps += s.walk_steps;
  }
  EXPECT_DOUBLE_EQ(refl, r.ledger.reflections);
  EXPECT_DOUBLE_EQ(steps, r.ledger.walk_steps);
  EXPECT_NEAR(r.rel_error, std::abs(r.estimate - r.truth) / r.truth, 1e-15);
}

TEST(Classical, SampleCountAndSuccess) {
  EXPECT_EQ(classical_samples_per_stage(3, kDefaultB, 0.25), static_cast<std::uint64_t>(std::ceil(8 * 3 * (kDefaultB - 1) / 0.0625)));
  const auto plan = plan_partition(potts(builtin_graph("triangle"), 3), PartitionConfig{});
  const std::size_t n = 200;
  std::size_t ok = 0;
  for (std::size_t rep = 0; rep < n; ++rep) {
    RandomSource rng = RandomSource::substream(83, rep);
    ok += classical_baseline(plan, rep, rng).success;
  }
  EXPECT_TRUE(binomial_test_not_below(ok, n, 2.0 / 3.0));
}

TEST(WalkSteps, Conversion) {
  EXPECT_EQ(walk_steps_per_reflection(1.0, 2.0), 2u);
  EXPECT_EQ(walk_steps_per_reflection(0.25, 2.0), 4u);
  EXPECT_EQ(walk_steps_per_reflection(0.0, 2.0), 0u);
}
