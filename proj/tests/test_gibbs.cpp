#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "qsa/gibbs.hpp"

using namespace qsa;

TEST(Graphs, BuiltinsAndParsing) {
  EXPECT_EQ(builtin_graph("triangle").edges.size(), 3u);
  EXPECT_EQ(builtin_graph("grid3x3").edges.size(), 12u);
  EXPECT_EQ(builtin_graph("path3").vertices, 3);
  EXPECT_EQ(builtin_graph("cycle4").edges.size(), 4u);
  EXPECT_THROW(builtin_graph("petersen"), InputError);

  std::istringstream in("# square\n0 1\n1 2\n\n2 3  # closing edge next\n3 0\n");
  const Graph g = parse_edge_list(in);
  EXPECT_EQ(g.vertices, 4);
  EXPECT_EQ(g.edges.size(), 4u);

  std::istringstream bad("0 1 2\n");
  EXPECT_THROW(parse_edge_list(bad), InputError);
  std::istringstream loop("1 1\n");
  EXPECT_THROW(parse_edge_list(loop), InputError);
  EXPECT_THROW(load_edge_list("/nonexistent/graph.txt"), InputError);
}

TEST(Beta, SymbolicInfinity) {
  EXPECT_TRUE(Beta::finite(3.0) < Beta::inf());
  EXPECT_FALSE(Beta::inf() < Beta::finite(1e300));
  EXPECT_EQ(Beta::inf().str(), "inf");
}

TEST(Models, PartitionFunctionsByEnumeration) {
  const auto triangle = builtin_graph("triangle");
  const auto p = potts(triangle, 3);
  EXPECT_NEAR(exact_partition(p, Beta::finite(0)), 27.0, 1e-12);
  EXPECT_NEAR(exact_partition(p, Beta::inf()), 6.0, 1e-12);

  const auto m = matchings(triangle);
  EXPECT_EQ(m.direction, Direction::backward);
  EXPECT_NEAR(exact_partition(m, Beta::finite(0)), 4.0, 1e-12);
  EXPECT_NEAR(exact_partition(m, Beta::inf()), 1.0, 1e-12);

  const auto h = independent_sets(path_graph(3));
  EXPECT_NEAR(exact_partition(h, Beta::finite(0)), 5.0, 1e-12);
  EXPECT_NEAR(exact_partition(h, Beta::inf()), 1.0, 1e-12);

  const auto c4 = potts(cycle_graph(4), 3);
  EXPECT_NEAR(exact_partition(c4, Beta::inf()), 18.0, 1e-12);
}

TEST(Models, FerromagneticIsingEdge) {
  const auto m = ising(builtin_graph("edge"));
  EXPECT_EQ(m.direction, Direction::ferromagnetic);
  for (double b : {0.0, 0.3, std::log(2.0), 2.0})
    EXPECT_NEAR(exact_partition(m, Beta::finite(b)), 2 * std::exp(b) + 2, 1e-12);
  EXPECT_THROW(log_partition(m, Beta::inf()), PreconditionError);
}

TEST(Models, MonotoneInDirection) {
  for (const auto& m : {potts(builtin_graph("grid2x2"), 3), matchings(builtin_graph("grid2x2")),
                        independent_sets(path_graph(4)), ising(builtin_graph("triangle"))}) {
    double prev = log_partition(m, Beta::finite(0));
    for (double b = 0.25; b <= 4.0; b += 0.25) {
      const double cur = log_partition(m, Beta::finite(b));
      if (m.sign() > 0) EXPECT_LT(cur, prev) << m.name;
      else EXPECT_GT(cur, prev) << m.name;
      prev = cur;
    }
  }
}

TEST(GibbsQsample, Limits) {
  const auto m = potts(builtin_graph("triangle"), 3);
  const auto q0 = gibbs_qsample(m, Beta::finite(0));
  for (double a : q0.amplitudes()) EXPECT_NEAR(a, 1.0 / std::sqrt(27.0), 1e-15);
  const auto pinf = gibbs_distribution(m, Beta::inf());
  for (std::size_t x = 0; x < m.size(); ++x) EXPECT_NEAR(pinf[x], m.energy[x] == 0 ? 1.0 / 6 : 0.0, 1e-15);
  double norm = 0.0;
  for (double a : gibbs_qsample(m, Beta::finite(1.3)).amplitudes()) norm += a * a;
  EXPECT_NEAR(norm, 1.0, 1e-10);
}

TEST(ScheduleQuantities, IsingEdgeAtLn2) {
  const auto m = ising(builtin_graph("edge"));
  const Beta b0 = Beta::finite(0), b1 = Beta::finite(std::log(2.0));
  EXPECT_NEAR(chebyshev_constant(m, b0, b1), 40.0 / 36.0, 1e-12);
  EXPECT_NEAR(gibbs_fidelity(m, b0, b1), std::pow(2 * std::sqrt(2.0) + 2, 2) / 24, 1e-12);
  EXPECT_NEAR(gibbs_fidelity(m, b0, b1), 0.9714, 1e-4);
  const auto x = schedule_ratio_variable(m, b0, b1);
  EXPECT_NEAR(x.relative_second_moment(), 40.0 / 36.0, 1e-12);
  EXPECT_NEAR(x.mean(), 6.0 / 4.0, 1e-12);
}

TEST(ScheduleQuantities, EqualTemperatures) {
  const auto m = potts(builtin_graph("triangle"), 3);
  const Beta b = Beta::finite(0.7);
  const auto x = schedule_ratio_variable(m, b, b);
  ASSERT_EQ(x.size(), 1u);
  EXPECT_EQ(x.outcomes[0], 1.0);
  EXPECT_NEAR(chebyshev_constant(m, b, b), 1.0, 1e-12);
  EXPECT_NEAR(gibbs_fidelity(m, b, b), 1.0, 1e-12);
}

TEST(ScheduleQuantities, IdentitiesOnRandomPairs) {
  RandomSource rng(70);
  for (const auto& m : {potts(builtin_graph("grid2x2"), 3), matchings(builtin_graph("cycle5")),
                        independent_sets(builtin_graph("grid3x3")), ising(builtin_graph("path4"))}) {
    for (int rep = 0; rep < 25; ++rep) {
      const double a = 3 * rng.uniform(), b = a + 2 * rng.uniform();
      const Beta ba = Beta::finite(a), bb = Beta::finite(b);
      const auto x = schedule_ratio_variable(m, ba, bb);
      const double ratio = std::exp(log_partition(m, bb) - log_partition(m, ba));
      EXPECT_NEAR(x.mean() / ratio, 1.0, 1e-10) << m.name;
      EXPECT_NEAR(x.relative_second_moment() / chebyshev_constant(m, ba, bb), 1.0, 1e-10) << m.name;
      const double f = gibbs_fidelity(m, ba, bb);
      EXPECT_NEAR(f, gibbs_fidelity_from_amplitudes(m, ba, bb), 1e-10) << m.name;
      EXPECT_LE(f, 1.0 + 1e-12);
    }
  }
}

TEST(Glauber, StationaryAndDetailedBalance) {
  const auto edge = ising(builtin_graph("edge"));
  const auto c0 = glauber_chain(edge, Beta::finite(0));
  for (double s : c0.stationary) EXPECT_NEAR(s, 0.25, 1e-15);

  const auto hc = independent_sets(path_graph(3));
  const auto c1 = glauber_chain(hc, Beta::finite(0));
  ASSERT_EQ(c1.size(), 5);
  for (double s : c1.stationary) EXPECT_NEAR(s, 0.2, 1e-15);

  for (const auto& m : {potts(builtin_graph("cycle4"), 3), matchings(builtin_graph("triangle")), hc, edge})
    for (double b : {0.0, 0.5, 2.0}) {
      const auto c = glauber_chain(m, Beta::finite(b));
      EXPECT_TRUE(c.reversible) << m.name;
      EXPECT_LE(detailed_balance_defect(c), 1e-10);
      EXPECT_LE(row_sum_defect(c.transition), 1e-12);
      Eigen::RowVectorXd pi(c.size());
      for (Eigen::Index i = 0; i < c.size(); ++i) pi(i) = c.stationary[static_cast<std::size_t>(i)];
      EXPECT_LE((pi * c.transition - pi).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_GT(spectral_gap(c).delta, 0.0);
    }
}

TEST(SpectralGap, SmallChains) {
  Eigen::MatrixXd p(2, 2);
  p << 0.5, 0.5, 0.5, 0.5;
  EXPECT_NEAR(spectral_gap(make_chain(p, {0.5, 0.5})).delta, 1.0, 1e-12);

  RandomSource rng(71);
  const auto base = random_reversible_chain(6, rng, false);
  const auto lazy = make_chain(0.5 * (base.transition + Eigen::MatrixXd::Identity(6, 6)), base.stationary);
  const auto eb = spectral_gap(base).eigenvalues, el = spectral_gap(lazy).eigenvalues;
  for (std::size_t i = 0; i < eb.size(); ++i) EXPECT_NEAR(el[i], (1 + eb[i]) / 2, 1e-12);

  const auto g = spectral_gap(glauber_chain(ising(builtin_graph("edge")), Beta::finite(std::log(2.0))));
  EXPECT_NEAR(g.delta, g.delta_general, 1e-10);
}

TEST(SpectralGap, RejectsNonReversible) {
  Eigen::MatrixXd p(3, 3);
  p << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  EXPECT_THROW(spectral_gap(make_chain(p, {1.0 / 3, 1.0 / 3, 1.0 / 3}) ), PreconditionError);
}

TEST(Szegedy, TwoStateChainPhase) {
  Eigen::MatrixXd p(2, 2);
  p << 0.5, 0.5, 0.5, 0.5;
  const auto w = verify_szegedy(make_chain(p, {0.5, 0.5}));
  EXPECT_NEAR(w.smallest_nonzero_phase, 0.25, 1e-10);
  EXPECT_LE(w.plane_error, 1e-10);
}

TEST(Szegedy, RandomChainsMatchDiscriminant) {
  RandomSource rng(72);
  for (int rep = 0; rep < 5; ++rep) {
    const auto c = random_reversible_chain(4, rng);
    const auto w = verify_szegedy(c);
    EXPECT_LE(w.plane_error, 1e-8);
    EXPECT_LE(w.spectrum_error, 1e-8);
    EXPECT_LE(w.invariance_residual, 1e-8);
  }
}

TEST(Models, StateCap) {
  EXPECT_THROW(potts(grid_graph(4, 4), 3), CapExceeded);
}
