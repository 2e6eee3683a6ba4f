#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "qsa/mean.hpp"
#include "qsa/stats.hpp"

using namespace qsa;

namespace {

FiniteRandomVariable random_table(RandomSource& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n), p(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = lo + (hi - lo) * rng.uniform();
    p[i] = 0.05 + rng.uniform();
    total += p[i];
  }
  for (double& q : p) q /= total;
  return FiniteRandomVariable::from_table(v, p);
}

}  // namespace

TEST(FiniteRandomVariable, TableNormalization) {
  const auto x = FiniteRandomVariable::from_table({2.0, 1.0, 2.0, 3.0}, {0.25, 0.25, 0.5, 0.0});
  ASSERT_EQ(x.size(), 2u);
  EXPECT_EQ(x.outcomes[0], 1.0);
  EXPECT_EQ(x.outcomes[1], 2.0);
  EXPECT_DOUBLE_EQ(x.probs[1], 0.75);
  EXPECT_THROW(FiniteRandomVariable::from_table({1.0}, {0.5}), InputError);
  EXPECT_THROW(FiniteRandomVariable::from_table({1.0, 2.0}, {1.5, -0.5}), InputError);
}

TEST(Qsample, Amplitudes) {
  const auto point = make_qsample(FiniteRandomVariable::point_mass(3.0));
  ASSERT_EQ(point.amplitudes().size(), 1u);
  EXPECT_EQ(point.amplitudes()[0], 1.0);

  const auto coin = make_qsample(FiniteRandomVariable::uniform({0.0, 1.0}));
  for (double a : coin.amplitudes()) EXPECT_NEAR(a, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(coin.state().norm(), 1.0, 1e-10);
  const ComplexVector s = coin.state();
  EXPECT_LT((apply_unitary(coin.reflection(), s) + s).norm(), 1e-12);
}

TEST(Qsample, Fidelity) {
  const auto x = FiniteRandomVariable::uniform({0.0, 1.0});
  const auto y = FiniteRandomVariable::from_table({1.0, 2.0}, {0.5, 0.5});
  EXPECT_NEAR(qsample_fidelity(x, x), 1.0, 1e-15);
  EXPECT_NEAR(qsample_fidelity(x, y), 0.25, 1e-15);
}

TEST(AverageVariable, WorkedCases) {
  const auto x = FiniteRandomVariable::uniform({0.0, 1.0});
  const auto same = average_variable(x, 1);
  EXPECT_EQ(same.outcomes, x.outcomes);
  EXPECT_EQ(same.probs, x.probs);

  const auto two = average_variable(x, 2);
  ASSERT_EQ(two.size(), 3u);
  EXPECT_NEAR(two.outcomes[1], 0.5, 1e-15);
  EXPECT_NEAR(two.probs[0], 0.25, 1e-15);
  EXPECT_NEAR(two.probs[1], 0.5, 1e-15);
  EXPECT_NEAR(two.probs[2], 0.25, 1e-15);
}

TEST(AverageVariable, MomentsScale) {
  RandomSource rng(50);
  for (int rep = 0; rep < 10; ++rep) {
    const auto x = random_table(rng, 6, -2.0, 3.0);
    for (std::uint64_t k : {2u, 4u, 8u}) {
      const auto xb = average_variable(x, k);
      EXPECT_NEAR(xb.mean(), x.mean(), 1e-10);
      EXPECT_NEAR(xb.variance(), x.variance() / static_cast<double>(k), 1e-10);
    }
  }
}

TEST(AverageVariable, CapIsEnforced) {
  RandomSource rng(51);
  const auto x = random_table(rng, 40, 0.0, 1.0);
  EXPECT_THROW(average_variable(x, 8, 1000), CapExceeded);
}

TEST(BernoulliSlice, WorkedCases) {
  const auto zero = FiniteRandomVariable::point_mass(0.0);
  EXPECT_EQ(bernoulli_slice(zero, 0.0, 1.0, +1), 0.0);
  EXPECT_EQ(bernoulli_slice(zero, 0.0, 1.0, -1), 0.0);

  const auto x = FiniteRandomVariable::uniform({0.5, 1.5});
  EXPECT_NEAR(bernoulli_slice(x, 0.0, 1.0, +1), 0.25, 1e-15);
  EXPECT_NEAR(bernoulli_slice(x, 1.0, 2.0, +1), 0.375, 1e-15);
}

TEST(TruncationLadder, Levels) {
  const auto l = TruncationLadder::make(0.5, 0.05);
  EXPECT_EQ(l.k, static_cast<int>(std::ceil(std::log2(580.0 / 0.05))));
  EXPECT_EQ(l.lower(0), 0.0);
  for (int j = 0; j <= l.k; ++j) EXPECT_DOUBLE_EQ(l.levels[j], std::ldexp(0.5, j));
}

TEST(TruncationLadder, TelescopingIdentity) {
  RandomSource rng(52);
  for (int rep = 0; rep < 50; ++rep) {
    const auto x = random_table(rng, 12, -50.0, 80.0);
    const double med = x.outcomes[x.size() / 2];
    const auto l = TruncationLadder::make(0.3 + rng.uniform(), 0.5);
    const auto xbar = x.shifted(med);
    double sum = 0.0;
    for (int j = 0; j <= l.k; ++j)
      sum += l.levels[j] * (bernoulli_slice(xbar, l.lower(j), l.levels[j], +1) -
                            bernoulli_slice(xbar, l.lower(j), l.levels[j], -1));
    const double ak = l.levels.back();
    double inside = 0.0, outside = 0.0;
    for (std::size_t i = 0; i < xbar.size(); ++i) {
      const double v = xbar.outcomes[i] * xbar.probs[i];
      (std::abs(xbar.outcomes[i]) <= ak ? inside : outside) += v;
    }
    EXPECT_NEAR(sum, inside, 1e-10);
    EXPECT_NEAR(sum + med, x.mean() - outside, 1e-10);
  }
}

TEST(TruncationLadder, ShiftedSecondMoment) {
  RandomSource rng(53);
  for (int rep = 0; rep < 50; ++rep) {
    const auto x = random_table(rng, 9, -5.0, 5.0);
    const double med = -3.0 + 6.0 * rng.uniform();
    const double lhs = x.shifted(med).second_moment();
    EXPECT_NEAR(lhs, x.variance() + std::pow(x.mean() - med, 2), 1e-10);
  }
}

TEST(Qestim, PointMassIsExact) {
  RandomSource rng(54);
  for (int rep = 0; rep < 20; ++rep) {
    const auto r = qestim(FiniteRandomVariable::point_mass(2.5), 8, 2.5, 1.0, 0.05, rng);
    EXPECT_EQ(r.estimate, 2.5);
  }
}

TEST(Qestim, UniformCoinBiasAndVariance) {
  const auto x = FiniteRandomVariable::uniform({0.0, 1.0});
  const std::size_t n = 5'000;
  const auto out = run_repetitions(55, n, [&](RandomSource& rng, std::size_t) {
    return qestim(x, 8, 0.5, 0.5, 0.05, rng).estimate;
  }, 1);
  const auto m = moments(out);
  EXPECT_LE(std::abs(m.mean() - 0.5), 0.05 * 0.5 + 3 * m.standard_error());
  EXPECT_LE(m.variance(), std::pow(0.5 / 8, 2) + 3 * m.variance_standard_error());
}

TEST(Medi, PointMassAndProbeBound) {
  RandomSource rng(56);
  EXPECT_EQ(medi(FiniteRandomVariable::point_mass(4.0), 0.1, rng).median, 4.0);
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const auto x = FiniteRandomVariable::uniform(v);
  for (int rep = 0; rep < 50; ++rep) {
    const auto r = medi(x, 0.1, rng);
    EXPECT_LE(r.probes, static_cast<int>(std::ceil(std::log2(101.0))));
  }
}

TEST(Medi, SeventeenSigmaContract) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const auto x = FiniteRandomVariable::uniform(v);
  const double sigma = std::sqrt(x.variance());
  const std::size_t n = 5'000;
  const auto out = run_repetitions(57, n, [&](RandomSource& rng, std::size_t) {
    return medi(x, 0.1, rng).median;
  }, 1);
  Proportion ok{0, n};
  for (double m : out) ok.successes += std::abs(x.mean() - m) <= 17 * sigma;
  EXPECT_GE(ok.value(), 0.9 - 3 * ok.standard_error());
}

TEST(Anneal, ExpectedCost) {
  RandomSource rng(58);
  const auto same = anneal(1.0, rng);
  EXPECT_TRUE(same.short_circuit);
  EXPECT_EQ(same.reflections, 1u);
  EXPECT_THROW(anneal(0.0, rng), PreconditionError);
  for (double f : {0.5, std::exp(-2.0)}) {
    const std::size_t n = 50'000;
    const auto out = run_repetitions(59, n, [&](RandomSource& r, std::size_t) {
      return static_cast<double>(anneal(f, r).reflections);
    }, 1);
    EXPECT_NEAR(moments(out).mean() / (1 + 1 / (2 * f)), 1.0, 0.05) << "fidelity " << f;
  }
}

TEST(Anneal, ReplacesSourceState) {
  RandomSource rng(60);
  Qsample src = make_qsample(FiniteRandomVariable::uniform({0.0, 1.0}));
  const Qsample dst = make_qsample(FiniteRandomVariable::from_table({0.0, 1.0}, {0.7, 0.3}));
  anneal(src, dst, rng);
  EXPECT_EQ(src.base.probs, dst.base.probs);
  EXPECT_GE(src.reflections, 1u);
}

TEST(Qprod, PointMassesMultiplyExactly) {
  RandomSource rng(61);
  const std::vector<FiniteRandomVariable> xs(4, FiniteRandomVariable::point_mass(1.0));
  const auto stages = prepare_product_stages(xs, 1.05);
  const auto r = qprod(stages, 1.05, 0.1, rng);
  EXPECT_EQ(r.estimate, 1.0);
  double by_stage = 0.0;
  for (const auto& [k, v] : r.ledger.reflections_by_stage) by_stage += v;
  EXPECT_DOUBLE_EQ(by_stage, r.ledger.reflections);
}

TEST(Qprod, AveragingCount) {
  EXPECT_EQ(averaging_count(std::exp(2.0)), 7386u);
  EXPECT_EQ(averaging_count(1.05), 58u);
  EXPECT_EQ(averaging_count(1.0001), 1u);
}

TEST(Qprod, LedgerConservation) {
  RandomSource rng(62);
  const auto x = FiniteRandomVariable::uniform({0.8, 1.2});
  const auto stages = prepare_product_stages({x, x, x}, 1.05);
  const auto r = qprod(stages, 1.05, 0.1, rng);
  double total = 0.0;
  for (const auto& s : r.stages) {
    EXPECT_DOUBLE_EQ(s.reflections, s.medi_reflections + s.qestim_reflections + s.anneal_reflections);
    total += s.reflections;
  }
  EXPECT_DOUBLE_EQ(total, r.ledger.reflections);
}

TEST(Qprod, RelativeVarianceOfIndependentProduct) {
  RandomSource rng(63);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<FiniteRandomVariable> ys;
    for (int i = 0; i < 3; ++i) ys.push_back(random_table(rng, 4, 0.5, 2.0));
    // Enumerate the product distribution directly.
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b)
        for (std::size_t c = 0; c < 4; ++c) {
          const double v = ys[0].outcomes[a] * ys[1].outcomes[b] * ys[2].outcomes[c];
          const double p = ys[0].probs[a] * ys[1].probs[b] * ys[2].probs[c];
          m1 += p * v;
          m2 += p * v * v;
        }
    double prod = 1.0;
    for (const auto& y : ys) prod *= 1.0 + y.variance() / (y.mean() * y.mean());
    EXPECT_NEAR((m2 - m1 * m1) / (m1 * m1), prod - 1.0, 1e-10);
  }
}
