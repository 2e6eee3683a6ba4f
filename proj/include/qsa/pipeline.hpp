#pragma once

// Cooling schedules certified against the exact partition function, the
// telescoping-product partition-function estimator, and the classical
// sample-mean baseline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qsa/error.hpp"
#include "qsa/gibbs.hpp"
#include "qsa/ledger.hpp"
#include "qsa/mean.hpp"
#include "qsa/random.hpp"

namespace qsa {

inline const double kDefaultB = std::exp(2.0);

struct CoolingSchedule {
  std::vector<Beta> betas;
  double B = 0.0;
  std::vector<double> chebyshev_values;
  std::vector<double> fidelity_values;

  std::size_t length() const noexcept { return betas.empty() ? 0 : betas.size() - 1; }
};

namespace detail {

struct StepCheck {
  bool ok = false;
  double chebyshev = 0.0;
  double fidelity = 0.0;
};

inline StepCheck check_step(const GibbsModel& m, Beta b, Beta b_next, double big_b) {
  StepCheck s;
  s.chebyshev = chebyshev_constant(m, b, b_next);
  s.fidelity = gibbs_fidelity(m, b, b_next);
  s.ok = s.chebyshev <= big_b * (1.0 + 1e-12) && s.fidelity >= (1.0 - 1e-12) / big_b;
  return s;
}

inline void check_monotone(const GibbsModel& m, Beta b, Beta b_next) {
  const double za = log_partition(m, b), zb = log_partition(m, b_next);
  const bool ok = m.sign() > 0 ? zb <= za + 1e-12 : zb >= za - 1e-12;
  if (!ok) throw PreconditionError("partition function is not monotone in the model's direction");
}

}  // namespace detail

/// Default end point: inf for forward and backward models; ferromagnetic
/// models need an explicit finite target.
inline Beta default_target(const GibbsModel& m, std::optional<double> beta) {
  if (beta) return Beta::finite(*beta);
  if (m.direction == Direction::ferromagnetic)
    throw PreconditionError("ferromagnetic models need a finite target beta");
  return Beta::inf();
}

/// Greedy maximal steps from beta = 0: the target is tried first, otherwise
/// the largest next beta meeting both bounds is found by doubling and then
/// bisection to 1e-9. Once Z(beta) is within (1 +- eps/8) Z(inf) the schedule
/// closes at inf.
inline CoolingSchedule generate_schedule(const GibbsModel& m, double big_b, double eps, Beta target,
                                         double tolerance = 1e-9) {
  require(big_b > 1.0, "B must exceed 1");
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  detail::check_monotone(m, Beta::finite(0.0), target);
  CoolingSchedule s;
  s.B = big_b;
  Beta cur = Beta::finite(0.0);
  s.betas.push_back(cur);
  auto push = [&](Beta next, const detail::StepCheck& c) {
    detail::check_monotone(m, cur, next);
    s.betas.push_back(next);
    s.chebyshev_values.push_back(c.chebyshev);
    s.fidelity_values.push_back(c.fidelity);
    cur = next;
  };
  const double log_z_inf = target.infinite ? log_partition(m, target) : 0.0;
  for (int step = 0; step < 10'000; ++step) {
    if (const auto c = detail::check_step(m, cur, target, big_b); c.ok) {
      push(target, c);
      return s;
    }
    double lo = cur.value;
    double hi = target.infinite ? cur.value + std::max(1.0, cur.value) : target.value;
    if (target.infinite) {
      while (detail::check_step(m, cur, Beta::finite(hi), big_b).ok) {
        lo = hi;
        hi = cur.value + 2.0 * (hi - cur.value);
        if (hi > 1e12) throw Error("schedule search diverged");
      }
    }
    while (hi - lo > tolerance) {
      const double mid = 0.5 * (lo + hi);
      if (detail::check_step(m, cur, Beta::finite(mid), big_b).ok) lo = mid;
      else hi = mid;
    }
    if (lo <= cur.value) throw Error("schedule generation made no progress at beta = " + cur.str());
    const Beta next = Beta::finite(lo);
    push(next, detail::check_step(m, cur, next, big_b));
    if (target.infinite && std::abs(std::expm1(log_partition(m, cur) - log_z_inf)) <= eps / 8.0) {
      const auto c = detail::check_step(m, cur, target, big_b);
      if (!c.ok) throw Error("closing step to beta = inf violates the schedule bounds");
      push(target, c);
      return s;
    }
  }
  throw Error("schedule exceeded 10000 steps");
}

/// Re-verifies both bounds and the recorded values of every step.
inline bool verify_schedule(const GibbsModel& m, const CoolingSchedule& s, double tol = 1e-9) {
  for (std::size_t i = 0; i + 1 < s.betas.size(); ++i) {
    const auto c = detail::check_step(m, s.betas[i], s.betas[i + 1], s.B);
    if (!c.ok) return false;
    if (std::abs(c.chebyshev - s.chebyshev_values[i]) > tol || std::abs(c.fidelity - s.fidelity_values[i]) > tol)
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Partition-function estimation

struct PartitionConfig {
  double B = kDefaultB;
  double eps = 0.25;
  double averaging_scale = 1.0;
  double walk_constant = 2.0;
  std::optional<double> target_beta;
  NduaeOptions nduae;
};

/// Everything about an estimate that does not depend on the random seed.
struct PartitionPlan {
  GibbsModel model;
  PartitionConfig config;
  Beta target;
  CoolingSchedule schedule;
  std::vector<FiniteRandomVariable> ratios;  // X_i
  std::vector<ProductStage> stages;
  std::vector<double> gaps;                  // Glauber gap at each stage start (NaN above the cap)
  bool inverted = false;                     // backward model: Z(0) = Z(inf) / product
  double z_known = 0.0;                      // Z at the known end of the schedule
  double z_truth = 0.0;                      // enumerated value being estimated
  double eps_product = 0.0;                  // accuracy handed to the product estimator
};

inline PartitionPlan plan_partition(const GibbsModel& m, const PartitionConfig& cfg) {
  require(cfg.eps > 0.0 && cfg.eps < 1.0, "eps must lie in (0, 1)");
  PartitionPlan plan;
  plan.model = m;
  plan.config = cfg;
  plan.target = default_target(m, cfg.target_beta);
  plan.schedule = generate_schedule(m, cfg.B, cfg.eps, plan.target);
  plan.inverted = m.direction == Direction::backward;
  if (plan.inverted) {
    // Relative error eps/(1+eps) on the product gives relative error eps on its inverse.
    plan.z_known = exact_partition(m, plan.target);
    plan.z_truth = exact_partition(m, Beta::finite(0.0));
    plan.eps_product = cfg.eps / (1.0 + cfg.eps);
  } else {
    plan.z_known = exact_partition(m, Beta::finite(0.0));
    plan.z_truth = exact_partition(m, plan.target);
    plan.eps_product = cfg.eps;
  }
  const auto& betas = plan.schedule.betas;
  std::vector<double> fidelities;
  for (std::size_t i = 0; i + 1 < betas.size(); ++i) {
    plan.ratios.push_back(schedule_ratio_variable(m, betas[i], betas[i + 1]));
    if (i + 2 < betas.size()) fidelities.push_back(gibbs_fidelity(m, betas[i], betas[i + 1]));
    double gap = std::numeric_limits<double>::quiet_NaN();
    if (m.size() <= kChainCap && m.size() > 1) gap = spectral_gap(glauber_chain(m, betas[i])).delta;
    else if (m.size() == 1) gap = 1.0;
    plan.gaps.push_back(gap);
  }
  plan.stages = prepare_product_stages(plan.ratios, cfg.B, cfg.averaging_scale, fidelities);
  return plan;
}

struct StageReport {
  std::string beta;
  std::string beta_next;
  double median = 0.0;
  double estimate = 0.0;
  double truth = 0.0;
  double reflections = 0.0;
  double walk_steps = 0.0;
  bool restored = true;
};

struct EstimateReport {
  std::string label;
  std::string arm;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double truth = 0.0;
  double rel_error = 0.0;
  double eps = 0.0;
  bool success = false;
  bool restored = true;
  ResourceLedger ledger;
  std::vector<StageReport> stages;

  void finalize() {
    rel_error = truth != 0.0 ? std::abs(estimate - truth) / std::abs(truth) : std::abs(estimate - truth);
    success = std::isfinite(estimate) && rel_error <= eps;
  }
};

inline std::uint64_t walk_steps_per_reflection(double gap, double c) {
  if (!(gap > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::ceil(c / std::sqrt(gap)));
}

inline double combine_product(const PartitionPlan& plan, double product) {
  if (!plan.inverted) return plan.z_known * product;
  return product > 0.0 ? plan.z_known / product : std::numeric_limits<double>::infinity();
}

/// Runs the product estimator over the plan's ratio variables. Reflections at
/// each stage are converted to walk steps with the Glauber gap at that stage.
inline EstimateReport estimate_partition(const PartitionPlan& plan, std::uint64_t seed, RandomSource& rng) {
  QprodOptions opt;
  opt.nduae = plan.config.nduae;
  const QprodResult q = qprod(plan.stages, plan.config.B, plan.eps_product, rng, opt);
  EstimateReport r;
  r.label = plan.model.name;
  r.arm = "quantum";
  r.seed = seed;
  r.eps = plan.config.eps;
  r.truth = plan.z_truth;
  r.estimate = combine_product(plan, q.estimate);
  r.ledger = q.ledger;
  const auto& betas = plan.schedule.betas;
  for (std::size_t i = 0; i < q.stages.size(); ++i) {
    const auto& d = q.stages[i];
    StageReport s;
    s.beta = betas[i].str();
    s.beta_next = betas[i + 1].str();
    s.median = d.median;
    s.estimate = d.estimate;
    s.truth = d.truth;
    s.reflections = d.reflections;
    s.walk_steps = d.reflections * static_cast<double>(walk_steps_per_reflection(plan.gaps[i], plan.config.walk_constant));
    s.restored = d.restored;
    r.ledger.walk_steps += s.walk_steps;
    r.restored = r.restored && d.restored;
    r.stages.push_back(s);
  }
  r.finalize();
  return r;
}

inline std::uint64_t classical_samples_per_stage(std::size_t ell, double big_b, double eps) {
  return static_cast<std::uint64_t>(std::ceil(8.0 * static_cast<double>(ell) * (big_b - 1.0) / (eps * eps)));
}

/// Product of per-stage sample means drawn exactly from each ratio variable,
/// with ceil(8 l (B - 1) / eps^2) samples per stage.
inline EstimateReport classical_baseline(const PartitionPlan& plan, std::uint64_t seed, RandomSource& rng) {
  const std::size_t ell = plan.ratios.size();
  const std::uint64_t m = classical_samples_per_stage(ell, plan.config.B, plan.eps_product);
  EstimateReport r;
  r.label = plan.model.name;
  r.arm = "classical";
  r.seed = seed;
  r.eps = plan.config.eps;
  r.truth = plan.z_truth;
  double product = 1.0;
  const auto& betas = plan.schedule.betas;
  for (std::size_t i = 0; i < ell; ++i) {
    const auto& x = plan.ratios[i];
    std::vector<double> cum(x.probs.size());
    std::partial_sum(x.probs.begin(), x.probs.end(), cum.begin());
    double sum = 0.0;
    for (std::uint64_t k = 0; k < m; ++k) sum += x.outcomes[sample_cumulative(cum, rng)];
    const double mean = sum / static_cast<double>(m);
    product *= mean;
    StageReport s;
    s.beta = betas[i].str();
    s.beta_next = betas[i + 1].str();
    s.estimate = mean;
    s.truth = x.mean();
    r.stages.push_back(s);
    r.ledger.classical_samples += m;
  }
  r.estimate = combine_product(plan, product);
  r.finalize();
  return r;
}

}  // namespace qsa
