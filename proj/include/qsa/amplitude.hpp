#pragma once

// Amplitude estimation in the two-dimensional Grover plane: nondestructive
// coin flips, the canonical amplitude-estimation outcome law, amplified
// uncomputation, nondestructive and unbiased amplitude estimation.

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <tuple>
#include <vector>

#include "qsa/error.hpp"
#include "qsa/phase.hpp"
#include "qsa/qcore.hpp"
#include "qsa/random.hpp"

namespace qsa {

/// The pair (|psi>, Pi) reduced to its Grover plane: p = ||Pi psi||^2 and the
/// current residual state in the {good, bad} basis.
struct AmplitudeInstance {
  double p = 0.0;
  TwoLevelState state;
  std::uint64_t reflections = 0;
  bool restored = true;

  explicit AmplitudeInstance(double prob) : p(prob), state(TwoLevelState::from_amplitude(prob)) {
    require(prob >= 0.0 && prob <= 1.0, "amplitude must lie in [0, 1]");
  }

  TwoLevelState psi() const { return TwoLevelState::from_amplitude(p); }
};

struct CoinFlipResult {
  int b = 0;
  std::uint64_t iterations = 0;
};

inline constexpr std::uint64_t kCoinIterationCap = 1'000'000;

/// Marriott-Watrous coin: measure {Pi, id - Pi}, then alternate {|psi><psi|, ...}
/// and {Pi, ...} measurements until the residual state is |psi> again.
inline CoinFlipResult coin_flip(AmplitudeInstance& inst, RandomSource& rng) {
  const TwoLevelState psi = inst.psi();
  const TwoLevelState good{Complex(1.0, 0.0), Complex(0.0, 0.0), psi.basis};
  TwoLevelState state = psi;
  CoinFlipResult out;
  out.b = measure_along(state, good, rng) ? 1 : 0;
  bool back = measure_along(state, psi, rng);
  inst.reflections += 2;
  while (!back) {
    if (++out.iterations > kCoinIterationCap)
      throw Error("coin flip exceeded the iteration cap");
    measure_along(state, good, rng);
    back = measure_along(state, psi, rng);
    inst.reflections += 2;
  }
  inst.state = psi;
  inst.restored = true;
  return out;
}

/// Outcome law of canonical amplitude estimation with an m-point phase grid:
/// values sin^2(pi j / m) for j = 0..floor(m/2) with their probabilities.
struct AeDistribution {
  std::uint64_t m = 0;
  std::vector<double> values;
  std::vector<double> probs;
};

inline double grover_phase(double p) { return std::asin(std::sqrt(std::clamp(p, 0.0, 1.0))) / std::numbers::pi; }

inline AeDistribution ae_distribution(double p, std::uint64_t m) {
  require(m >= 2, "grid size must be at least 2");
  require(p >= 0.0 && p <= 1.0, "amplitude must lie in [0, 1]");
  const double theta = grover_phase(p);
  AeDistribution d;
  d.m = m;
  const std::uint64_t half = m / 2;
  for (std::uint64_t j = 0; j <= half; ++j) {
    double mass = pe_probability_grid(theta, m, j);
    // The two conjugate eigenphases fold outcomes j and m - j together.
    if (j != 0 && 2 * j != m) mass += pe_probability_grid(theta, m, m - j);
    const double s = std::sin(std::numbers::pi * static_cast<double>(j) / static_cast<double>(m));
    d.values.push_back(s * s);
    d.probs.push_back(mass);
  }
  return d;
}

/// Fixed-point amplitude amplification plan: L oracle rounds (odd) driving the
/// failure probability to at most eta whenever the initial success probability
/// is at least lambda.
struct FixedPointPlan {
  std::uint64_t rounds = 1;
  double failure = 0.0;  // exact failure probability at the true success probability
};

namespace detail {

inline double chebyshev_t(double n, double x) {
  if (std::abs(x) <= 1.0) return std::cos(n * std::acos(x));
  const double v = std::cosh(n * std::acosh(std::abs(x)));
  return (x < 0.0 && std::fmod(n, 2.0) == 1.0) ? -v : v;
}

}  // namespace detail

inline FixedPointPlan plan_fixed_point(double success, double lambda_lb, double eta) {
  require(eta > 0.0 && eta < 1.0, "eta must lie in (0, 1)");
  require(lambda_lb > 0.0 && lambda_lb <= 1.0, "lambda must lie in (0, 1]");
  const double delta = std::sqrt(eta);
  auto rounds = static_cast<std::uint64_t>(std::ceil(std::log(2.0 / delta) / std::sqrt(lambda_lb)));
  if (rounds % 2 == 0) ++rounds;
  const double l = static_cast<double>(rounds);
  const double gamma_inv = detail::chebyshev_t(1.0 / l, 1.0 / delta);
  const double arg = gamma_inv * std::sqrt(std::max(0.0, 1.0 - success));
  const double tl = detail::chebyshev_t(l, arg);
  return {rounds, std::clamp(eta * tl * tl, 0.0, 1.0)};
}

struct UncomputeOutcome {
  std::size_t index = 0;
  bool restored = true;
  std::uint64_t rounds = 0;
};

/// Amplified uncomputation: with probability >= 1 - eta the input state is
/// restored and i is drawn from pi(i)^2 / sum pi^2. On failure the draw
/// follows pi itself and the state is lost.
inline UncomputeOutcome amplified_uncomputation(const std::vector<double>& pi, double lambda_lb,
                                                double eta, RandomSource& rng) {
  require(!pi.empty(), "empty distribution");
  double w = 0.0;
  for (double x : pi) w += x * x;
  if (lambda_lb > w + 1e-12)
    throw PreconditionError("lambda exceeds the collision probability of the distribution");
  const FixedPointPlan plan = plan_fixed_point(w, lambda_lb, eta);
  UncomputeOutcome out;
  out.rounds = plan.rounds;
  out.restored = !rng.bernoulli(plan.failure);
  std::vector<double> cum(pi.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    acc += out.restored ? pi[i] * pi[i] : pi[i];
    cum[i] = acc;
  }
  out.index = sample_cumulative(cum, rng);
  return out;
}

// ---------------------------------------------------------------------------
// Nondestructive amplitude estimation

inline std::uint64_t ndae_grid(double t) {
  return std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::ceil(2.5 * t)));
}

inline std::uint64_t ndae_runs(double eta) {
  auto r = static_cast<std::uint64_t>(std::ceil(18.0 * std::log(2.0 / eta)));
  if (r % 2 == 0) ++r;
  return r;
}

/// Output law of one ndae call: the median of R canonical runs, then squared
/// and renormalized by amplified uncomputation (or left as is on failure).
struct NdaeTable {
  std::uint64_t m = 0;
  std::uint64_t runs = 0;
  std::vector<double> values;
  std::vector<double> cum_success;  // cumulative of pi^2 / sum pi^2
  std::vector<double> cum_failure;  // cumulative of pi
  FixedPointPlan plan;
};

namespace detail {

inline constexpr std::uint64_t kAeWindow = 2048;

// Sum over integers d = d0..d1 of csc^2(pi d / m) for d far from 0 and m
// (Euler-Maclaurin through the first derivative term).
inline double csc2_sum(double d0, double d1, double m) {
  if (d1 < d0) return 0.0;
  const double c = std::numbers::pi / m;
  auto h = [&](double d) {
    const double s = std::sin(c * d);
    return 1.0 / (s * s);
  };
  auto hp = [&](double d) {
    const double s = std::sin(c * d);
    return -2.0 * c * std::cos(c * d) / (s * s * s);
  };
  auto integral = [&](double d) { return -std::cos(c * d) / std::sin(c * d) / c; };
  return integral(d1) - integral(d0) + 0.5 * (h(d0) + h(d1)) + (hp(d1) - hp(d0)) / 12.0;
}

// P[median of `runs` draws <= v_j] given F_j = P[draw <= v_j].
inline double median_cdf(double f, std::uint64_t runs) {
  if (f <= 0.0) return 0.0;
  if (f >= 1.0) return 1.0;
  const double h = static_cast<double>((runs + 1) / 2);
  return boost::math::ibeta(h, static_cast<double>(runs) - h + 1.0, f);
}

}  // namespace detail

inline std::shared_ptr<const NdaeTable> build_ndae_table(double p, std::uint64_t m, std::uint64_t runs) {
  auto table = std::make_shared<NdaeTable>();
  table->m = m;
  table->runs = runs;
  const double md = static_cast<double>(m);
  const std::uint64_t half = m / 2;
  const double theta = grover_phase(p);
  const double x = theta * md;
  const double f = x - std::floor(x);
  const double sf = std::sin(std::numbers::pi * f);
  const double scale = sf * sf / (md * md);
  auto pe = [&](std::int64_t i) {
    const auto idx = static_cast<std::uint64_t>((i % static_cast<std::int64_t>(m) + static_cast<std::int64_t>(m)) %
                                                static_cast<std::int64_t>(m));
    return pe_probability_grid(theta, m, idx);
  };

  // F_j = P[outcome index in the arc -j..j], for j in [j0, j1].
  std::uint64_t j0 = 0, j1 = half;
  const auto peak = static_cast<std::uint64_t>(std::floor(x));
  double f0 = 0.0;
  if (m > 8 * detail::kAeWindow) {
    j0 = peak > detail::kAeWindow ? peak - detail::kAeWindow : 0;
    j1 = std::min(half, peak + detail::kAeWindow);
    if (j0 == 0) {
      f0 = pe(0);
    } else if (scale > 0.0) {
      // Arc -j0..j0 sits at distances x - j0 .. x + j0 from the peak.
      f0 = scale * detail::csc2_sum(x - static_cast<double>(j0), x + static_cast<double>(j0), md);
    }
  } else {
    f0 = pe(0);
  }
  std::vector<double> big_f;
  big_f.reserve(j1 - j0 + 1);
  double acc = f0;
  big_f.push_back(acc);
  for (std::uint64_t j = j0 + 1; j <= j1; ++j) {
    acc += pe(static_cast<std::int64_t>(j));
    if (2 * j != m) acc += pe(-static_cast<std::int64_t>(j));
    big_f.push_back(std::min(acc, 1.0));
  }
  if (j1 == half) big_f.back() = 1.0;

  std::vector<double> pi;
  double prev = 0.0;
  for (std::size_t q = 0; q < big_f.size(); ++q) {
    double g = detail::median_cdf(big_f[q], runs);
    if (q + 1 == big_f.size()) g = 1.0;  // mass above the window is below double resolution
    const double mass = std::max(0.0, g - prev);
    prev = std::max(prev, g);
    const double s = std::sin(std::numbers::pi * static_cast<double>(j0 + q) / md);
    table->values.push_back(s * s);
    pi.push_back(mass);
  }
  double w = 0.0;
  for (double v : pi) w += v * v;
  double a = 0.0, b = 0.0;
  for (double v : pi) {
    a += v * v;
    b += v;
    table->cum_success.push_back(a);
    table->cum_failure.push_back(b);
  }
  return table;
}

namespace detail {

struct NdaeKey {
  std::uint64_t p_bits, m, runs, eta_bits;
  auto operator<=>(const NdaeKey&) const = default;
};

inline std::shared_ptr<const NdaeTable> cached_ndae_table(double p, std::uint64_t m, double eta) {
  thread_local std::map<NdaeKey, std::shared_ptr<const NdaeTable>> cache;
  const std::uint64_t runs = ndae_runs(eta);
  const NdaeKey key{std::bit_cast<std::uint64_t>(p), m, runs, std::bit_cast<std::uint64_t>(eta)};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  if (cache.size() > 50000) cache.clear();
  auto raw = std::const_pointer_cast<NdaeTable>(build_ndae_table(p, m, runs));
  // The median law puts at least 1/8 on collisions in every case checked; the
  // bound is still clipped to the exact value so the plan stays valid.
  const double w = raw->cum_success.back();
  raw->plan = plan_fixed_point(w, std::min(0.125, w), eta / 2.0);
  cache.emplace(key, raw);
  return raw;
}

}  // namespace detail

struct NdaeResult {
  double estimate = 0.0;
  bool restored = true;
  std::uint64_t reflections = 0;
};

/// Nondestructive amplitude estimation with accuracy parameter t: median of
/// R = ceil(18 ln(2/eta)) canonical runs on a ceil(5t/2)-point grid, wrapped in
/// amplified uncomputation with lambda = 1/8 and failure eta/2.
inline NdaeResult ndae(AmplitudeInstance& inst, double t, double eta, RandomSource& rng) {
  require(t >= 1.0, "t must be at least 1");
  require(eta > 0.0 && eta < 0.5, "eta must lie in (0, 1/2)");
  const std::uint64_t m = ndae_grid(t);
  const auto table = detail::cached_ndae_table(inst.p, m, eta);
  NdaeResult out;
  out.restored = !rng.bernoulli(table->plan.failure);
  const auto& cum = out.restored ? table->cum_success : table->cum_failure;
  out.estimate = table->values[sample_cumulative(cum, rng)];
  // Each round runs the R-fold estimator forward and backward (2 m R reflections
  // each way) plus one reflection through |psi>.
  out.reflections = table->plan.rounds * (4 * m * table->runs + 1);
  inst.reflections += out.reflections;
  if (!out.restored) inst.restored = false;
  return out;
}

// ---------------------------------------------------------------------------
// Contract oracles

struct AmplificationResult {
  double tau = 1.0;
  double p_amplified = 0.0;
  double eps_used = 0.0;
  std::uint64_t reflections = 0;  // applications of the two base reflections per use of V
};

/// Linear amplitude amplification: ||Pi V psi|| = tau sqrt(p) up to eps.
inline AmplificationResult linear_amplify(double p, double tau, double eps, const OracleOptions& opt = {}) {
  require(p >= 0.0 && p <= 1.0, "amplitude must lie in [0, 1]");
  require(tau >= 1.0, "tau must be at least 1");
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  const double amp = tau * std::sqrt(p);
  if (tau > 1.0 && amp > 0.5 + 1e-12)
    throw PreconditionError("linear amplification needs tau sqrt(p) <= 1/2");
  AmplificationResult r;
  r.tau = tau;
  r.eps_used = eps;
  double a = amp;
  if (opt.adversarial) a = std::clamp(amp + (opt.sign >= 0 ? eps : -eps), 0.0, 1.0);
  r.p_amplified = a * a;
  r.reflections = static_cast<std::uint64_t>(std::ceil(tau * std::log2(1.0 / eps)));
  return r;
}

/// Amplitude-to-phase conversion: an eigenphase theta = p/(2 pi) (fraction of a
/// turn), shifted by the admissible error eps'/(2 pi) in adversarial mode.
struct PhaseOracle {
  double theta = 0.0;
  double eps_prime = 0.0;
  std::uint64_t reflections_per_use = 0;  // uses of the amplitude-encoding reflections
};

inline PhaseOracle amp_to_phase_oracle(double p_amplified, double eps_prime, const OracleOptions& opt = {}) {
  require(eps_prime > 0.0 && eps_prime < 1.0, "eps' must lie in (0, 1)");
  PhaseOracle o;
  o.eps_prime = eps_prime;
  o.theta = p_amplified / (2.0 * std::numbers::pi);
  if (opt.adversarial) o.theta += (opt.sign >= 0 ? 1.0 : -1.0) * eps_prime / (2.0 * std::numbers::pi);
  o.theta = std::clamp(o.theta, 0.0, 0.5);
  o.reflections_per_use = static_cast<std::uint64_t>(std::ceil(std::log2(1.0 / eps_prime)));
  return o;
}

// ---------------------------------------------------------------------------
// Nondestructive unbiased amplitude estimation

struct NduaeOptions {
  OracleOptions oracle;
  double constants_scale = 1.0;  // multiplies the accuracy constants 2, 7 of the rough and UPE stages
};

struct NduaeResult {
  double estimate = 0.0;
  bool restored = true;
  bool coin_branch = false;
  bool upe_found = true;
  double q = 0.0;
  double tau = 1.0;
  std::uint64_t reflections = 0;
};

inline NduaeResult nduae(AmplitudeInstance& inst, double t, double eps, RandomSource& rng,
                         const NduaeOptions& opt = {}) {
  require(t >= 4.0, "t must be at least 4");
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  const std::uint64_t before = inst.reflections;
  NduaeResult out;

  const NdaeResult rough = ndae(inst, 2.0 * opt.constants_scale * t, eps / 8.0, rng);
  const double q = rough.estimate;
  out.q = q;
  out.restored = rough.restored;

  const double tau = std::max(1.0, 0.25 * std::min(t, q > 0.0 ? 1.0 / std::sqrt(q) : t));
  out.tau = tau;
  const double eps_lin = eps / 40.0;
  double p_amp;
  std::uint64_t cost_v;
  if (tau > 1.0 && tau * std::sqrt(inst.p) > 0.5 + 1e-12) {
    // The rough estimate missed by more than its guarantee; amplification
    // then saturates instead of staying linear.
    p_amp = std::min(1.0, tau * tau * inst.p);
    cost_v = static_cast<std::uint64_t>(std::ceil(tau * std::log2(1.0 / eps_lin)));
  } else {
    const AmplificationResult amp = linear_amplify(inst.p, tau, eps_lin, opt.oracle);
    p_amp = amp.p_amplified;
    cost_v = amp.reflections;
  }
  inst.reflections += cost_v;
  const std::uint64_t psi_prime_reflection = 2 * cost_v + 1;

  if (q <= 1.0 / (t * t)) {
    out.coin_branch = true;
    AmplitudeInstance amplified(p_amp);
    const CoinFlipResult coin = coin_flip(amplified, rng);
    inst.reflections += amplified.reflections * psi_prime_reflection;
    out.estimate = static_cast<double>(coin.b) / (tau * tau);
  } else {
    const double eps_prime = std::min(0.5, tau * tau / (t * t * std::log(t / (eps * tau))));
    const PhaseOracle pora = amp_to_phase_oracle(p_amp, eps_prime, opt.oracle);
    PhaseInstance phase(pora.theta);
    const double t_req = std::max(8.0, std::ceil(7.0 * opt.constants_scale * t / tau));
    const std::uint64_t t_upe = std::bit_ceil(static_cast<std::uint64_t>(t_req));
    const UpeResult est = upe(phase, t_upe, eps / 90.0, rng, opt.oracle);
    out.upe_found = est.found;
    inst.reflections += est.controlled_ops * pora.reflections_per_use * (psi_prime_reflection + 1);
    out.estimate = 2.0 * std::numbers::pi * est.estimate / (tau * tau);
  }
  if (!out.restored) inst.restored = false;
  out.reflections = inst.reflections - before;
  return out;
}

}  // namespace qsa
