#pragma once

// Phase estimation: closed-form output distribution, exact binary-digit
// arithmetic on phases, and unbiased low-variance phase estimation.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "qsa/error.hpp"
#include "qsa/random.hpp"

namespace qsa {

using u128 = unsigned __int128;

/// A phase in [0, 1) stored as a 128-bit binary fraction: value = bits / 2^128.
/// Addition wraps modulo 1, and doubles convert exactly.
struct Phase {
  u128 bits = 0;

  static Phase from_double(double x) {
    require(x >= 0.0 && x < 1.0, "phase must lie in [0, 1)");
    const double scaled_hi = std::ldexp(x, 64);
    const auto hi = static_cast<std::uint64_t>(scaled_hi);
    const double rest = scaled_hi - static_cast<double>(hi);
    const auto lo = static_cast<std::uint64_t>(std::ldexp(rest, 64));
    return {(static_cast<u128>(hi) << 64) | lo};
  }

  // k / 2^log2_den for 0 <= k < 2^log2_den, exact.
  static Phase dyadic(std::uint64_t k, int log2_den) {
    require(log2_den >= 0 && log2_den <= 127, "dyadic denominator out of range");
    require(log2_den == 0 ? k == 0 : (log2_den >= 64 || k < (std::uint64_t{1} << log2_den)),
            "dyadic numerator out of range");
    return {static_cast<u128>(k) << (128 - log2_den)};
  }

  double to_double() const {
    const auto hi = static_cast<std::uint64_t>(bits >> 64);
    const auto lo = static_cast<std::uint64_t>(bits);
    return std::ldexp(static_cast<double>(hi), -64) + std::ldexp(static_cast<double>(lo), -128);
  }

  friend Phase operator+(Phase a, Phase b) { return {a.bits + b.bits}; }
  friend Phase operator-(Phase a, Phase b) { return {a.bits - b.bits}; }
  friend bool operator==(Phase a, Phase b) { return a.bits == b.bits; }
};

// Circular distance between two phases, in [0, 1/2].
inline double circular_distance(Phase a, Phase b) {
  const Phase d = a - b;
  const Phase e = b - a;
  return (d.bits < e.bits ? d : e).to_double();
}

inline int exact_log2(std::uint64_t t) {
  require(t >= 1 && std::has_single_bit(t), "t must be a power of two");
  return std::countr_zero(t);
}

/// theta = high + 2^-tau * low with high carrying the first tau binary digits.
struct BitSplit {
  int tau = 0;
  Phase high;
  Phase low;
};

inline BitSplit bit_split(Phase theta, int tau) {
  require(tau >= 0 && tau <= 127, "tau out of range");
  if (tau == 0) return {0, Phase{0}, theta};
  const u128 mask = ~u128{0} << (128 - tau);
  return {tau, Phase{theta.bits & mask}, Phase{theta.bits << tau}};
}

inline BitSplit bit_split(double theta, int tau) { return bit_split(Phase::from_double(theta), tau); }

// Reassembles high + 2^-tau * low.
inline Phase bit_join(const BitSplit& s) {
  if (s.tau == 0) return s.low;
  return Phase{s.high.bits + (s.low.bits >> s.tau)};
}

/// Probability that phase estimation with t outcomes on phase x returns i/t:
/// sin^2(t D pi) / (t^2 sin^2(D pi)), D the circular distance between x and i/t.
inline double pe_probability(Phase x, std::uint64_t t, std::uint64_t i) {
  const int lt = exact_log2(t);
  const double delta = circular_distance(x, Phase::dyadic(i % t, lt));
  if (delta == 0.0) return 1.0;
  // t * D equals the fractional part of t x up to an integer, so the numerator is
  // sin^2(pi frac(t x)) for every i.
  const double f = Phase{x.bits << lt}.to_double();
  const double num = std::sin(std::numbers::pi * f);
  const double den = static_cast<double>(t) * std::sin(std::numbers::pi * delta);
  return (num * num) / (den * den);
}

inline std::vector<double> pe_distribution(Phase x, std::uint64_t t) {
  require(t >= 2, "t must be at least 2");
  exact_log2(t);
  std::vector<double> p(t);
  for (std::uint64_t i = 0; i < t; ++i) p[i] = pe_probability(x, t, i);
  return p;
}

inline std::vector<double> pe_distribution(double theta, std::uint64_t t) {
  return pe_distribution(Phase::from_double(theta - std::floor(theta)), t);
}

/// Same closed form for an arbitrary grid size m (not necessarily a power of
/// two), with the phase given as a double.
inline double pe_probability_grid(double theta, std::uint64_t m, std::uint64_t i) {
  const double x = theta * static_cast<double>(m);
  const double d = x - static_cast<double>(i);
  const double dm = d / static_cast<double>(m);
  const double r = dm - std::round(dm);
  if (std::abs(r) < 1e-15) return 1.0;
  const double f = x - std::floor(x);
  const double num = std::sin(std::numbers::pi * f);
  const double den = static_cast<double>(m) * std::sin(std::numbers::pi * r);
  return std::min(1.0, (num * num) / (den * den));
}

namespace detail {

inline constexpr std::uint64_t kPeWindow = 16;

// Draws one phase-estimation outcome: inverse CDF over a window around the
// peak, full scan only when the draw lands in the tails.
inline std::uint64_t sample_pe_index(Phase x, std::uint64_t t, RandomSource& rng) {
  const int lt = exact_log2(t);
  const auto peak = static_cast<std::uint64_t>(x.bits >> (128 - lt)) & (t - 1);
  const std::uint64_t span = std::min<std::uint64_t>(t, 2 * kPeWindow);
  const std::uint64_t first = (peak + t - (kPeWindow - 1) % t) % t;
  double u = rng.uniform();
  std::uint64_t last = first;
  for (std::uint64_t k = 0; k < span; ++k) {
    last = (first + k) & (t - 1);
    const double p = pe_probability(x, t, last);
    if (u < p) return last;
    u -= p;
  }
  if (span == t) return last;
  for (std::uint64_t k = span; k < t; ++k) {
    last = (first + k) & (t - 1);
    const double p = pe_probability(x, t, last);
    if (u < p) return last;
    u -= p;
  }
  return last;
}

}  // namespace detail

/// Shift sets scanned by the exact phase stage. `covering` uses phi = k/(4 t'),
/// k < 32, a quarter-bin net over a whole 1/t interval, so some shift always
/// puts theta + phi inside the acceptance window. `narrow` uses phi = k/(16 t'),
/// k <= 8, which spans half a bin and misses the window for most theta.
enum class ShiftGrid { covering, narrow };

/// Selects how the contract oracles behave: exactly, or with the worst
/// admissible perturbation in the direction given by `sign`.
struct OracleOptions {
  bool adversarial = false;
  int sign = +1;
  ShiftGrid shifts = ShiftGrid::covering;
};

/// The simulated pair (U, |psi>) with U|psi> = exp(2 pi i theta)|psi>, theta in [0, 1/2].
class PhaseInstance {
 public:
  explicit PhaseInstance(double theta) : theta_(Phase::from_double(theta)), theta_value_(theta) {
    require(theta >= 0.0 && theta <= 0.5, "theta must lie in [0, 1/2]");
  }

  Phase theta() const noexcept { return theta_; }
  double theta_value() const noexcept { return theta_value_; }
  std::uint64_t controlled_ops() const noexcept { return controlled_ops_; }
  bool restored() const noexcept { return restored_; }

  void charge(std::uint64_t ops) noexcept { controlled_ops_ += ops; }
  void set_restored(bool r) noexcept { restored_ = r; }

 private:
  Phase theta_;
  double theta_value_;
  std::uint64_t controlled_ops_ = 0;
  bool restored_ = true;
};

/// One run of textbook phase estimation on the shifted unitary exp(2 pi i phi) U.
inline double sample_phase_estimate(PhaseInstance& inst, Phase phi, std::uint64_t t,
                                    RandomSource& rng) {
  const std::uint64_t i = detail::sample_pe_index(inst.theta() + phi, t, rng);
  inst.charge(t);
  return static_cast<double>(i) / static_cast<double>(t);
}

struct PhaseShift {
  Phase phi;
  int k = 0;
  std::uint64_t t_prime = 0;
};

struct ExactPhaseResult {
  bool found = false;
  PhaseShift shift;
  Phase theta_hat;        // (i/t')_{<= tau} for the accepted index
  std::uint64_t index = 0;
  int shifts_tried = 0;
  std::uint64_t repetitions = 0;  // N per shift
  double fallback = 0.0;  // mode/t' - phi of the last shift, used when nothing is found
};

inline int shift_count(ShiftGrid g) noexcept { return g == ShiftGrid::narrow ? 9 : 32; }

/// N = ceil(200 ln(8 K t' / eps)) for K shifts, so the union bound over all
/// histograms stays at eps/8 (K = 9 gives the 72 t'/eps form).
inline std::uint64_t epe_repetitions(std::uint64_t t_prime, double eps, ShiftGrid g = ShiftGrid::covering) {
  const double k = 8.0 * shift_count(g);
  return static_cast<std::uint64_t>(std::ceil(200.0 * std::log(k * static_cast<double>(t_prime) / eps)));
}

/// Steps 1-5 of unbiased phase estimation: scan shifts phi until the empirical
/// outcome histogram pins down the first tau digits of theta + phi.
inline ExactPhaseResult exact_phase_stage(PhaseInstance& inst, std::uint64_t t, double eps,
                                          RandomSource& rng, ShiftGrid grid = ShiftGrid::covering) {
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  require(t >= 8, "exact phase stage needs t >= 8");
  const int tau = exact_log2(t);
  const std::uint64_t tp = 8 * t;
  const int ltp = tau + 3;
  const std::uint64_t n = epe_repetitions(tp, eps, grid);
  const auto threshold = static_cast<std::int64_t>(std::ceil(0.17 * static_cast<double>(n)));

  ExactPhaseResult res;
  res.repetitions = n;
  res.shift.t_prime = tp;

  std::vector<std::uint64_t> bins;
  std::vector<std::int64_t> counts;
  const int shifts = shift_count(grid);
  const int step_bits = grid == ShiftGrid::narrow ? ltp + 4 : ltp + 2;
  // The covering grid is scanned cyclically from a random start, so the
  // expected number of shifts tried does not depend on where theta falls.
  const int start = grid == ShiftGrid::narrow ? 0 : std::min(shifts - 1, static_cast<int>(rng.uniform() * shifts));
  for (int j = 0; j < shifts; ++j) {
    const int k = (start + j) % shifts;
    const Phase phi = Phase::dyadic(static_cast<std::uint64_t>(k), step_bits);
    const Phase x = inst.theta() + phi;
    inst.charge(n * tp);
    ++res.shifts_tried;

    // Multinomial histogram of N runs through conditional binomials over a
    // window around the peak; the remainder is lumped unless it could hold a
    // bin above the threshold, so the acceptance decision is unaffected.
    constexpr std::uint64_t half = 4;
    const auto peak = static_cast<std::uint64_t>(x.bits >> (128 - ltp)) & (tp - 1);
    const std::uint64_t span = std::min<std::uint64_t>(tp, 2 * half);
    const std::uint64_t first = (peak + tp - (half - 1)) % tp;
    bins.clear();
    counts.clear();
    std::int64_t remaining = static_cast<std::int64_t>(n);
    double mass = 1.0;
    auto draw = [&](std::uint64_t bin) {
      const double p = pe_probability(x, tp, bin);
      std::int64_t c = 0;
      if (remaining > 0 && mass > 0.0) c = rng.binomial(remaining, std::clamp(p / mass, 0.0, 1.0));
      remaining -= c;
      mass -= p;
      bins.push_back(bin);
      counts.push_back(c);
    };
    for (std::uint64_t j = 0; j < span; ++j) draw((first + j) & (tp - 1));
    if (span < tp && remaining >= threshold)
      for (std::uint64_t j = span; j < tp && remaining > 0; ++j) draw((first + j) & (tp - 1));

    auto count_of = [&](std::uint64_t bin) -> std::int64_t {
      for (std::size_t q = 0; q < bins.size(); ++q)
        if (bins[q] == bin) return counts[q];
      return 0;
    };

    std::uint64_t best = bins.front();
    std::int64_t best_count = -1;
    bool hit = false;
    std::uint64_t hit_index = 0;
    std::vector<std::uint64_t> order(bins.begin(), bins.end());
    std::sort(order.begin(), order.end());
    for (std::uint64_t i : order) {
      const std::int64_t ci = count_of(i);
      if (ci > best_count) {
        best_count = ci;
        best = i;
      }
      if (hit || ci < threshold) continue;
      if (count_of((i + 1) & (tp - 1)) < threshold) continue;
      const double low = bit_split(Phase::dyadic(i, ltp), tau).low.to_double();
      if (low > 4.0 / 7.0 && low < 5.0 / 7.0) {
        hit = true;
        hit_index = i;
      }
    }
    res.shift = {phi, k, tp};
    res.fallback = static_cast<double>(best) / static_cast<double>(tp) - phi.to_double();
    if (hit) {
      res.found = true;
      res.index = hit_index;
      res.theta_hat = bit_split(Phase::dyadic(hit_index, ltp), tau).high;
      return res;
    }
  }
  return res;
}

/// Phase-to-amplitude conversion oracle. Returns p' with |sqrt p' - sqrt p| <= eps:
/// exactly p in contract-exact mode, sqrt p' = sqrt p + sign * eps in adversarial mode.
inline double phase_to_amplitude_oracle(double target, double eps, const OracleOptions& opt = {}) {
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  if (target < 0.25 || target > 0.75)
    throw PreconditionError("eigenphase outside the admissible conversion band [1/4, 3/4]");
  if (!opt.adversarial) return target;
  const double r = std::clamp(std::sqrt(target) + (opt.sign >= 0 ? eps : -eps), 0.0, 1.0);
  return r * r;
}

struct UpeResult {
  double estimate = 0.0;
  bool found = false;    // exact stage accepted a shift
  bool restored = true;
  std::uint64_t controlled_ops = 0;
  int shifts_tried = 0;
  double phi = 0.0;
  double theta_hat = 0.0;
  double lambda = 0.0;   // (theta + phi)_{> tau}
  double p_prime = 0.0;
  int b = 0;
};

/// Unbiased low-variance phase estimation. The conversion target is
/// lambda = (theta + phi)_{>tau} itself and b is a 0/1 coin, so that
/// E[b/t] = lambda/t and the output theta_hat + b/t - phi has mean theta.
inline UpeResult upe(PhaseInstance& inst, std::uint64_t t, double eps, RandomSource& rng,
                     const OracleOptions& opt = {}) {
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  const int tau = exact_log2(t);
  require(t >= 8, "upe needs t >= 8");
  const std::uint64_t before = inst.controlled_ops();

  UpeResult out;
  const ExactPhaseResult stage = exact_phase_stage(inst, t, eps, rng, opt.shifts);
  out.found = stage.found;
  out.shifts_tried = stage.shifts_tried;
  out.phi = stage.shift.phi.to_double();
  if (!stage.found) {
    out.estimate = stage.fallback;
    out.controlled_ops = inst.controlled_ops() - before;
    return out;
  }

  const Phase shifted = inst.theta() + stage.shift.phi;
  const double lambda = bit_split(shifted, tau).low.to_double();
  // Outside the band the conversion is uncontrolled; it is then modeled by the
  // unperturbed target. This happens only when the exact stage misfired.
  const double p_prime = (lambda >= 0.25 && lambda <= 0.75)
                             ? phase_to_amplitude_oracle(lambda, eps / 4.0, opt)
                             : lambda;
  const int b = rng.bernoulli(p_prime) ? 1 : 0;
  const auto conv_calls = static_cast<std::uint64_t>(std::ceil(std::log2(4.0 / eps)));
  inst.charge(t * conv_calls);

  out.theta_hat = stage.theta_hat.to_double();
  out.lambda = lambda;
  out.p_prime = p_prime;
  out.b = b;
  out.estimate = out.theta_hat + static_cast<double>(b) / static_cast<double>(t) - out.phi;
  out.controlled_ops = inst.controlled_ops() - before;
  return out;
}

}  // namespace qsa
