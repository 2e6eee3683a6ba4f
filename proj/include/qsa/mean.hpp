#pragma once

// Finite random variables and their qsamples: unbiased mean, median and
// product estimators built on nondestructive amplitude estimation, and
// probabilistic annealing between qsamples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qsa/amplitude.hpp"
#include "qsa/error.hpp"
#include "qsa/ledger.hpp"
#include "qsa/qcore.hpp"
#include "qsa/random.hpp"

namespace qsa {

inline constexpr double kMergeTolerance = 1e-12;
inline constexpr std::size_t kAtomCap = 1'000'000;

/// A finite distribution with strictly increasing outcomes.
struct FiniteRandomVariable {
  std::vector<double> outcomes;
  std::vector<double> probs;

  /// Sorts, merges outcomes equal within 1e-12 (relative to the largest
  /// magnitude), drops zero-probability atoms and checks normalization.
  static FiniteRandomVariable from_table(std::vector<double> values, std::vector<double> p) {
    if (values.size() != p.size() || values.empty())
      throw InputError("outcome and probability tables must be non-empty and of equal length");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    double scale = 1.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    FiniteRandomVariable x;
    double total = 0.0;
    for (auto i : order) {
      if (!(p[i] >= 0.0)) throw InputError("negative or NaN probability");
      total += p[i];
      if (p[i] == 0.0) continue;
      if (!x.outcomes.empty() && values[i] - x.outcomes.back() <= kMergeTolerance * scale)
        x.probs.back() += p[i];
      else {
        x.outcomes.push_back(values[i]);
        x.probs.push_back(p[i]);
      }
    }
    if (std::abs(total - 1.0) > 1e-9) throw InputError("probabilities must sum to 1");
    for (double& q : x.probs) q /= total;
    return x;
  }

  static FiniteRandomVariable point_mass(double c) { return from_table({c}, {1.0}); }
  static FiniteRandomVariable uniform(const std::vector<double>& values) {
    return from_table(values, std::vector<double>(values.size(), 1.0 / static_cast<double>(values.size())));
  }

  std::size_t size() const noexcept { return outcomes.size(); }
  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m += outcomes[i] * probs[i];
    return m;
  }
  double second_moment() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m += outcomes[i] * outcomes[i] * probs[i];
    return m;
  }
  double variance() const {
    const double mu = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < size(); ++i) v += (outcomes[i] - mu) * (outcomes[i] - mu) * probs[i];
    return v;
  }
  double relative_second_moment() const {
    const double mu = mean();
    return second_moment() / (mu * mu);
  }
  FiniteRandomVariable shifted(double c) const {
    FiniteRandomVariable y = *this;
    for (double& v : y.outcomes) v -= c;
    return y;
  }
  double sample(RandomSource& rng) const {
    std::vector<double> cum(probs.size());
    std::partial_sum(probs.begin(), probs.end(), cum.begin());
    return outcomes[sample_cumulative(cum, rng)];
  }
};

/// Amplitude encoding sum_x sqrt(P[X = x]) |x>.
struct Qsample {
  FiniteRandomVariable base;
  bool restored = true;
  std::uint64_t reflections = 0;

  std::vector<double> amplitudes() const {
    std::vector<double> a(base.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::sqrt(base.probs[i]);
    return a;
  }

  ComplexVector state() const {
    if (static_cast<Eigen::Index>(base.size()) > kDenseCap) throw CapExceeded("qsample exceeds the dense cap");
    ComplexVector v(static_cast<Eigen::Index>(base.size()));
    const auto a = amplitudes();
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i];
    return v;
  }

  // id - 2 |pi_X><pi_X| as a dense matrix.
  Unitary reflection() const { return state_reflection(state()); }
};

inline Qsample make_qsample(const FiniteRandomVariable& x) { return Qsample{x, true, 0}; }

/// |<pi_X|pi_Y>|^2 over the union of the two supports.
inline double qsample_fidelity(const FiniteRandomVariable& x, const FiniteRandomVariable& y) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  double scale = 1.0;
  for (double v : x.outcomes) scale = std::max(scale, std::abs(v));
  for (double v : y.outcomes) scale = std::max(scale, std::abs(v));
  while (i < x.size() && j < y.size()) {
    const double d = x.outcomes[i] - y.outcomes[j];
    if (std::abs(d) <= kMergeTolerance * scale) {
      s += std::sqrt(x.probs[i] * y.probs[j]);
      ++i;
      ++j;
    } else if (d < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return s * s;
}

namespace detail {

// Distribution of the sum of independent variables given as (value, prob) tables.
inline std::vector<std::pair<double, double>> convolve(const std::vector<std::pair<double, double>>& a,
                                                       const std::vector<std::pair<double, double>>& b,
                                                       std::size_t cap) {
  double scale = 1.0;
  for (const auto& [v, p] : a) scale = std::max(scale, std::abs(v));
  for (const auto& [v, p] : b) scale = std::max(scale, std::abs(v));
  scale *= 2.0;
  const double quantum = kMergeTolerance * scale;
  std::unordered_map<long long, std::pair<double, double>> acc;
  acc.reserve(std::min(a.size() * b.size(), cap + 1));
  for (const auto& [va, pa] : a)
    for (const auto& [vb, pb] : b) {
      const double pr = pa * pb;
      if (pr == 0.0) continue;
      const double v = va + vb;
      auto& slot = acc[std::llround(v / quantum)];
      if (slot.second == 0.0) slot.first = v;
      slot.second += pr;
      if (acc.size() > cap)
        throw CapExceeded("averaged variable exceeds the atom cap; lower the averaging-constant-scale knob");
    }
  std::vector<std::pair<double, double>> out;
  out.reserve(acc.size());
  for (const auto& [k, vp] : acc) out.push_back(vp);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Distribution of (X_1 + ... + X_K)/K for independent copies of X, computed
/// exactly by repeated doubling with merging of equal values.
inline FiniteRandomVariable average_variable(const FiniteRandomVariable& x, std::uint64_t k,
                                             std::size_t cap = kAtomCap) {
  require(k >= 1, "K must be at least 1");
  if (k == 1) return x;
  std::vector<std::pair<double, double>> base(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) base[i] = {x.outcomes[i], x.probs[i]};
  std::vector<std::pair<double, double>> result{{0.0, 1.0}};
  std::uint64_t rem = k;
  while (rem) {
    if (rem & 1) result = detail::convolve(result, base, cap);
    rem >>= 1;
    if (rem) base = detail::convolve(base, base, cap);
  }
  std::vector<double> values, probs;
  double total = 0.0;
  for (const auto& [v, p] : result) total += p;
  for (const auto& [v, p] : result) {
    values.push_back(v / static_cast<double>(k));
    probs.push_back(p / total);
  }
  return FiniteRandomVariable::from_table(std::move(values), std::move(probs));
}

/// mu_j^+ = E[(Xbar/a_hi) 1{Xbar in (a_lo, a_hi]}] for sign +1, and
/// mu_j^- = E[(|Xbar|/a_hi) 1{Xbar in [-a_hi, -a_lo)}] for sign -1.
inline double bernoulli_slice(const FiniteRandomVariable& xbar, double a_lo, double a_hi, int sign) {
  require(a_lo >= 0.0 && a_lo < a_hi, "slice bounds must satisfy 0 <= a_lo < a_hi");
  double mu = 0.0;
  for (std::size_t i = 0; i < xbar.size(); ++i) {
    const double v = sign >= 0 ? xbar.outcomes[i] : -xbar.outcomes[i];
    if (v > a_lo && v <= a_hi) mu += xbar.probs[i] * v / a_hi;
  }
  return std::clamp(mu, 0.0, 1.0);
}

struct TruncationLadder {
  int k = 0;
  double sigma_tilde = 0.0;
  std::vector<double> levels;  // a_0 .. a_k; a_{-1} = 0

  static TruncationLadder make(double sigma_tilde, double eps) {
    require(sigma_tilde > 0.0, "sigma estimate must be positive");
    require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    TruncationLadder l;
    l.sigma_tilde = sigma_tilde;
    l.k = static_cast<int>(std::ceil(std::log2(580.0 / eps)));
    for (int j = 0; j <= l.k; ++j) l.levels.push_back(std::ldexp(sigma_tilde, j));
    return l;
  }
  double lower(int j) const { return j == 0 ? 0.0 : levels[static_cast<std::size_t>(j - 1)]; }
};

struct QestimResult {
  double estimate = 0.0;
  bool restored = true;
  double reflections = 0.0;
  std::uint64_t restoration_failures = 0;
};

/// Unbiased mean estimator: med + sum_j a_j (mu_j^+ - mu_j^-) with every
/// slice estimated by nduae(300 t, (eps / (2320 t))^2).
inline QestimResult qestim(const FiniteRandomVariable& x, double t, double med_tilde, double sigma_tilde,
                           double eps, RandomSource& rng, const NduaeOptions& opt = {}) {
  require(t >= 1.0, "t must be at least 1");
  const TruncationLadder ladder = TruncationLadder::make(sigma_tilde, eps);
  const FiniteRandomVariable xbar = x.shifted(med_tilde);
  const double slice_t = 300.0 * t;
  const double slice_eps = std::pow(eps / (2320.0 * t), 2);
  QestimResult out;
  double sum = 0.0;
  for (int j = 0; j <= ladder.k; ++j) {
    const double a = ladder.levels[static_cast<std::size_t>(j)];
    for (int sign : {+1, -1}) {
      AmplitudeInstance inst(bernoulli_slice(xbar, ladder.lower(j), a, sign));
      const NduaeResult r = nduae(inst, slice_t, slice_eps, rng, opt);
      sum += sign * a * r.estimate;
      out.reflections += static_cast<double>(r.reflections);
      if (!r.restored) {
        out.restored = false;
        ++out.restoration_failures;
      }
    }
  }
  out.estimate = med_tilde + sum;
  return out;
}

struct MediResult {
  double median = 0.0;
  int probes = 0;
  bool restored = true;
  std::uint64_t reflections = 0;
};

/// Nondestructive median estimator: binary search on the tail probabilities
/// P[X >= x_k] with ndae(3 sqrt 2) and threshold 1/6.
inline MediResult medi(const FiniteRandomVariable& x, double eta, RandomSource& rng) {
  require(eta > 0.0 && eta < 1.0, "eta must lie in (0, 1)");
  const std::size_t n = x.size();
  // tail[k-1] = P[X >= x_k] for 1-indexed k.
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) tail[i] = tail[i + 1] + x.probs[i];
  const double probes_bound = std::max(1.0, std::ceil(std::log2(static_cast<double>(n) + 1.0)));
  const double eta_probe = std::min(0.49, eta / probes_bound);
  MediResult out;
  std::size_t a = 1, b = n + 1;
  while (a < b) {
    const std::size_t k = (a + b) / 2;
    AmplitudeInstance inst(std::clamp(tail[k - 1], 0.0, 1.0));
    const NdaeResult r = ndae(inst, 3.0 * std::numbers::sqrt2, eta_probe, rng);
    ++out.probes;
    out.reflections += r.reflections;
    if (!r.restored) out.restored = false;
    if (r.estimate <= 1.0 / 6.0) b = k;
    else a = k + 1;
  }
  a = std::max<std::size_t>(a, 2);
  out.median = x.outcomes[a - 2];
  return out;
}

struct AnnealResult {
  std::uint64_t reflections = 0;  // measurement rounds, one reflection each
  bool short_circuit = false;
};

/// Probabilistic annealing from |psi> to |phi> with fidelity f = |<psi|phi>|^2,
/// simulated in the plane of the two states.
inline AnnealResult anneal(double fidelity, RandomSource& rng) {
  if (!(fidelity > 0.0)) throw PreconditionError("annealing needs a nonzero overlap");
  require(fidelity <= 1.0 + 1e-12, "fidelity must be at most 1");
  AnnealResult out;
  if (fidelity >= 1.0 - kDegenerateProbability) {
    out.reflections = 1;
    out.short_circuit = true;
    return out;
  }
  const TwoLevelState psi{Complex(1.0, 0.0), Complex(0.0, 0.0), "psi/psi-perp"};
  const TwoLevelState phi{Complex(std::sqrt(fidelity), 0.0), Complex(std::sqrt(1.0 - fidelity), 0.0),
                          "psi/psi-perp"};
  TwoLevelState state = psi;
  for (;;) {
    measure_along(state, psi, rng);
    ++out.reflections;
    if (measure_along(state, phi, rng)) break;
    if (out.reflections > kCoinIterationCap) throw Error("annealing exceeded the iteration cap");
  }
  return out;
}

inline AnnealResult anneal(Qsample& src, const Qsample& dst, RandomSource& rng) {
  const AnnealResult r = anneal(qsample_fidelity(src.base, dst.base), rng);
  src.base = dst.base;
  src.restored = true;
  src.reflections += r.reflections;
  return r;
}

// ---------------------------------------------------------------------------
// Product estimator

struct ProductStage {
  FiniteRandomVariable variable;   // X_i
  FiniteRandomVariable averaged;   // mean of K independent copies
  std::uint64_t copies = 1;        // K
  double fidelity_next = 1.0;      // |<pi_{X_i}|pi_{X_{i+1}}>|^2, unused for the last stage
};

inline std::uint64_t averaging_count(double b, double scale = 1.0) {
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(scale * 1156.0 * (b - 1.0) - 1e-9)));
}

/// Builds the averaged stages. Without explicit fidelities the overlap of the
/// outcome tables of consecutive variables is used.
inline std::vector<ProductStage> prepare_product_stages(const std::vector<FiniteRandomVariable>& xs, double b,
                                                        double averaging_scale = 1.0,
                                                        const std::vector<double>& fidelities = {}) {
  require(!xs.empty(), "product needs at least one variable");
  require(fidelities.empty() || fidelities.size() + 1 >= xs.size(), "one fidelity per consecutive pair");
  const std::uint64_t k = averaging_count(b, averaging_scale);
  std::vector<ProductStage> stages;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ProductStage s;
    s.variable = xs[i];
    s.copies = k;
    s.averaged = average_variable(xs[i], k);
    if (i + 1 < xs.size())
      s.fidelity_next = fidelities.empty() ? qsample_fidelity(xs[i], xs[i + 1]) : fidelities[i];
    stages.push_back(std::move(s));
  }
  return stages;
}

struct QprodOptions {
  NduaeOptions nduae;
};

struct StageDiagnostics {
  double median = 0.0;
  double estimate = 0.0;
  double truth = 0.0;
  double reflections = 0.0;
  double medi_reflections = 0.0;
  double qestim_reflections = 0.0;
  double anneal_reflections = 0.0;
  bool restored = true;
};

struct QprodResult {
  double estimate = 1.0;
  std::vector<StageDiagnostics> stages;
  ResourceLedger ledger;
};

/// Product estimator over prepared stages. Reflections through an averaged
/// qsample are charged K reflections through the underlying stage state.
inline QprodResult qprod(const std::vector<ProductStage>& stages, double b, double eps, RandomSource& rng,
                         const QprodOptions& opt = {}) {
  require(b > 1.0, "B must exceed 1");
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  require(!stages.empty(), "product needs at least one stage");
  const double ell = static_cast<double>(stages.size());
  QprodResult out;
  out.ledger.qsample_copies = stages.front().copies;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const ProductStage& s = stages[i];
    const int stage = static_cast<int>(i);
    StageDiagnostics d;
    d.truth = s.variable.mean();

    const MediResult med = medi(s.averaged, 1.0 / (11.0 * ell), rng);
    d.median = med.median;
    d.medi_reflections = static_cast<double>(med.reflections) * static_cast<double>(s.copies);
    double estimate;
    double q_refl = 0.0;
    bool restored = med.restored;
    if (med.median > 0.0) {
      const double sigma = med.median * b;
      const QestimResult q = qestim(s.averaged, 96.0 * b * std::sqrt(ell) / eps, med.median, sigma,
                                    eps / (6.0 * ell * b), rng, opt.nduae);
      estimate = q.estimate;
      q_refl = q.reflections * static_cast<double>(s.copies);
      restored = restored && q.restored;
    } else {
      // A zero median leaves no scale for the truncation ladder; the stage
      // estimate is the median itself.
      estimate = med.median;
    }
    d.qestim_reflections = q_refl;

    double anneal_refl = 0.0;
    if (!restored) {
      // Rebuild the lost qsample: anneal one copy in from the previous stage,
      // or prepare a fresh copy at the first stage.
      ++out.ledger.restoration_failures;
      if (i == 0) ++out.ledger.qsample_copies;
      else anneal_refl += static_cast<double>(anneal(stages[i - 1].fidelity_next, rng).reflections);
      d.restored = false;
    }
    if (i + 1 < stages.size())
      for (std::uint64_t c = 0; c < s.copies; ++c)
        anneal_refl += static_cast<double>(anneal(s.fidelity_next, rng).reflections);
    d.anneal_reflections = anneal_refl;

    d.estimate = estimate;
    d.reflections = d.medi_reflections + d.qestim_reflections + d.anneal_reflections;
    out.ledger.charge_reflections(d.reflections, stage);
    out.estimate *= estimate;
    out.stages.push_back(d);
  }
  return out;
}

}  // namespace qsa
