#pragma once

// Enumerable Gibbs models with integer Hamiltonians, exact partition functions,
// schedule ratio variables, Glauber chains and Szegedy walks for small chains.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <bit>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qsa/error.hpp"
#include "qsa/mean.hpp"
#include "qsa/qcore.hpp"
#include "qsa/random.hpp"

namespace qsa {

// ---------------------------------------------------------------------------
// Graphs

struct Graph {
  int vertices = 0;
  std::vector<std::pair<int, int>> edges;

  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(vertices));
    for (auto [u, v] : edges) {
      adj[static_cast<std::size_t>(u)].push_back(v);
      adj[static_cast<std::size_t>(v)].push_back(u);
    }
    return adj;
  }
};

inline Graph make_graph(int vertices, std::vector<std::pair<int, int>> edges) {
  if (vertices < 1) throw InputError("graph needs at least one vertex");
  for (auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= vertices || v >= vertices) throw InputError("edge endpoint out of range");
    if (u == v) throw InputError("self-loops are not allowed");
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) throw InputError("duplicate edge");
  return Graph{vertices, std::move(edges)};
}

inline Graph path_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, std::move(e));
}

inline Graph cycle_graph(int n) {
  require(n >= 3, "cycle needs at least 3 vertices");
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return make_graph(n, std::move(e));
}

inline Graph grid_graph(int rows, int cols) {
  std::vector<std::pair<int, int>> e;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int v = r * cols + c;
      if (c + 1 < cols) e.emplace_back(v, v + 1);
      if (r + 1 < rows) e.emplace_back(v, v + cols);
    }
  return make_graph(rows * cols, std::move(e));
}

/// Edge-list text: one "u v" pair per line, 0-indexed; '#' starts a comment.
inline Graph parse_edge_list(std::istream& in) {
  std::vector<std::pair<int, int>> edges;
  int max_vertex = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long long u, v;
    if (!(ls >> u)) continue;
    std::string rest;
    if (!(ls >> v) || (ls >> rest))
      throw InputError("malformed edge on line " + std::to_string(lineno));
    if (u < 0 || v < 0 || u > 1'000'000 || v > 1'000'000)
      throw InputError("vertex index out of range on line " + std::to_string(lineno));
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    max_vertex = std::max<int>(max_vertex, static_cast<int>(std::max(u, v)));
  }
  if (edges.empty()) throw InputError("edge list is empty");
  return make_graph(max_vertex + 1, std::move(edges));
}

inline Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open graph file: " + path);
  return parse_edge_list(in);
}

/// Built-in graphs: edge, triangle, pathN, cycleN, grid2x2, grid3x3.
inline Graph builtin_graph(const std::string& name) {
  if (name == "edge") return path_graph(2);
  if (name == "triangle") return cycle_graph(3);
  if (name == "grid2x2") return grid_graph(2, 2);
  if (name == "grid3x3") return grid_graph(3, 3);
  auto numbered = [&](const std::string& prefix) -> int {
    if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) return -1;
    const std::string digits = name.substr(prefix.size());
    if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
        digits.size() > 3)
      return -1;
    return std::stoi(digits);
  };
  if (int n = numbered("path"); n >= 1) return path_graph(n);
  if (int n = numbered("cycle"); n >= 3) return cycle_graph(n);
  throw InputError("unknown graph: " + name);
}

// ---------------------------------------------------------------------------
// Inverse temperature with a symbolic infinity

struct Beta {
  double value = 0.0;
  bool infinite = false;

  static Beta finite(double b) {
    require(std::isfinite(b) && b >= 0.0, "beta must be a finite nonnegative number");
    return {b, false};
  }
  static Beta inf() { return {0.0, true}; }

  friend bool operator==(const Beta& a, const Beta& b) {
    return a.infinite == b.infinite && (a.infinite || a.value == b.value);
  }
  friend bool operator<(const Beta& a, const Beta& b) {
    if (a.infinite) return false;
    if (b.infinite) return true;
    return a.value < b.value;
  }
  std::string str() const { return infinite ? "inf" : std::to_string(value); }
};

// ---------------------------------------------------------------------------
// Models

enum class ModelKind { potts, ising, matchings, independent_sets };
enum class Direction { forward, backward, ferromagnetic };

inline constexpr std::size_t kStateCap = std::size_t{1} << 16;

/// Enumerated Gibbs model. Weights are exp(-sign * beta * H) with sign = -1 for
/// the ferromagnetic direction and +1 otherwise.
///
/// The tree-uniqueness regions under which Glauber dynamics is known to mix
/// rapidly are not enforced; ergodicity and gaps are computed directly.
struct GibbsModel {
  std::string name;
  ModelKind kind = ModelKind::potts;
  Direction direction = Direction::forward;
  Graph graph;
  int colors = 0;                          // spin models
  int degree = 0;                          // n: H takes values in 0..n
  std::vector<std::uint32_t> states;       // spin digits packed base `colors`, or vertex/edge masks
  std::vector<int> energy;                 // H per state
  std::vector<std::uint64_t> level_counts;  // |H^{-1}(h)|

  std::size_t size() const noexcept { return states.size(); }
  int sign() const noexcept { return direction == Direction::ferromagnetic ? -1 : +1; }
};

namespace detail {

inline void finish_model(GibbsModel& m) {
  int maxh = 0;
  for (int h : m.energy) maxh = std::max(maxh, h);
  m.level_counts.assign(static_cast<std::size_t>(std::max(maxh, m.degree)) + 1, 0);
  for (int h : m.energy) ++m.level_counts[static_cast<std::size_t>(h)];
}

inline int spin_of(std::uint32_t state, int vertex, int colors) {
  for (int i = 0; i < vertex; ++i) state /= static_cast<std::uint32_t>(colors);
  return static_cast<int>(state % static_cast<std::uint32_t>(colors));
}

inline GibbsModel spin_model(const Graph& g, int k, ModelKind kind, Direction dir, std::string name) {
  double total = std::pow(static_cast<double>(k), g.vertices);
  if (total > static_cast<double>(kStateCap)) throw CapExceeded("state space exceeds 2^16 states");
  GibbsModel m;
  m.name = std::move(name);
  m.kind = kind;
  m.direction = dir;
  m.graph = g;
  m.colors = k;
  m.degree = static_cast<int>(g.edges.size());
  const auto n = static_cast<std::uint32_t>(total);
  for (std::uint32_t s = 0; s < n; ++s) {
    std::vector<int> spins(static_cast<std::size_t>(g.vertices));
    std::uint32_t r = s;
    for (auto& x : spins) {
      x = static_cast<int>(r % static_cast<std::uint32_t>(k));
      r /= static_cast<std::uint32_t>(k);
    }
    int h = 0;
    for (auto [u, v] : g.edges) h += spins[static_cast<std::size_t>(u)] == spins[static_cast<std::size_t>(v)];
    m.states.push_back(s);
    m.energy.push_back(h);
  }
  finish_model(m);
  return m;
}

}  // namespace detail

/// k-state Potts model, H = number of monochromatic edges; Z(inf) counts proper colorings.
inline GibbsModel potts(const Graph& g, int k) {
  require(k >= 2, "Potts model needs at least 2 colors");
  return detail::spin_model(g, k, ModelKind::potts, Direction::forward, "potts");
}

/// Ferromagnetic Ising model, H = number of same-sign edges, weights exp(+beta H).
inline GibbsModel ising(const Graph& g) {
  return detail::spin_model(g, 2, ModelKind::ising, Direction::ferromagnetic, "ising");
}

/// Monomer-dimer model: matchings x with H = |x|; Z(inf) = 1.
inline GibbsModel matchings(const Graph& g) {
  if (g.edges.size() > 24) throw CapExceeded("too many edges to enumerate matchings");
  GibbsModel m;
  m.name = "matchings";
  m.kind = ModelKind::matchings;
  m.direction = Direction::backward;
  m.graph = g;
  m.degree = g.vertices / 2;
  const std::uint32_t total = std::uint32_t{1} << g.edges.size();
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    std::uint64_t used = 0;
    bool ok = true;
    int size = 0;
    for (std::size_t e = 0; e < g.edges.size() && ok; ++e) {
      if (!((mask >> e) & 1)) continue;
      const auto bits = (std::uint64_t{1} << g.edges[e].first) | (std::uint64_t{1} << g.edges[e].second);
      ok = (used & bits) == 0;
      used |= bits;
      ++size;
    }
    if (!ok) continue;
    m.states.push_back(mask);
    m.energy.push_back(size);
    if (m.states.size() > kStateCap) throw CapExceeded("state space exceeds 2^16 states");
  }
  detail::finish_model(m);
  return m;
}

/// Hard-core model: independent sets x with H = |x|; Z(inf) = 1.
inline GibbsModel independent_sets(const Graph& g) {
  if (g.vertices > 24) throw CapExceeded("too many vertices to enumerate independent sets");
  GibbsModel m;
  m.name = "independent_sets";
  m.kind = ModelKind::independent_sets;
  m.direction = Direction::backward;
  m.graph = g;
  m.degree = g.vertices;
  const std::uint32_t total = std::uint32_t{1} << g.vertices;
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    bool ok = true;
    for (auto [u, v] : g.edges)
      if (((mask >> u) & 1) && ((mask >> v) & 1)) {
        ok = false;
        break;
      }
    if (!ok) continue;
    m.states.push_back(mask);
    m.energy.push_back(std::popcount(mask));
    if (m.states.size() > kStateCap) throw CapExceeded("state space exceeds 2^16 states");
  }
  detail::finish_model(m);
  return m;
}

/// "potts" (k = 3 unless `colors` given), "ising", "matchings", "independent_sets".
inline GibbsModel make_model(const std::string& family, const Graph& g, int colors = 3) {
  if (family == "potts") return potts(g, colors);
  if (family == "ising") return ising(g);
  if (family == "matchings") return matchings(g);
  if (family == "independent_sets" || family == "hardcore") return independent_sets(g);
  throw InputError("unknown model family: " + family);
}

// ---------------------------------------------------------------------------
// Partition functions

/// log Z(beta) by log-sum-exp over the energy levels.
inline double log_partition(const GibbsModel& m, Beta beta) {
  if (beta.infinite) {
    if (m.sign() < 0) throw PreconditionError("ferromagnetic partition function diverges at beta = inf");
    if (m.level_counts.empty() || m.level_counts[0] == 0)
      throw PreconditionError("no zero-energy states: Z(inf) = 0");
    return std::log(static_cast<double>(m.level_counts[0]));
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < m.level_counts.size(); ++h)
    if (m.level_counts[h])
      top = std::max(top, std::log(static_cast<double>(m.level_counts[h])) -
                              m.sign() * beta.value * static_cast<double>(h));
  double s = 0.0;
  for (std::size_t h = 0; h < m.level_counts.size(); ++h)
    if (m.level_counts[h])
      s += std::exp(std::log(static_cast<double>(m.level_counts[h])) -
                    m.sign() * beta.value * static_cast<double>(h) - top);
  return top + std::log(s);
}

inline double exact_partition(const GibbsModel& m, Beta beta) { return std::exp(log_partition(m, beta)); }

/// Gibbs probability of each energy level.
inline std::vector<double> level_probabilities(const GibbsModel& m, Beta beta) {
  std::vector<double> p(m.level_counts.size(), 0.0);
  if (beta.infinite) {
    log_partition(m, beta);  // validates
    p[0] = 1.0;
    return p;
  }
  const double lz = log_partition(m, beta);
  for (std::size_t h = 0; h < p.size(); ++h)
    if (m.level_counts[h])
      p[h] = std::exp(std::log(static_cast<double>(m.level_counts[h])) -
                      m.sign() * beta.value * static_cast<double>(h) - lz);
  return p;
}

/// pi_beta over the enumerated states.
inline std::vector<double> gibbs_distribution(const GibbsModel& m, Beta beta) {
  const auto levels = level_probabilities(m, beta);
  std::vector<double> pi(m.size());
  for (std::size_t x = 0; x < m.size(); ++x) {
    const auto h = static_cast<std::size_t>(m.energy[x]);
    pi[x] = levels[h] / static_cast<double>(m.level_counts[h]);
  }
  return pi;
}

/// Gibbs qsample over state indices.
inline Qsample gibbs_qsample(const GibbsModel& m, Beta beta) {
  const auto pi = gibbs_distribution(m, beta);
  std::vector<double> idx(pi.size());
  std::iota(idx.begin(), idx.end(), 0.0);
  return make_qsample(FiniteRandomVariable::from_table(std::move(idx), pi));
}

namespace detail {

inline void require_order(Beta a, Beta b) {
  if (a.infinite) throw PreconditionError("the schedule cannot start a step at beta = inf");
  if (b < a) throw PreconditionError("schedule steps must be nondecreasing in beta");
}

inline Beta midpoint(Beta a, Beta b) { return b.infinite ? Beta::inf() : Beta::finite((a.value + b.value) / 2); }
inline Beta reflect_beyond(Beta a, Beta b) { return b.infinite ? Beta::inf() : Beta::finite(2 * b.value - a.value); }

}  // namespace detail

/// X(x) = exp(-sign (b' - b) H(x)) under pi_b, with E[X] = Z(b') / Z(b).
inline FiniteRandomVariable schedule_ratio_variable(const GibbsModel& m, Beta b, Beta b_next) {
  detail::require_order(b, b_next);
  const auto levels = level_probabilities(m, b);
  std::vector<double> values, probs;
  for (std::size_t h = 0; h < levels.size(); ++h) {
    if (m.level_counts[h] == 0) continue;
    double v;
    if (b_next.infinite) {
      log_partition(m, b_next);  // validates direction
      v = h == 0 ? 1.0 : 0.0;
    } else {
      v = std::exp(-m.sign() * (b_next.value - b.value) * static_cast<double>(h));
    }
    values.push_back(v);
    probs.push_back(levels[h]);
  }
  return FiniteRandomVariable::from_table(std::move(values), std::move(probs));
}

/// Z(2b' - b) Z(b) / Z(b')^2.
inline double chebyshev_constant(const GibbsModel& m, Beta b, Beta b_next) {
  detail::require_order(b, b_next);
  return std::exp(log_partition(m, detail::reflect_beyond(b, b_next)) + log_partition(m, b) -
                  2.0 * log_partition(m, b_next));
}

/// |<pi_b|pi_b'>|^2 = Z((b + b')/2)^2 / (Z(b) Z(b')).
inline double gibbs_fidelity(const GibbsModel& m, Beta b, Beta b_next) {
  detail::require_order(b, b_next);
  return std::exp(2.0 * log_partition(m, detail::midpoint(b, b_next)) - log_partition(m, b) -
                  log_partition(m, b_next));
}

/// The same fidelity summed from the two amplitude tables.
inline double gibbs_fidelity_from_amplitudes(const GibbsModel& m, Beta b, Beta b_next) {
  const auto p = gibbs_distribution(m, b);
  const auto q = gibbs_distribution(m, b_next);
  double s = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) s += std::sqrt(p[x] * q[x]);
  return s * s;
}

// ---------------------------------------------------------------------------
// Markov chains

struct MarkovChain {
  Eigen::MatrixXd transition;
  std::vector<double> stationary;
  bool reversible = false;

  Eigen::Index size() const noexcept { return transition.rows(); }
};

inline double row_sum_defect(const Eigen::MatrixXd& p) {
  return (p.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

inline double detailed_balance_defect(const MarkovChain& c) {
  double worst = 0.0;
  for (Eigen::Index x = 0; x < c.size(); ++x)
    for (Eigen::Index y = 0; y < c.size(); ++y)
      worst = std::max(worst, std::abs(c.stationary[static_cast<std::size_t>(x)] * c.transition(x, y) -
                                       c.stationary[static_cast<std::size_t>(y)] * c.transition(y, x)));
  return worst;
}

inline MarkovChain make_chain(Eigen::MatrixXd p, std::vector<double> pi) {
  if (p.rows() != p.cols() || static_cast<std::size_t>(p.rows()) != pi.size())
    throw DimensionError("transition matrix and stationary distribution sizes differ");
  if ((p.array() < -1e-15).any()) throw PreconditionError("negative transition probability");
  if (row_sum_defect(p) > 1e-12) throw PreconditionError("transition rows must sum to 1");
  MarkovChain c{std::move(p), std::move(pi), false};
  c.reversible = detailed_balance_defect(c) <= 1e-10;
  return c;
}

inline constexpr std::size_t kChainCap = 4096;

/// Lazy heat-bath Glauber dynamics with holding probability 1/2: single-site
/// updates for spin and hard-core models, single-edge updates for matchings.
inline MarkovChain glauber_chain(const GibbsModel& m, Beta beta) {
  if (m.size() > kChainCap) throw CapExceeded("chain exceeds the dense cap of 4096 states");
  if (beta.infinite) throw PreconditionError("Glauber chains are built at finite beta");
  const auto n = static_cast<Eigen::Index>(m.size());
  const auto pi = gibbs_distribution(m, beta);
  std::unordered_map<std::uint32_t, Eigen::Index> index;
  for (Eigen::Index i = 0; i < n; ++i) index[m.states[static_cast<std::size_t>(i)]] = i;
  auto weight = [&](Eigen::Index i) {
    return std::exp(-m.sign() * beta.value * m.energy[static_cast<std::size_t>(i)]);
  };
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);

  // Heat-bath update over a block of candidate states (each including the current one).
  auto heat_bath = [&](Eigen::Index from, const std::vector<Eigen::Index>& block, double site_prob) {
    double z = 0.0;
    for (auto j : block) z += weight(j);
    for (auto j : block) p(from, j) += 0.5 * site_prob * weight(j) / z;
  };

  if (m.kind == ModelKind::potts || m.kind == ModelKind::ising) {
    const int k = m.colors;
    const double site = 1.0 / m.graph.vertices;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::uint32_t s = m.states[static_cast<std::size_t>(i)];
      std::uint32_t place = 1;
      for (int v = 0; v < m.graph.vertices; ++v, place *= static_cast<std::uint32_t>(k)) {
        const int cur = detail::spin_of(s, v, k);
        std::vector<Eigen::Index> block;
        for (int c = 0; c < k; ++c)
          block.push_back(index.at(s + static_cast<std::uint32_t>(c - cur) * place));
        heat_bath(i, block, site);
      }
    }
  } else if (m.kind == ModelKind::independent_sets) {
    const double site = 1.0 / m.graph.vertices;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::uint32_t s = m.states[static_cast<std::size_t>(i)];
      for (int v = 0; v < m.graph.vertices; ++v) {
        const std::uint32_t with = s | (std::uint32_t{1} << v), without = s & ~(std::uint32_t{1} << v);
        std::vector<Eigen::Index> block{index.at(without)};
        if (auto it = index.find(with); it != index.end()) block.push_back(it->second);
        heat_bath(i, block, site);
      }
    }
  } else {
    if (m.graph.edges.empty()) throw PreconditionError("matching chain needs at least one edge");
    const double site = 1.0 / static_cast<double>(m.graph.edges.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::uint32_t s = m.states[static_cast<std::size_t>(i)];
      for (std::size_t e = 0; e < m.graph.edges.size(); ++e) {
        const std::uint32_t with = s | (std::uint32_t{1} << e), without = s & ~(std::uint32_t{1} << e);
        std::vector<Eigen::Index> block{index.at(without)};
        if (auto it = index.find(with); it != index.end()) block.push_back(it->second);
        heat_bath(i, block, site);
      }
    }
  }
  p.diagonal().array() += 0.5;
  return make_chain(std::move(p), pi);
}

struct SpectralGap {
  double delta = 0.0;            // from the symmetrized self-adjoint solve
  double delta_general = 0.0;    // from the general eigensolver on P
  std::vector<double> eigenvalues;  // of P, descending
};

/// 1 - (second-largest eigenvalue modulus), computed on D^{1/2} P D^{-1/2} and
/// cross-checked with a general eigensolver on P itself.
inline SpectralGap spectral_gap(const MarkovChain& c) {
  if (!c.reversible) throw PreconditionError("spectral gap requires a reversible chain");
  if (static_cast<std::size_t>(c.size()) > kChainCap) throw CapExceeded("chain exceeds the dense cap");
  const Eigen::Index n = c.size();
  SpectralGap out;
  if (n == 1) {
    out.delta = out.delta_general = 1.0;
    out.eigenvalues = {1.0};
    return out;
  }
  Eigen::VectorXd sq(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = c.stationary[static_cast<std::size_t>(i)];
    if (!(s > 0.0)) throw PreconditionError("stationary distribution must be positive");
    sq(i) = std::sqrt(s);
  }
  Eigen::MatrixXd a = sq.asDiagonal() * c.transition * sq.cwiseInverse().asDiagonal();
  a = (0.5 * (a + a.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym(a, Eigen::EigenvaluesOnly);
  std::vector<double> ev(sym.eigenvalues().data(), sym.eigenvalues().data() + n);
  std::sort(ev.rbegin(), ev.rend());
  out.eigenvalues = ev;
  out.delta = 1.0 - std::max(std::abs(ev[1]), std::abs(ev.back()));

  Eigen::EigenSolver<Eigen::MatrixXd> gen(c.transition, false);
  std::vector<double> mods;
  for (Eigen::Index i = 0; i < n; ++i) mods.push_back(std::abs(gen.eigenvalues()(i)));
  std::sort(mods.rbegin(), mods.rend());
  out.delta_general = 1.0 - mods[1];
  if (out.delta <= 1e-12) throw PreconditionError("chain is not ergodic: zero spectral gap");
  return out;
}

/// Random reversible chain: symmetric positive edge weights, P(x, y) = w(x, y) / w(x).
inline MarkovChain random_reversible_chain(Eigen::Index n, RandomSource& rng, bool lazy = true) {
  Eigen::MatrixXd w(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) w(i, j) = w(j, i) = 0.05 + rng.uniform();
  Eigen::VectorXd rows = w.rowwise().sum();
  Eigen::MatrixXd p = rows.cwiseInverse().asDiagonal() * w;
  if (lazy) p = 0.5 * (p + Eigen::MatrixXd::Identity(n, n));
  std::vector<double> pi(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) pi[static_cast<std::size_t>(i)] = rows(i) / rows.sum();
  return make_chain(std::move(p), std::move(pi));
}

/// Discriminant D(x, y) = sqrt(P(x, y) P(y, x)).
inline Eigen::MatrixXd discriminant(const MarkovChain& c) {
  return (c.transition.array() * c.transition.transpose().array()).sqrt().matrix();
}

/// W = S (2 Pi_A - id) on C^{Omega x Omega}, Pi_A projecting onto span{|x> (x) sum_y sqrt(P(x, y)) |y>}.
inline Unitary szegedy_walk(const MarkovChain& c) {
  const Eigen::Index n = c.size();
  if (n * n > kDenseCap) throw CapExceeded("walk dimension exceeds the dense cap");
  ComplexMatrix a = ComplexMatrix::Zero(n * n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) a(x * n + y, x) = std::sqrt(c.transition(x, y));
  ComplexMatrix swap = ComplexMatrix::Zero(n * n, n * n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) swap(y * n + x, x * n + y) = 1.0;
  const ComplexMatrix refl = 2.0 * a * a.adjoint() - ComplexMatrix::Identity(n * n, n * n);
  return Unitary(swap * refl);
}

struct WalkCheck {
  std::vector<double> discriminant_eigenvalues;
  std::vector<double> plane_cosines;     // cos(2 pi theta) from each 2D invariant block
  double plane_error = 0.0;              // max |cos(2 pi theta) - lambda| over blocks
  double invariance_residual = 0.0;      // max ||W Q - Q M|| over blocks
  double spectrum_error = 0.0;           // max cosine mismatch of exp(+-i arccos lambda) against the full spectrum
  double smallest_nonzero_phase = 0.0;   // smallest walk phase in (0, 1/2] over the blocks
};

/// Checks cos(2 pi theta) = lambda for every discriminant eigenvalue, both on the
/// invariant plane span{A v, S A v} and against the full eigendecomposition of W.
inline WalkCheck verify_szegedy(const MarkovChain& c) {
  const Eigen::Index n = c.size();
  const Unitary w = szegedy_walk(c);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dsolve(discriminant(c));
  ComplexMatrix a = ComplexMatrix::Zero(n * n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) a(x * n + y, x) = std::sqrt(c.transition(x, y));
  ComplexMatrix swap = ComplexMatrix::Zero(n * n, n * n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) swap(y * n + x, x * n + y) = 1.0;

  std::vector<Complex> spectrum;
  for (const auto& e : eigendecompose_unitary(w)) spectrum.push_back(std::polar(1.0, 2 * std::numbers::pi * e.phase));

  WalkCheck out;
  out.smallest_nonzero_phase = 0.5;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lambda = std::clamp(dsolve.eigenvalues()(j), -1.0, 1.0);
    out.discriminant_eigenvalues.push_back(lambda);
    const ComplexVector u = a * dsolve.eigenvectors().col(j).cast<Complex>();
    const ComplexVector v = swap * u;
    // Orthonormal basis of span{u, v}.
    ComplexVector e1 = u.normalized();
    ComplexVector r = v - e1 * e1.dot(v);
    ComplexMatrix q;
    if (r.norm() > 1e-9) {
      q.resize(n * n, 2);
      q.col(0) = e1;
      q.col(1) = r.normalized();
    } else {
      q = e1;
    }
    const ComplexMatrix mblock = q.adjoint() * w.matrix() * q;
    out.invariance_residual = std::max(out.invariance_residual, (w.matrix() * q - q * mblock).norm());
    Eigen::ComplexEigenSolver<ComplexMatrix> es(mblock);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const Complex z = es.eigenvalues()(k);
      const double cosine = z.real() / std::abs(z);
      out.plane_cosines.push_back(cosine);
      // A one-dimensional block at lambda = +-1 has eigenvalue +-1 directly.
      out.plane_error = std::max(out.plane_error, std::abs(cosine - lambda));
      const double phase = std::abs(std::arg(z)) / (2 * std::numbers::pi);
      if (phase > 1e-9) out.smallest_nonzero_phase = std::min(out.smallest_nonzero_phase, phase);
    }
    // Both walk eigenvalues exp(+-i arccos lambda) must appear in the full spectrum.
    std::vector<double> gaps;
    for (const auto& z : spectrum) gaps.push_back(std::abs(z.real() - lambda));
    std::sort(gaps.begin(), gaps.end());
    const bool pair = std::abs(lambda) < 1.0 - 1e-12;
    out.spectrum_error = std::max(out.spectrum_error, pair ? std::max(gaps[0], gaps[1]) : gaps[0]);
  }
  return out;
}

}  // namespace qsa
