#pragma once

// Experiment configuration, the per-command runners behind the CLI, and the
// JSON / CSV report writers.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsa/acceptance.hpp"
#include "qsa/amplitude.hpp"
#include "qsa/error.hpp"
#include "qsa/gibbs.hpp"
#include "qsa/mean.hpp"
#include "qsa/phase.hpp"
#include "qsa/pipeline.hpp"
#include "qsa/random.hpp"
#include "qsa/stats.hpp"

namespace qsa {

inline constexpr int kSchemaVersion = 1;

/// Raised for anything wrong with the configuration itself; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Report file could not be written.
class OutputError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  std::string command;

  // model
  std::string model = "potts:triangle";
  int colors = 3;
  std::optional<double> beta;  // finite target; required for ising

  // estimator
  double eps = 0.25;
  double t = 8.0;
  double eta = 0.1;
  std::optional<double> B;  // partition: e^2, product: 1.05
  bool adversarial_oracles = false;
  int adversarial_sign = +1;
  double averaging_constant_scale = 1.0;
  double theta = 0.3;  // upe
  double p = 0.3;      // ae
  std::string arm = "quantum";  // partition: quantum | classical

  // run
  std::uint64_t seed = 1;
  std::size_t reps = 100;
  unsigned threads = 1;

  // output
  std::string out_dir;  // empty: no files
  std::string format = "json";

  // variable (mean, median, product)
  std::vector<double> values{0.0, 1.0};
  std::vector<double> probs{0.5, 0.5};
  std::size_t stages = 2;  // product: number of independent copies

  std::vector<std::string> criteria;  // suite: empty runs all
};

inline const std::vector<std::string>& experiment_commands() {
  static const std::vector<std::string> c{"upe", "ae", "mean", "median", "product", "schedule", "partition", "suite"};
  return c;
}

namespace detail {

template <class T>
void read_key(const nlohmann::json& section, const char* key, T& dst, const std::string& where) {
  if (!section.contains(key)) return;
  try {
    dst = section.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("bad type for " + where + "." + key);
  }
}

template <class T>
void read_key(const nlohmann::json& section, const char* key, std::optional<T>& dst, const std::string& where) {
  if (!section.contains(key) || section.at(key).is_null()) return;
  T v{};
  read_key(section, key, v, where);
  dst = v;
}

inline void reject_unknown(const nlohmann::json& section, const std::string& where,
                           std::initializer_list<const char*> known) {
  if (!section.is_object()) throw ConfigError("section " + where + " must be an object");
  for (const auto& [k, v] : section.items())
    if (std::none_of(known.begin(), known.end(), [&](const char* s) { return k == s; }))
      throw ConfigError("unknown key " + where + "." + k);
}

}  // namespace detail

/// Reads the JSON config document; missing keys keep their defaults.
inline ExperimentConfig parse_config(const nlohmann::json& j, ExperimentConfig c = {}) {
  detail::reject_unknown(j, "config", {"command", "model", "estimator", "run", "output", "variable", "suite"});
  detail::read_key(j, "command", c.command, "config");
  if (j.contains("model")) {
    const auto& s = j.at("model");
    detail::reject_unknown(s, "model", {"spec", "colors", "beta"});
    detail::read_key(s, "spec", c.model, "model");
    detail::read_key(s, "colors", c.colors, "model");
    detail::read_key(s, "beta", c.beta, "model");
  }
  if (j.contains("estimator")) {
    const auto& s = j.at("estimator");
    detail::reject_unknown(s, "estimator", {"eps", "t", "eta", "B", "adversarial_oracles", "adversarial_sign",
                                            "averaging_constant_scale", "theta", "p", "arm"});
    detail::read_key(s, "eps", c.eps, "estimator");
    detail::read_key(s, "t", c.t, "estimator");
    detail::read_key(s, "eta", c.eta, "estimator");
    detail::read_key(s, "B", c.B, "estimator");
    detail::read_key(s, "adversarial_oracles", c.adversarial_oracles, "estimator");
    detail::read_key(s, "adversarial_sign", c.adversarial_sign, "estimator");
    detail::read_key(s, "averaging_constant_scale", c.averaging_constant_scale, "estimator");
    detail::read_key(s, "theta", c.theta, "estimator");
    detail::read_key(s, "p", c.p, "estimator");
    detail::read_key(s, "arm", c.arm, "estimator");
  }
  if (j.contains("run")) {
    const auto& s = j.at("run");
    detail::reject_unknown(s, "run", {"seed", "reps", "threads"});
    detail::read_key(s, "seed", c.seed, "run");
    detail::read_key(s, "reps", c.reps, "run");
    detail::read_key(s, "threads", c.threads, "run");
  }
  if (j.contains("output")) {
    const auto& s = j.at("output");
    detail::reject_unknown(s, "output", {"dir", "format"});
    detail::read_key(s, "dir", c.out_dir, "output");
    detail::read_key(s, "format", c.format, "output");
  }
  if (j.contains("variable")) {
    const auto& s = j.at("variable");
    detail::reject_unknown(s, "variable", {"values", "probs", "stages"});
    detail::read_key(s, "values", c.values, "variable");
    detail::read_key(s, "probs", c.probs, "variable");
    detail::read_key(s, "stages", c.stages, "variable");
  }
  if (j.contains("suite")) {
    const auto& s = j.at("suite");
    detail::reject_unknown(s, "suite", {"criteria"});
    detail::read_key(s, "criteria", c.criteria, "suite");
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j, std::move(base));
}

inline void validate(const ExperimentConfig& c) {
  const auto& cmds = experiment_commands();
  if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end())
    throw ConfigError("unknown command: " + c.command);
  if (!(c.eps > 0.0 && c.eps < 1.0)) throw ConfigError("eps must lie in (0, 1)");
  if (!(c.eta > 0.0 && c.eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
  if (c.reps < 1) throw ConfigError("reps must be at least 1");
  if (c.format != "json" && c.format != "csv") throw ConfigError("format must be json or csv");
  if (c.B && !(*c.B > 1.0)) throw ConfigError("B must exceed 1");
  if (!(c.averaging_constant_scale > 0.0)) throw ConfigError("averaging_constant_scale must be positive");
  if (c.adversarial_sign != 1 && c.adversarial_sign != -1) throw ConfigError("adversarial_sign must be +1 or -1");
  if (c.arm != "quantum" && c.arm != "classical") throw ConfigError("arm must be quantum or classical");
  if (c.command == "upe") {
    if (!(c.theta >= 0.0 && c.theta <= 0.5)) throw ConfigError("theta must lie in [0, 1/2]");
    const auto t = static_cast<std::uint64_t>(c.t);
    if (static_cast<double>(t) != c.t || t < 8 || !std::has_single_bit(t))
      throw ConfigError("upe needs t a power of two >= 8");
  }
  if (c.command == "ae" && !(c.p >= 0.0 && c.p <= 1.0)) throw ConfigError("p must lie in [0, 1]");
  if (c.command == "ae" && !(c.t >= 4.0)) throw ConfigError("ae needs t >= 4");
  if (c.command == "mean" && !(c.t >= 1.0)) throw ConfigError("mean needs t >= 1");
  if ((c.command == "mean" || c.command == "median" || c.command == "product") && c.values.size() != c.probs.size())
    throw ConfigError("variable.values and variable.probs differ in length");
  if (c.command == "product" && c.stages < 1) throw ConfigError("product needs at least one stage");
}

/// "family:graph" with graph a built-in name or an edge-list file.
inline GibbsModel model_from_spec(const std::string& spec, int colors) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == spec.size())
    throw ConfigError("model spec must look like family:graph, got '" + spec + "'");
  const std::string family = spec.substr(0, colon), graph = spec.substr(colon + 1);
  Graph g;
  try {
    g = builtin_graph(graph);
  } catch (const InputError&) {
    if (!std::filesystem::exists(graph)) throw ConfigError("graph is neither built in nor a readable file: " + graph);
    g = load_edge_list(graph);
  }
  try {
    return make_model(family, g, colors);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------
// Results

struct RunRow {
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double truth = 0.0;
  double rel_error = 0.0;
  double reflections = 0.0;
  double walk_steps = 0.0;
  std::uint64_t controlled_ops = 0;
  bool restored = true;
  bool success = true;
  std::vector<StageReport> stages;
};

struct ExperimentSummary {
  std::size_t reps = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  double variance = 0.0;
  double truth = 0.0;
  std::size_t successes = 0;
  double mean_reflections = 0.0;
  double mean_walk_steps = 0.0;
  double mean_controlled_ops = 0.0;
  bool passed = true;
  std::string check;  // the pass rule that was applied, with its numbers
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRow> rows;
  ExperimentSummary summary;
  std::optional<CoolingSchedule> schedule;
  std::vector<double> schedule_gaps;
  std::vector<acceptance::CriterionResult> criteria;
};

namespace detail {

inline double relative_error(double estimate, double truth) {
  return truth != 0.0 ? std::abs(estimate - truth) / std::abs(truth) : std::abs(estimate - truth);
}

template <class Body>
std::vector<RunRow> seeded_rows(const ExperimentConfig& c, Body body) {
  return run_repetitions(c.seed, c.reps, [&](RandomSource&, std::size_t rep) {
    const std::uint64_t seed = c.seed + rep;
    RandomSource rng(seed);
    RunRow row = body(rng);
    row.seed = seed;
    row.rel_error = relative_error(row.estimate, row.truth);
    return row;
  }, c.threads);
}

inline void summarize(ExperimentResult& r) {
  auto& s = r.summary;
  MomentAccumulator m;
  s.reps = r.rows.size();
  for (const auto& row : r.rows) {
    m.add(row.estimate);
    s.successes += row.success;
    s.mean_reflections += row.reflections;
    s.mean_walk_steps += row.walk_steps;
    s.mean_controlled_ops += static_cast<double>(row.controlled_ops);
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, s.reps));
  s.mean_reflections /= n;
  s.mean_walk_steps /= n;
  s.mean_controlled_ops /= n;
  s.mean = m.mean();
  s.standard_error = m.standard_error();
  s.variance = m.variance();
  if (!r.rows.empty()) s.truth = r.rows.front().truth;
}

// |mean - truth| <= bound + 3 SE.
inline void bias_check(ExperimentResult& r, double bound) {
  auto& s = r.summary;
  const double dev = std::abs(s.mean - s.truth);
  s.passed = dev <= bound + 3 * s.standard_error;
  s.check = acceptance::fmt("|mean - truth| = %.6g <= %.6g + 3 SE (%.6g)", dev, bound, 3 * s.standard_error);
}

// Success frequency not below 2/3 at significance 0.01.
inline void two_thirds_check(ExperimentResult& r) {
  auto& s = r.summary;
  s.passed = binomial_test_not_below(s.successes, s.reps, 2.0 / 3.0, 0.01);
  s.check = acceptance::fmt("%zu/%zu successes, binomial test against 2/3 at 0.01: %s", s.successes, s.reps,
                            s.passed ? "not rejected" : "rejected");
}

inline NduaeOptions nduae_options(const ExperimentConfig& c) {
  NduaeOptions o;
  o.oracle.adversarial = c.adversarial_oracles;
  o.oracle.sign = c.adversarial_sign;
  return o;
}

inline FiniteRandomVariable config_variable(const ExperimentConfig& c) {
  try {
    return FiniteRandomVariable::from_table(c.values, c.probs);
  } catch (const InputError& e) {
    throw ConfigError(std::string("variable: ") + e.what());
  }
}

// Lower median of a table.
inline double table_median(const FiniteRandomVariable& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x.probs[i];
    if (acc >= 0.5 - 1e-12) return x.outcomes[i];
  }
  return x.outcomes.back();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline ExperimentResult run_upe(const ExperimentConfig& c) {
  ExperimentResult r{c};
  const auto t = static_cast<std::uint64_t>(c.t);
  OracleOptions oracle;
  oracle.adversarial = c.adversarial_oracles;
  oracle.sign = c.adversarial_sign;
  r.rows = detail::seeded_rows(c, [&](RandomSource& rng) {
    PhaseInstance inst(c.theta);
    const UpeResult u = upe(inst, t, c.eps, rng, oracle);
    RunRow row;
    row.estimate = u.estimate;
    row.truth = c.theta;
    row.controlled_ops = u.controlled_ops;
    row.restored = u.restored;
    row.success = u.found;
    return row;
  });
  detail::summarize(r);
  detail::bias_check(r, c.eps);
  return r;
}

inline ExperimentResult run_ae(const ExperimentConfig& c) {
  ExperimentResult r{c};
  const NduaeOptions opt = detail::nduae_options(c);
  r.rows = detail::seeded_rows(c, [&](RandomSource& rng) {
    AmplitudeInstance inst(c.p);
    const NduaeResult n = nduae(inst, c.t, c.eps, rng, opt);
    RunRow row;
    row.estimate = n.estimate;
    row.truth = c.p;
    row.reflections = static_cast<double>(n.reflections);
    row.restored = n.restored;
    return row;
  });
  detail::summarize(r);
  detail::bias_check(r, c.eps);
  return r;
}

/// qestim with the table's own median and standard deviation as the
/// centering and scale inputs.
inline ExperimentResult run_mean(const ExperimentConfig& c) {
  ExperimentResult r{c};
  const auto x = detail::config_variable(c);
  const double med = detail::table_median(x);
  const double sigma = std::max(std::sqrt(x.variance()), 1e-12);
  const NduaeOptions opt = detail::nduae_options(c);
  r.rows = detail::seeded_rows(c, [&](RandomSource& rng) {
    const QestimResult q = qestim(x, c.t, med, sigma, c.eps, rng, opt);
    RunRow row;
    row.estimate = q.estimate;
    row.truth = x.mean();
    row.reflections = q.reflections;
    row.restored = q.restored;
    return row;
  });
  detail::summarize(r);
  detail::bias_check(r, c.eps * sigma);
  return r;
}

inline ExperimentResult run_median(const ExperimentConfig& c) {
  ExperimentResult r{c};
  const auto x = detail::config_variable(c);
  const double sigma = std::sqrt(x.variance());
  r.rows = detail::seeded_rows(c, [&](RandomSource& rng) {
    const MediResult m = medi(x, c.eta, rng);
    RunRow row;
    row.estimate = m.median;
    row.truth = x.mean();
    row.reflections = static_cast<double>(m.reflections);
    row.restored = m.restored;
    row.success = std::abs(x.mean() - m.median) <= 17 * sigma;
    return row;
  });
  detail::summarize(r);
  auto& s = r.summary;
  Proportion f{s.successes, s.reps};
  s.passed = f.value() >= 1 - c.eta - 3 * f.standard_error();
  s.check = acceptance::fmt("|mu - med| <= 17 sigma in %.4f of runs, required >= %.4f", f.value(),
                            1 - c.eta - 3 * f.standard_error());
  return r;
}

inline ExperimentResult run_product(const ExperimentConfig& c) {
  ExperimentResult r{c};
  const auto x = detail::config_variable(c);
  const double b = c.B.value_or(1.05);
  if (x.relative_second_moment() > b * (1 + 1e-12))
    throw ConfigError(acceptance::fmt("variable has relative second moment %.6g > B = %.6g", x.relative_second_moment(), b));
  const std::vector<FiniteRandomVariable> xs(c.stages, x);
  const auto stages = prepare_product_stages(xs, b, c.averaging_constant_scale);
  QprodOptions opt;
  opt.nduae = detail::nduae_options(c);
  const double truth = std::pow(x.mean(), static_cast<double>(c.stages));
  r.rows = detail::seeded_rows(c, [&](RandomSource& rng) {
    const QprodResult q = qprod(stages, b, c.eps, rng, opt);
    RunRow row;
    row.estimate = q.estimate;
    row.truth = truth;
    row.reflections = q.ledger.reflections;
    row.restored = q.ledger.restoration_failures == 0;
    row.success = detail::relative_error(q.estimate, truth) <= c.eps;
    for (std::size_t i = 0; i < q.stages.size(); ++i) {
      StageReport s;
      s.beta = std::to_string(i);
      s.beta_next = std::to_string(i + 1);
      s.median = q.stages[i].median;
      s.estimate = q.stages[i].estimate;
      s.truth = q.stages[i].truth;
      s.reflections = q.stages[i].reflections;
      s.restored = q.stages[i].restored;
      row.stages.push_back(s);
    }
    return row;
  });
  detail::summarize(r);
  detail::two_thirds_check(r);
  return r;
}

inline PartitionConfig partition_config(const ExperimentConfig& c) {
  PartitionConfig p;
  p.B = c.B.value_or(kDefaultB);
  p.eps = c.eps;
  p.averaging_scale = c.averaging_constant_scale;
  p.target_beta = c.beta;
  p.nduae = detail::nduae_options(c);
  return p;
}

inline ExperimentResult run_schedule(const ExperimentConfig& c) {
  ExperimentResult r{c};
  const GibbsModel m = model_from_spec(c.model, c.colors);
  const auto pc = partition_config(c);
  const Beta target = default_target(m, pc.target_beta);
  r.schedule = generate_schedule(m, pc.B, c.eps, target);
  for (std::size_t i = 0; i < r.schedule->length(); ++i) {
    double gap = std::numeric_limits<double>::quiet_NaN();
    if (m.size() <= kChainCap && m.size() > 1) gap = spectral_gap(glauber_chain(m, r.schedule->betas[i])).delta;
    r.schedule_gaps.push_back(gap);
  }
  r.summary.passed = verify_schedule(m, *r.schedule);
  r.summary.check = acceptance::fmt("%zu steps re-verified against B = %.6g: %s", r.schedule->length(), pc.B,
                                    r.summary.passed ? "ok" : "violated");
  return r;
}

inline ExperimentResult run_partition(const ExperimentConfig& c) {
  ExperimentResult r{c};
  const GibbsModel m = model_from_spec(c.model, c.colors);
  const PartitionPlan plan = plan_partition(m, partition_config(c));
  r.schedule = plan.schedule;
  r.schedule_gaps = plan.gaps;
  const bool classical = c.arm == "classical";
  r.rows = detail::seeded_rows(c, [&](RandomSource& rng) {
    const EstimateReport e = classical ? classical_baseline(plan, 0, rng) : estimate_partition(plan, 0, rng);
    RunRow row;
    row.estimate = e.estimate;
    row.truth = e.truth;
    row.reflections = e.ledger.reflections;
    row.walk_steps = e.ledger.walk_steps;
    row.controlled_ops = classical ? e.ledger.classical_samples : e.ledger.controlled_ops;
    row.restored = e.restored;
    row.success = e.success;
    row.stages = e.stages;
    return row;
  });
  detail::summarize(r);
  detail::two_thirds_check(r);
  return r;
}

using CriterionCallback = std::function<void(const acceptance::CriterionResult&)>;

inline ExperimentResult run_suite(const ExperimentConfig& c, const CriterionCallback& on_result = {}) {
  ExperimentResult r{c};
  const auto& list = acceptance::criteria();
  acceptance::SuiteOptions opt;
  opt.threads = c.threads;
  for (const auto& name : c.criteria) {
    const bool known = std::any_of(list.begin(), list.end(), [&](const auto& e) { return e.first == name; }) ||
                       (std::all_of(name.begin(), name.end(), ::isdigit) && !name.empty() &&
                        std::stoul(name) >= 1 && std::stoul(name) <= list.size());
    if (!known) throw ConfigError("unknown acceptance criterion: " + name);
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    bool selected = c.criteria.empty();
    for (const auto& name : c.criteria) selected = selected || name == list[i].first || name == std::to_string(i + 1);
    if (!selected) continue;
    try {
      r.criteria.push_back(list[i].second(opt));
    } catch (const std::exception& e) {
      acceptance::CriterionResult failed;
      failed.id = static_cast<int>(i + 1);
      failed.name = list[i].first;
      failed.check(false, std::string("raised: ") + e.what());
      r.criteria.push_back(failed);
    }
    if (on_result) on_result(r.criteria.back());
    r.summary.passed = r.summary.passed && r.criteria.back().pass;
    ++r.summary.reps;
    r.summary.successes += r.criteria.back().pass;
  }
  r.summary.check = acceptance::fmt("%zu/%zu criteria passed", r.summary.successes, r.summary.reps);
  return r;
}

inline ExperimentResult run_experiment(const ExperimentConfig& c, const CriterionCallback& on_result = {}) {
  validate(c);
  if (c.command == "upe") return run_upe(c);
  if (c.command == "ae") return run_ae(c);
  if (c.command == "mean") return run_mean(c);
  if (c.command == "median") return run_median(c);
  if (c.command == "product") return run_product(c);
  if (c.command == "schedule") return run_schedule(c);
  if (c.command == "partition") return run_partition(c);
  return run_suite(c, on_result);
}

// ---------------------------------------------------------------------------
// Writers

namespace detail {

// Shortest decimal form that reads back to the same double.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline nlohmann::json json_num(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

}  // namespace detail

inline std::vector<std::string> csv_header(const ExperimentResult& r) {
  if (r.config.command == "schedule") return {"step", "beta", "beta_next", "chebyshev", "fidelity", "gap"};
  if (r.config.command == "suite") return {"id", "name", "pass"};
  std::vector<std::string> h{"seed", "estimate", "truth", "rel_error", "reflections", "walk_steps", "controlled_ops", "restored"};
  std::size_t stages = 0;
  for (const auto& row : r.rows) stages = std::max(stages, row.stages.size());
  for (std::size_t i = 0; i < stages; ++i)
    for (const char* f : {"beta", "median", "estimate", "truth", "reflections", "walk_steps", "restored"})
      h.push_back("stage" + std::to_string(i) + "_" + f);
  return h;
}

inline std::string to_csv(const ExperimentResult& r) {
  using detail::num;
  std::ostringstream o;
  const auto header = csv_header(r);
  for (std::size_t i = 0; i < header.size(); ++i) o << (i ? "," : "") << header[i];
  o << "\n";
  if (r.config.command == "schedule") {
    const auto& s = *r.schedule;
    for (std::size_t i = 0; i < s.length(); ++i)
      o << i << "," << s.betas[i].str() << "," << s.betas[i + 1].str() << "," << num(s.chebyshev_values[i]) << ","
        << num(s.fidelity_values[i]) << "," << num(r.schedule_gaps[i]) << "\n";
    return o.str();
  }
  if (r.config.command == "suite") {
    for (const auto& c : r.criteria) o << c.id << "," << c.name << "," << (c.pass ? 1 : 0) << "\n";
    return o.str();
  }
  std::size_t stages = 0;
  for (const auto& row : r.rows) stages = std::max(stages, row.stages.size());
  for (const auto& row : r.rows) {
    o << row.seed << "," << num(row.estimate) << "," << num(row.truth) << "," << num(row.rel_error) << ","
      << num(row.reflections) << "," << num(row.walk_steps) << "," << row.controlled_ops << "," << (row.restored ? 1 : 0);
    for (std::size_t i = 0; i < stages; ++i) {
      if (i < row.stages.size()) {
        const auto& s = row.stages[i];
        o << "," << s.beta << "," << num(s.median) << "," << num(s.estimate) << "," << num(s.truth) << ","
          << num(s.reflections) << "," << num(s.walk_steps) << "," << (s.restored ? 1 : 0);
      } else {
        o << ",,,,,,,";
      }
    }
    o << "\n";
  }
  return o.str();
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["model"] = {{"spec", c.model}, {"colors", c.colors}, {"beta", c.beta ? nlohmann::json(*c.beta) : nlohmann::json()}};
  j["estimator"] = {{"eps", c.eps},
                    {"t", c.t},
                    {"eta", c.eta},
                    {"B", c.B ? nlohmann::json(*c.B) : nlohmann::json()},
                    {"adversarial_oracles", c.adversarial_oracles},
                    {"adversarial_sign", c.adversarial_sign},
                    {"averaging_constant_scale", c.averaging_constant_scale},
                    {"theta", c.theta},
                    {"p", c.p},
                    {"arm", c.arm}};
  j["run"] = {{"seed", c.seed}, {"reps", c.reps}, {"threads", c.threads}};
  j["output"] = {{"dir", c.out_dir}, {"format", c.format}};
  j["variable"] = {{"values", c.values}, {"probs", c.probs}, {"stages", c.stages}};
  j["suite"] = {{"criteria", c.criteria}};
  return j;
}

inline nlohmann::json to_json(const ExperimentResult& r) {
  using detail::json_num;
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = config_json(r.config);
  const auto& s = r.summary;
  j["summary"] = {{"reps", s.reps},
                  {"mean", json_num(s.mean)},
                  {"standard_error", json_num(s.standard_error)},
                  {"variance", json_num(s.variance)},
                  {"truth", json_num(s.truth)},
                  {"successes", s.successes},
                  {"mean_reflections", json_num(s.mean_reflections)},
                  {"mean_walk_steps", json_num(s.mean_walk_steps)},
                  {"mean_controlled_ops", json_num(s.mean_controlled_ops)},
                  {"passed", s.passed},
                  {"check", s.check}};
  if (r.schedule) {
    nlohmann::json steps = nlohmann::json::array();
    const auto& sc = *r.schedule;
    for (std::size_t i = 0; i < sc.length(); ++i)
      steps.push_back({{"beta", sc.betas[i].str()},
                       {"beta_next", sc.betas[i + 1].str()},
                       {"chebyshev", json_num(sc.chebyshev_values[i])},
                       {"fidelity", json_num(sc.fidelity_values[i])},
                       {"gap", i < r.schedule_gaps.size() ? json_num(r.schedule_gaps[i]) : nlohmann::json()}});
    j["schedule"] = {{"B", sc.B}, {"length", sc.length()}, {"steps", steps}};
  }
  if (!r.criteria.empty()) {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : r.criteria) cs.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"details", c.details}});
    j["criteria"] = cs;
  }
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json st = nlohmann::json::array();
    for (const auto& x : row.stages)
      st.push_back({{"beta", x.beta},
                    {"beta_next", x.beta_next},
                    {"median", json_num(x.median)},
                    {"estimate", json_num(x.estimate)},
                    {"truth", json_num(x.truth)},
                    {"reflections", json_num(x.reflections)},
                    {"walk_steps", json_num(x.walk_steps)},
                    {"restored", x.restored}});
    runs.push_back({{"seed", row.seed},
                    {"estimate", json_num(row.estimate)},
                    {"truth", json_num(row.truth)},
                    {"rel_error", json_num(row.rel_error)},
                    {"reflections", json_num(row.reflections)},
                    {"walk_steps", json_num(row.walk_steps)},
                    {"controlled_ops", row.controlled_ops},
                    {"restored", row.restored},
                    {"success", row.success},
                    {"stages", st}});
  }
  j["runs"] = runs;
  return j;
}

/// Writes <dir>/<command>.<format>; returns the path written.
inline std::string write_report(const ExperimentResult& r) {
  namespace fs = std::filesystem;
  const fs::path dir(r.config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create output directory " + dir.string() + ": " + ec.message());
  const fs::path path = dir / (r.config.command + "." + r.config.format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path.string());
  if (r.config.format == "csv") out << to_csv(r);
  else out << to_json(r).dump(2) << "\n";
  if (!out) throw OutputError("write failed: " + path.string());
  return path.string();
}

}  // namespace qsa
