// Command-line front end for the estimators, the cooling-schedule generator,
// the partition-function pipeline and the acceptance suite.
//
// Exit status: 0 when the command's own check passes, 1 when it does not,
// 2 for configuration, input or output errors.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsa/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  unsigned threads = 0;
  double eps = 0, t = 0, eta = 0, big_b = 0, theta = 0, p = 0, beta = 0, scale = 0;
  int colors = 0, sign = 0;
  std::size_t stages = 0;
  bool adversarial = false;
  std::string model, out, format, arm;
  std::vector<double> values, probs;
  std::vector<std::string> criteria;
};

struct Options {
  CLI::Option *seed, *reps, *threads, *eps, *t, *eta, *big_b, *theta, *p, *beta, *scale, *colors, *sign, *stages,
      *adversarial, *model, *out, *format, *arm, *values, *probs;
};

template <class T>
void override_if(const CLI::Option* o, T& dst, const T& src) {
  if (o->count() > 0) dst = src;
}

void print_summary(const qsa::ExperimentResult& r) {
  const auto& s = r.summary;
  const auto& c = r.config;
  if (c.command == "schedule") {
    const auto& sc = *r.schedule;
    for (std::size_t i = 0; i < sc.length(); ++i)
      std::printf("step %zu  beta %s -> %s  chebyshev %.6f  fidelity %.6f  gap %.6g\n", i, sc.betas[i].str().c_str(),
                  sc.betas[i + 1].str().c_str(), sc.chebyshev_values[i], sc.fidelity_values[i], r.schedule_gaps[i]);
  } else if (c.command != "suite") {
    std::printf("%s: %zu runs  mean %.10g  (se %.3g)  truth %.10g  variance %.4g\n", c.command.c_str(), s.reps, s.mean,
                s.standard_error, s.truth, s.variance);
    std::printf("mean reflections %.6g  mean walk steps %.6g  mean controlled ops %.6g\n", s.mean_reflections,
                s.mean_walk_steps, s.mean_controlled_ops);
  }
  std::printf("%s: %s\n", s.passed ? "PASS" : "FAIL", s.check.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unbiased phase, amplitude and mean estimation simulator"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  Flags f;
  Options o{};
  app.add_option("--config", f.config, "JSON experiment config; flags given here override it");
  o.seed = app.add_option("--seed", f.seed, "base seed; run r uses seed + r");
  o.reps = app.add_option("--reps", f.reps, "independent repetitions");
  o.threads = app.add_option("--threads", f.threads, "worker threads (0: hardware concurrency)");
  o.eps = app.add_option("--eps", f.eps, "accuracy parameter");
  o.t = app.add_option("--t", f.t, "accuracy parameter t (upe: power of two >= 8)");
  o.eta = app.add_option("--eta", f.eta, "failure probability (median)");
  o.big_b = app.add_option("--B", f.big_b, "relative second-moment bound");
  o.theta = app.add_option("--theta", f.theta, "phase for upe, in [0, 1/2]");
  o.p = app.add_option("--p", f.p, "amplitude for ae, in [0, 1]");
  o.beta = app.add_option("--beta", f.beta, "finite target inverse temperature");
  o.scale = app.add_option("--averaging-constant-scale", f.scale, "multiplies the averaging count");
  o.colors = app.add_option("--colors", f.colors, "colors for the potts family");
  o.sign = app.add_option("--adversarial-sign", f.sign, "direction of the adversarial oracle offsets (+1 or -1)");
  o.stages = app.add_option("--stages", f.stages, "product: number of independent copies of the variable");
  o.adversarial = app.add_flag("--adversarial-oracles", f.adversarial, "replace phase oracles by worst-case ones");
  o.model = app.add_option("--model", f.model, "family:graph, graph built in or an edge-list file");
  o.out = app.add_option("--out", f.out, "directory for the report file");
  o.format = app.add_option("--format", f.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  o.arm = app.add_option("--arm", f.arm, "partition arm")->check(CLI::IsMember({"quantum", "classical"}));
  o.values = app.add_option("--values", f.values, "outcomes of the finite random variable")->delimiter(',');
  o.probs = app.add_option("--probs", f.probs, "probabilities of the outcomes")->delimiter(',');

  app.add_subcommand("upe", "unbiased phase estimation");
  app.add_subcommand("ae", "nondestructive unbiased amplitude estimation");
  app.add_subcommand("mean", "unbiased mean estimation");
  app.add_subcommand("median", "nondestructive median estimation");
  app.add_subcommand("product", "unbiased product estimation");
  app.add_subcommand("schedule", "cooling schedule for a model");
  app.add_subcommand("partition", "partition function by simulated annealing");
  auto* suite = app.add_subcommand("suite", "acceptance criteria");
  suite->add_option("criteria", f.criteria, "criterion names or numbers; none runs all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    qsa::ExperimentConfig c;
    if (!f.config.empty()) c = qsa::load_config(f.config);
    const auto subs = app.get_subcommands();
    if (!subs.empty()) c.command = subs.front()->get_name();
    if (c.command.empty()) throw qsa::ConfigError("no command given on the command line or in the config");

    override_if(o.seed, c.seed, f.seed);
    override_if(o.reps, c.reps, f.reps);
    override_if(o.threads, c.threads, f.threads);
    override_if(o.eps, c.eps, f.eps);
    override_if(o.t, c.t, f.t);
    override_if(o.eta, c.eta, f.eta);
    if (o.big_b->count()) c.B = f.big_b;
    override_if(o.theta, c.theta, f.theta);
    override_if(o.p, c.p, f.p);
    if (o.beta->count()) c.beta = f.beta;
    override_if(o.scale, c.averaging_constant_scale, f.scale);
    override_if(o.colors, c.colors, f.colors);
    override_if(o.sign, c.adversarial_sign, f.sign);
    override_if(o.stages, c.stages, f.stages);
    if (o.adversarial->count()) c.adversarial_oracles = true;
    override_if(o.model, c.model, f.model);
    override_if(o.out, c.out_dir, f.out);
    override_if(o.format, c.format, f.format);
    override_if(o.arm, c.arm, f.arm);
    override_if(o.values, c.values, f.values);
    override_if(o.probs, c.probs, f.probs);
    if (!f.criteria.empty()) c.criteria = f.criteria;

    const auto r = qsa::run_experiment(c, [](const qsa::acceptance::CriterionResult& cr) { qsa::acceptance::print(cr); });
    print_summary(r);
    if (!c.out_dir.empty()) std::printf("wrote %s\n", qsa::write_report(r).c_str());
    return r.summary.passed ? 0 : 1;
  } catch (const qsa::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const qsa::InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const qsa::OutputError& e) {
    std::fprintf(stderr, "output error: %s\n", e.what());
    return 2;
  } catch (const qsa::PreconditionError& e) {
    std::fprintf(stderr, "invalid parameter: %s\n", e.what());
    return 2;
  } catch (const qsa::CapExceeded& e) {
    std::fprintf(stderr, "too large: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
