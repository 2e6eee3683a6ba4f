#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qsa/experiment.hpp"

using namespace qsa;
using nlohmann::json;

#ifndef QSA_SOURCE_DIR
#define QSA_SOURCE_DIR "."
#endif

TEST(Config, DefaultsAndOverrides) {
  const auto c = parse_config(json::parse(R"({"command":"ae","estimator":{"p":0.2,"t":8},"run":{"reps":5,"seed":9}})"));
  EXPECT_EQ(c.command, "ae");
  EXPECT_EQ(c.p, 0.2);
  EXPECT_EQ(c.reps, 5u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.eps, ExperimentConfig{}.eps);
  EXPECT_FALSE(c.B.has_value());
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, StrictOnUnknownKeysAndTypes) {
  EXPECT_THROW(parse_config(json::parse(R"({"comand":"ae"})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"estimator":{"epz":0.1}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"run":{"reps":"many"}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"model":[1,2]})")), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, Validation) {
  ExperimentConfig c;
  c.command = "upe";
  c.t = 12;
  EXPECT_THROW(validate(c), ConfigError);
  c.t = 16;
  EXPECT_NO_THROW(validate(c));
  c.command = "frobnicate";
  EXPECT_THROW(validate(c), ConfigError);
  c.command = "mean";
  c.values = {0, 1, 2};
  EXPECT_THROW(validate(c), ConfigError);
  c.probs = {0.2, 0.3, 0.5};
  c.format = "xml";
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(ModelSpec, BuiltinFileAndErrors) {
  EXPECT_EQ(model_from_spec("potts:triangle", 3).size(), 27u);
  const auto m = model_from_spec(std::string("potts:") + QSA_SOURCE_DIR + "/data/square.edges", 3);
  EXPECT_NEAR(exact_partition(m, Beta::inf()), 18.0, 1e-12);
  try {
    model_from_spec("potts:/nonexistent/g.txt", 3);
    FAIL() << "no throw";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/g.txt"), std::string::npos);
  }
  EXPECT_THROW(model_from_spec("triangle", 3), ConfigError);
  EXPECT_THROW(model_from_spec("spinglass:triangle", 3), ConfigError);
}

TEST(Runner, SeedColumnReproducesRun) {
  ExperimentConfig c;
  c.command = "ae";
  c.p = 0.3;
  c.reps = 4;
  c.seed = 100;
  const auto all = run_experiment(c);
  ASSERT_EQ(all.rows.size(), 4u);
  c.seed = all.rows[2].seed;
  c.reps = 1;
  const auto one = run_experiment(c);
  EXPECT_EQ(one.rows[0].estimate, all.rows[2].estimate);
  EXPECT_EQ(one.rows[0].reflections, all.rows[2].reflections);
}

TEST(Runner, ThreadCountDoesNotChangeResults) {
  ExperimentConfig c;
  c.command = "upe";
  c.t = 8;
  c.reps = 6;
  c.threads = 1;
  const auto a = run_experiment(c);
  c.threads = 3;
  const auto b = run_experiment(c);
  EXPECT_EQ(to_csv(a), to_csv(b));
}

TEST(Writers, CsvAndJsonShapes) {
  ExperimentConfig c;
  c.command = "partition";
  c.model = "matchings:triangle";
  c.reps = 3;
  const auto r = run_experiment(c);
  EXPECT_TRUE(r.summary.passed);
  std::istringstream csv(to_csv(r));
  std::string header, line;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("seed,estimate,truth,rel_error,reflections,walk_steps,controlled_ops,restored,stage0_beta", 0), 0u);
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 3);

  const json j = to_json(r);
  EXPECT_EQ(j.at("schema_version"), kSchemaVersion);
  EXPECT_EQ(j.at("runs").size(), 3u);
  EXPECT_EQ(j.at("schedule").at("length"), r.schedule->length());
  EXPECT_EQ(parse_config(j.at("config")).model, c.model);

  c.command = "schedule";
  const auto s = run_experiment(c);
  std::istringstream sc(to_csv(s));
  std::getline(sc, header);
  EXPECT_EQ(header, "step,beta,beta_next,chebyshev,fidelity,gap");
}

TEST(Writers, ReportFileAndIoError) {
  ExperimentConfig c;
  c.command = "median";
  c.reps = 5;
  c.format = "csv";
  c.out_dir = (std::filesystem::temp_directory_path() / "qsa_experiment_test").string();
  const auto r = run_experiment(c);
  const std::string path = write_report(r);
  EXPECT_TRUE(std::filesystem::exists(path));
  std::filesystem::remove_all(c.out_dir);

  auto bad = r;
  bad.config.out_dir = "/proc/qsa_no_such_dir";
  EXPECT_THROW(write_report(bad), OutputError);
}

TEST(Writers, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 6.0221e23, 5e-324, -2.5})
    EXPECT_EQ(std::strtod(detail::num(v).c_str(), nullptr), v);
  EXPECT_EQ(detail::num(0.1), "0.1");
}

TEST(Suite, UnknownCriterionIsConfigError) {
  ExperimentConfig c;
  c.command = "suite";
  c.criteria = {"no_such_criterion"};
  EXPECT_THROW(run_experiment(c), ConfigError);
  c.criteria = {"pe_oracle"};
  const auto r = run_experiment(c);
  ASSERT_EQ(r.criteria.size(), 1u);
  EXPECT_TRUE(r.summary.passed);
}
