#include "nonclip/config.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nonclip;

TEST(Config, DefaultsRoundTrip) {
  const ExperimentConfig c;
  EXPECT_EQ(parse_config(serialize_config(c)), c);
  EXPECT_EQ(parse_config(""), c);
  EXPECT_EQ(c.seeds, std::vector<std::uint64_t>{0});
  EXPECT_DOUBLE_EQ(c.optimizer.alpha.at(2), 0.1);
}

TEST(Config, CustomRoundTrip) {
  const std::string text = R"(# clipped Scion on the network
problem.name = mlp
problem.dim = 6
problem.hidden = 4

optimizer.algorithm = ClippedScion_v2
optimizer.gamma = 0.05
optimizer.gamma_schedule = warmdown
optimizer.warmdown_fraction = 0.3
optimizer.rho = inf
optimizer.alpha = horizon
optimizer.norm = product(spectral:1, max:0.5)
optimizer.horizon = 400
run.seeds = 0..3
run.paper_literal_momentum = true
sweep.gammas = 0.1, 0.01
sweep.rhos = inf, 2
)";
  const ExperimentConfig c = parse_config(text);
  EXPECT_EQ(c.problem.name, "mlp");
  EXPECT_EQ(c.optimizer.algorithm, Algorithm::clipped_scion_v2);
  EXPECT_EQ(c.optimizer.gamma.kind, StepsizeSchedule::Kind::warmdown);
  EXPECT_TRUE(std::isinf(c.optimizer.rho));
  EXPECT_EQ(c.optimizer.alpha.kind, AlphaSchedule::Kind::horizon);
  EXPECT_EQ(c.optimizer.alpha.horizon, 400);
  EXPECT_FALSE(c.optimizer.alpha.first_step_override);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1, 2, 3}));
  EXPECT_EQ(c.sweep_gammas, (std::vector<double>{0.1, 0.01}));
  EXPECT_EQ(c.optimizer.norm.to_string(), "product(spectral:1, max:0.5)");
  EXPECT_EQ(parse_config(serialize_config(c)), c);
  EXPECT_NO_THROW(validate_experiment(c));
  EXPECT_FALSE(effective_optimizer(c).alpha.first_step_override);
}

TEST(Config, SerializeIsStable) {
  ExperimentConfig c;
  c.optimizer.gamma.gamma = 0.1 + 0.2;
  c.optimizer.beta = 2.0;
  const std::string once = serialize_config(c);
  EXPECT_EQ(serialize_config(parse_config(once)), once);
  EXPECT_NE(once.find("optimizer.gamma = 0.30000000000000004\n"), std::string::npos);
  EXPECT_NE(once.find("optimizer.beta = 2\n"), std::string::npos);
}

TEST(Config, ErrorsNameLineAndField) {
  auto expect_error = [](const std::string& text, int line, const std::string& field) {
    try {
      parse_config(text);
      ADD_FAILURE() << "no error for: " << text;
    } catch (const ConfigParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
      EXPECT_EQ(e.field(), field) << text;
      if (line > 0) EXPECT_NE(std::string(e.what()).find("line " + std::to_string(line)), std::string::npos);
    }
  };
  expect_error("problem.name = exp\nproblem.colour = red\n", 2, "problem.colour");
  expect_error("# comment\n\nproblem.dim = ten\n", 3, "problem.dim");
  expect_error("problem.dim = 3\nproblem.dim = 4\n", 2, "problem.dim");
  expect_error("optimizer.rho =\n", 1, "optimizer.rho");
  expect_error("just words\n", 1, "");
  expect_error("optimizer.algorithm = adam\n", 1, "optimizer.algorithm");
  expect_error("optimizer.norm = taxicab\n", 1, "optimizer.norm");
  expect_error("run.seeds = 5..2\n", 1, "run.seeds");
  expect_error("run.store_trajectory = maybe\n", 1, "run.store_trajectory");
}

TEST(Config, ValidateNamesField) {
  ExperimentConfig c;
  c.problem.name = "nope";
  try {
    validate_experiment(c);
    FAIL();
  } catch (const ConfigParseError& e) {
    EXPECT_EQ(e.field(), "problem");
  }
  c = ExperimentConfig{};
  c.optimizer.algorithm = Algorithm::s3cg_v1;
  try {
    validate_experiment(c);
    FAIL();
  } catch (const ConfigParseError& e) {
    EXPECT_EQ(e.field(), "optimizer");
  }
  c = ExperimentConfig{};
  c.seeds.clear();
  EXPECT_THROW(validate_experiment(c), ConfigParseError);
}

TEST(Config, LoadMissingFile) { EXPECT_THROW(load_config("/nonexistent/dir/x.cfg"), ConfigError); }

TEST(Config, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  EXPECT_EQ(format_double(INFINITY), "inf");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
  EXPECT_EQ(format_double(NAN), "nan");
}
