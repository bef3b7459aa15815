#include <cmath>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "drro/config.h"
#include "drro/experiments.h"
#include "drro/report.h"

namespace drro {
namespace {

using nlohmann::json;

std::string ConfigPath(const std::string& name) {
  return std::string(DRRO_SOURCE_DIR) + "/configs/" + name;
}

json SmallDoc() { return ReadJson(ConfigPath("small.json")); }

bool HasViolation(const ConfigError& e, const std::string& prefix) {
  for (const auto& v : e.violations()) {
    if (v.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

TEST(Config, MassSpringLoads) {
  const ExperimentConfig cfg = LoadConfig(ConfigPath("mass_spring.json"));
  ASSERT_TRUE(cfg.system.has_value());
  EXPECT_EQ(cfg.system->T, 5);
  EXPECT_TRUE(cfg.is_moment());
  const SynthesisProblem prob = ProblemFromConfig(cfg);
  EXPECT_EQ(prob.dim(), 22);
  EXPECT_NEAR(prob.radius * prob.radius, 10.0, 1e-12);
  // Moments come from 50 draws of N(1, I).
  EXPECT_NEAR(prob.nominal.mu.mean(), 1.0, 0.1);
}

TEST(Config, NegativeRadiusIsReportedWithPath) {
  json doc = SmallDoc();
  doc["ambiguity"]["radius"] = -1.0;
  try {
    ParseConfig(doc);
    FAIL() << "expected a violation";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(HasViolation(e, "$.ambiguity.radius"));
  }
}

TEST(Config, ReportsEveryViolation) {
  json doc = SmallDoc();
  doc["ambiguity"]["radius"] = 0.0;
  doc["system"]["B"] = {{0.0}, {1.0, 2.0}};
  doc["method"] = "bogus";
  try {
    ParseConfig(doc);
    FAIL() << "expected violations";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(HasViolation(e, "$.system.B[1]"));
    EXPECT_TRUE(HasViolation(e, "$.ambiguity.radius"));
    EXPECT_TRUE(HasViolation(e, "$.method"));
  }
}

TEST(Config, MissingFieldNamesPath) {
  json doc = SmallDoc();
  doc["system"].erase("H");
  try {
    ParseConfig(doc);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_TRUE(HasViolation(e, "$.system.H"));
  }
}

TEST(Config, IdentityTokenExpandsToLiftedSize) {
  json doc = SmallDoc();
  doc["cost"] = {{"Jx", "identity"}, {"Ju", "identity"}};
  const ExperimentConfig cfg = ParseConfig(doc);
  // T = 2, nx = 2, nu = 1: Jx covers x_0..x_2, Ju covers u_0..u_1.
  EXPECT_TRUE(cfg.weights.Jx.isApprox(MatrixXd::Identity(6, 6)));
  EXPECT_TRUE(cfg.weights.Ju.isApprox(MatrixXd::Identity(2, 2)));
}

TEST(Config, StagewiseAndLiftedWeights) {
  json doc = SmallDoc();
  const ExperimentConfig stagewise = ParseConfig(doc);
  MatrixXd expect = MatrixXd::Zero(6, 6);
  for (int b = 0; b < 3; ++b) expect.block(2 * b, 2 * b, 2, 2) << 1.0, 0.0, 0.0, 0.5;
  EXPECT_EQ(stagewise.weights.Jx, expect);

  doc["cost"]["Jx"] = ToJson(expect);
  EXPECT_EQ(ParseConfig(doc).weights.Jx, expect);

  doc["cost"]["Jx"] = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  EXPECT_THROW(ParseConfig(doc), ConfigError);
  doc["cost"]["Jx"] = "eye";
  EXPECT_THROW(ParseConfig(doc), ConfigError);
}

TEST(Config, MeanDimensionMustMatchSystem) {
  json doc = SmallDoc();
  doc["ambiguity"]["mean"] = {0.0, 0.0};
  try {
    ParseConfig(doc);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_TRUE(HasViolation(e, "$.ambiguity.mean"));
  }
}

TEST(Config, RawSamplesEstimateMoments) {
  json doc = SmallDoc();
  doc["ambiguity"].erase("mean");
  doc["ambiguity"].erase("covariance");
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  json samples = json::array();
  MatrixXd S(8, 30);
  for (int k = 0; k < 30; ++k) {
    json row = json::array();
    for (int i = 0; i < 8; ++i) {
      S(i, k) = nd(rng);
      row.push_back(S(i, k));
    }
    samples.push_back(row);
  }
  doc["ambiguity"]["data"] = {{"samples", samples}, {"estimate_moments", true}};
  const ExperimentConfig cfg = ParseConfig(doc);
  const MomentNominal& nom = std::get<MomentNominal>(cfg.ball.nominal);
  const VectorXd mean = S.rowwise().mean();
  const MatrixXd centred = S.colwise() - mean;
  EXPECT_LT((nom.mu - mean).norm(), 1e-12);
  EXPECT_LT((nom.Sigma - centred * centred.transpose() / 29.0).norm(), 1e-12);
}

TEST(Config, DiscreteNominalParses) {
  const ExperimentConfig cfg = LoadConfig(ConfigPath("wce_discrete.json"));
  EXPECT_FALSE(cfg.is_moment());
  EXPECT_FALSE(cfg.system.has_value());
  EXPECT_THROW(ProblemFromConfig(cfg), ConfigError);
}

TEST(Report, MatrixRoundTripIsExact) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  MatrixXd M(3, 4);
  for (int i = 0; i < M.size(); ++i) M.data()[i] = nd(rng) * 1e3;
  const json j = json::parse(ToJson(M).dump());
  EXPECT_EQ(MatrixFromJson(j), M);
  EXPECT_THROW(MatrixFromJson(json::parse("[[1, 2], [3]]")), std::invalid_argument);
}

TEST(Wce, MomentAnchor) {
  const json r = RunWce(LoadConfig(ConfigPath("wce_moment.json")));
  EXPECT_NEAR(r["value"].get<double>(), 4.0, 1e-6);
}

TEST(Wce, DiscreteRadialAnchor) {
  const json r = RunWce(LoadConfig(ConfigPath("wce_discrete.json")));
  EXPECT_NEAR(r["value"].get<double>(), 0.25, 1e-5);
}

TEST(Synth, ReportRoundTripAndDeterminism) {
  const ExperimentConfig cfg = LoadConfig(ConfigPath("small.json"));
  json a = RunSynth(cfg);
  json b = RunSynth(cfg);
  EXPECT_GE(a["timings"]["build"].get<double>(), 0.0);
  a.erase("timings");
  b.erase("timings");
  EXPECT_EQ(a.dump(), b.dump());

  const SynthesisProblem prob = ProblemFromConfig(cfg);
  const AffineController ctrl = ControllerFromJson(json::parse(a.dump()), prob.lift);
  const double recorded = a["evaluation"]["nominal_expected_regret"].get<double>();
  const EvalSummary s = EvaluateController(prob, ctrl, 100, 1);
  EXPECT_NEAR(s.closed_form, recorded, 1e-10 * (1.0 + std::abs(recorded)));
  // The nominal lies in the ball.
  EXPECT_LE(recorded, a["value"].get<double>() * (1.0 + 1e-6));
}

TEST(Eval, ZeroControllerClosedForm) {
  const ExperimentConfig cfg = LoadConfig(ConfigPath("small.json"));
  const SynthesisProblem prob = ProblemFromConfig(cfg);
  const AffineController zero = AffineController::Zero(prob.lift);
  // Regret of u = 0 is |K* w|_D^2 with w the first Nx coordinates.
  const MatrixXd P = prob.bench.K_star.transpose() * prob.bench.D * prob.bench.K_star;
  const int nx = prob.lift.Nx;
  const VectorXd mw = prob.nominal.mu.head(nx);
  const double expect = (P * prob.nominal.Sigma.topLeftCorner(nx, nx)).trace() + mw.dot(P * mw);
  const EvalSummary s = EvaluateController(prob, zero, 20000, 9);
  EXPECT_NEAR(s.closed_form, expect, 1e-10 * (1.0 + expect));
  EXPECT_TRUE(s.within_3se);
  const EvalSummary again = EvaluateController(prob, zero, 20000, 9);
  EXPECT_EQ(s.mc_mean, again.mc_mean);
}

TEST(Eval, DimensionMismatchIsRejected) {
  const ExperimentConfig cfg = LoadConfig(ConfigPath("small.json"));
  const SynthesisProblem prob = ProblemFromConfig(cfg);
  const json bad = {{"K", {{1.0}}}, {"g", {0.0}}};
  EXPECT_THROW(ControllerFromJson(bad, prob.lift), std::invalid_argument);
}

TEST(Compare, SmallSystemAgrees) {
  const json r = RunCompare(LoadConfig(ConfigPath("small.json")), 2);
  ASSERT_EQ(r["rows"].size(), 4u);
  for (const auto& row : r["rows"]) EXPECT_EQ(row["status"], "ok") << row.dump();
  EXPECT_TRUE(r["agree"].get<bool>());
  EXPECT_TRUE(r["deterministic"].get<bool>());
}

}  // namespace
}  // namespace drro
