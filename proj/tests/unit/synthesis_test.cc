#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "drro/synthesis.h"
#include "problem_util.h"

namespace drro {
namespace {

using testing::MassSpringProblem;
using testing::RandomProblem;
using testing::RelDiff;

TEST(AssembleQ, ZeroArgumentsLeaveOnlyBenchmarkAndWeight) {
  std::mt19937_64 rng(1);
  const SynthesisProblem prob = RandomProblem(2, 1, 1, 2, 0.5, rng);
  const int n = prob.dim(), nu = prob.lift.Nu, nx = prob.lift.Nx;
  const MatrixXd Q = AssembleQ(0.0, MatrixXd::Zero(n, n), MatrixXd::Zero(nu, prob.lift.Ny), prob);
  ASSERT_EQ(Q.rows(), 2 * n + nu);
  MatrixXd expect = MatrixXd::Zero(2 * n + nu, 2 * n + nu);
  expect.block(2 * n, n, nu, nx) = -prob.bench.K_star;
  expect.block(n, 2 * n, nx, nu) = -prob.bench.K_star.transpose();
  expect.block(2 * n, 2 * n, nu, nu) = prob.bench.D_inv;
  EXPECT_LT((Q - expect).norm(), 1e-12 * (1.0 + expect.norm()));
}

// Independent transcription of the block layout from the lifted operators.
TEST(AssembleQ, MatchesDirectTranscription) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const SynthesisProblem prob = RandomProblem(2, 1, 2, 3, 0.7, rng);
    const int n = prob.dim(), nu = prob.lift.Nu;
    const SystemDef sys = testing::RandomSystem(2, 1, 2, 3, rng);
    const MatrixXd K = testing::RandomCausalGain(sys, rng);
    const MatrixXd Xh = testing::RandomSpd(n, rng);
    const double gamma = 1.7;
    const MatrixXd Kstar = -prob.bench.D_inv * prob.lift.F.transpose() * prob.weights.Jx * prob.lift.G;
    MatrixXd Mk(nu, n);
    Mk << K * prob.lift.C * prob.lift.G - Kstar, K;
    MatrixXd expect = MatrixXd::Zero(2 * n + nu, 2 * n + nu);
    expect.topLeftCorner(n, n) = Xh;
    expect.block(n, 0, n, n) = gamma * prob.nominal.Lambda;
    expect.block(0, n, n, n) = gamma * prob.nominal.Lambda.transpose();
    expect.block(n, n, n, n) = gamma * MatrixXd::Identity(n, n);
    expect.block(2 * n, n, nu, n) = Mk;
    expect.block(n, 2 * n, n, nu) = Mk.transpose();
    expect.bottomRightCorner(nu, nu) = prob.bench.D.inverse();
    const MatrixXd Q = AssembleQ(gamma, Xh, K, prob);
    EXPECT_LT((Q - expect).norm(), 1e-10 * (1.0 + expect.norm()));
  }
}

TEST(AssembleQ, RejectsWrongDimensions) {
  std::mt19937_64 rng(3);
  const SynthesisProblem prob = RandomProblem(2, 1, 1, 2, 0.5, rng);
  EXPECT_THROW(AssembleQ(1.0, MatrixXd::Identity(3, 3), MatrixXd::Zero(prob.lift.Nu, prob.lift.Ny),
                         prob),
               std::invalid_argument);
}

TEST(Problem, ValidationRejectsBadInputs) {
  std::mt19937_64 rng(4);
  const SystemDef sys = testing::RandomSystem(2, 1, 1, 2, rng);
  const LiftedOperators lift = BuildLifted(sys);
  const int n = lift.Nx + lift.Ny;
  const MomentNominal nom = MomentNominal::FromMoments(VectorXd::Zero(n), MatrixXd::Identity(n, n));
  EXPECT_THROW(SynthesisProblem::Make(sys, CostWeights::Identity(lift), nom, 0.0),
               std::invalid_argument);
  EXPECT_THROW(SynthesisProblem::Make(sys, CostWeights::Identity(lift), nom, -1.0),
               std::invalid_argument);
  const MomentNominal small =
      MomentNominal::FromMoments(VectorXd::Zero(n - 1), MatrixXd::Identity(n - 1, n - 1));
  EXPECT_THROW(SynthesisProblem::Make(sys, CostWeights::Identity(lift), small, 1.0),
               std::invalid_argument);
}

TEST(Recovery, ZeroMeanGivesLinearController) {
  std::mt19937_64 rng(5);
  const SystemDef sys = testing::RandomSystem(2, 1, 1, 2, rng);
  const LiftedOperators lift = BuildLifted(sys);
  const int n = lift.Nx + lift.Ny;
  const SynthesisProblem prob = SynthesisProblem::Make(
      sys, CostWeights::Identity(lift),
      MomentNominal::FromMoments(VectorXd::Zero(n), testing::RandomSpd(n, rng)), 1.0);
  const AffineRecovery a = RecoverAffineTerm(testing::RandomCausalGain(sys, rng), 2.5, prob);
  EXPECT_EQ(a.g.norm(), 0.0);
  EXPECT_EQ(a.beta, 0.0);
}

TEST(Recovery, HandFormula) {
  std::mt19937_64 rng(6);
  const SynthesisProblem prob = RandomProblem(1, 1, 1, 1, 0.5, rng);
  const SystemDef sys = testing::RandomSystem(1, 1, 1, 1, rng);
  const MatrixXd K = testing::RandomCausalGain(sys, rng);
  const double gamma = 0.8;
  const AffineRecovery a = RecoverAffineTerm(K, gamma, prob);
  const VectorXd& mu = prob.nominal.mu;
  // Nx = 2 (x0 and w0), Ny = 1: g = -((K CG - K*) mu_w + K mu_v).
  const MatrixXd Kw = K * prob.lift.CG - prob.bench.K_star;
  const VectorXd g = -(Kw * mu.head(prob.lift.Nx) + K * mu.tail(prob.lift.Ny));
  EXPECT_NEAR((a.g - g).norm(), 0.0, 1e-12);
  EXPECT_NEAR(a.beta, gamma * mu.squaredNorm(), 1e-12);
}

TEST(Methods, ParseRoundTrip) {
  for (Method m : {Method::kFull, Method::kReduced, Method::kEliminated, Method::kDistributed}) {
    ASSERT_TRUE(ParseMethod(ToString(m)).has_value());
    EXPECT_EQ(*ParseMethod(ToString(m)), m);
  }
  EXPECT_FALSE(ParseMethod("nope").has_value());
}

TEST(Synthesis, ReducedHasFewerVariables) {
  std::mt19937_64 rng(7);
  const SynthesisProblem prob = RandomProblem(2, 1, 1, 2, 0.5, rng);
  const FullProgram f = BuildFullProgram(prob);
  const ReducedProgram r = BuildReducedProgram(prob);
  EXPECT_EQ(f.program.num_vars() - r.program.num_vars(), 1 + prob.lift.Nu);
}

TEST(Synthesis, FullAndReducedAgree) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    const int T = 1 + trial % 3;
    const SynthesisProblem prob = RandomProblem(2, 1, 1 + trial % 2, T, 0.3 + 0.2 * trial, rng);
    SynthesisOptions full, reduced;
    full.method = Method::kFull;
    reduced.method = Method::kReduced;
    const SynthesisResult a = Synthesize(prob, full);
    const SynthesisResult b = Synthesize(prob, reduced);
    EXPECT_LT(RelDiff(a.value, b.value), 1e-4) << a.value << " vs " << b.value;
    EXPECT_GE(a.gamma, 0.0);
    EXPECT_EQ(prob.structure.AcausalNorm(a.controller.K), 0.0);
    EXPECT_EQ(prob.structure.AcausalNorm(b.controller.K), 0.0);
  }
}

TEST(Synthesis, RecoveredAffineTermSatisfiesMeanLmi) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const SynthesisProblem prob = RandomProblem(2, 1, 1, 2, 0.5, rng);
    const ReducedProgram rp = BuildReducedProgram(prob);
    const SolveReport rep = Solve(rp.program, prob.settings);
    ASSERT_TRUE(rep.ok()) << rep.diagnostics;
    const double gamma = rep.x(rp.gamma);
    const MatrixXd K = rp.K.Value(rep.x);
    const AffineRecovery a = RecoverAffineTerm(K, gamma, prob);
    const MatrixXd W = AssembleMeanLmi(a.beta, gamma, a.g, K, prob);
    EXPECT_GE(MinEig(W), -1e-8 * (1.0 + W.norm()));
  }
}

// The (8a) block is a principal submatrix of Q, so it inherits definiteness.
TEST(Synthesis, StrictBlockIsPrincipalSubmatrixOfQ) {
  std::mt19937_64 rng(10);
  const SynthesisProblem prob = RandomProblem(2, 1, 1, 2, 0.5, rng);
  SynthesisOptions o;
  o.method = Method::kReduced;
  const SynthesisResult r = Synthesize(prob, o);
  const MatrixXd Q = AssembleQ(r.gamma, r.X, r.controller.K, prob);
  const int n = prob.dim();
  const MatrixXd sub = Q.bottomRightCorner(n + prob.lift.Nu, n + prob.lift.Nu);
  EXPECT_GE(MinEig(sub), MinEig(Q) - 1e-12);
  EXPECT_GT(MinEig(sub), 0.0);
}

// The certified value bounds the expected regret under any distribution in
// the ball; affine pushforwards of the nominal give explicit couplings.
TEST(Synthesis, CertifiedValueDominatesPerturbations) {
  std::mt19937_64 rng(11);
  const SynthesisProblem prob = RandomProblem(2, 1, 1, 2, 0.6, rng);
  SynthesisOptions o;
  o.method = Method::kFull;
  const SynthesisResult res = Synthesize(prob, o);
  const MatrixXd M = RegretMap(res.controller.K, prob.lift, prob.bench);
  const int n = prob.dim();
  const MatrixXd M2 = prob.nominal.Sigma + prob.nominal.mu * prob.nominal.mu.transpose();
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd E = testing::RandomMatrix(n, n, rng, 0.3);
    const VectorXd b = testing::RandomVector(n, rng, 0.3);
    // Cost of the coupling xi -> xi + E xi + b.
    const double cost = std::sqrt((E.transpose() * E * M2).trace() +
                                  2.0 * b.dot(E * prob.nominal.mu) + b.squaredNorm());
    const double s = prob.radius / cost;
    const MatrixXd A = MatrixXd::Identity(n, n) + s * E;
    const double regret = ExpectedRegretMoments(M, res.controller.g, A * prob.nominal.mu + s * b,
                                                A * prob.nominal.Sigma * A.transpose(), prob.bench);
    EXPECT_LE(regret, res.value + 1e-5 * (1.0 + res.value));
  }
}

TEST(Synthesis, CertificateMatchesValue) {
  std::mt19937_64 rng(12);
  const SynthesisProblem prob = RandomProblem(2, 1, 1, 2, 0.5, rng);
  SynthesisOptions o;
  o.method = Method::kFull;
  const SynthesisResult r = Synthesize(prob, o);
  EXPECT_LT(RelDiff(r.certificate, r.value), 1e-5);
  EXPECT_NEAR(r.reconstruction_gap, r.certificate - r.value, 1e-15);
}

TEST(Synthesis, MassSpringMagnitude) {
  const SynthesisProblem prob = MassSpringProblem();
  EXPECT_EQ(prob.dim(), 22);
  SynthesisOptions o;
  o.method = Method::kReduced;
  const SynthesisResult r = Synthesize(prob, o);
  EXPECT_GT(r.value, 0.75 * 138.476);
  EXPECT_LT(r.value, 1.25 * 138.476);
}

}  // namespace
}  // namespace drro
