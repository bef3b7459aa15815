#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "drro/elimination.h"
#include "problem_util.h"

namespace drro {
namespace {

using testing::RandomProblem;
using testing::RelDiff;

MatrixXd Projector(const MatrixXd& B) { return B * B.transpose(); }

TEST(KernelBasis, ZeroMatrixGivesFullSpace) {
  const MatrixXd B = KernelBasis(MatrixXd::Zero(2, 3));
  EXPECT_TRUE(B.isApprox(MatrixXd::Identity(3, 3)));
  EXPECT_EQ(KernelBasis(MatrixXd::Zero(0, 4)).cols(), 4);
}

TEST(KernelBasis, IdentityGivesEmptyBasis) {
  EXPECT_EQ(KernelBasis(MatrixXd::Identity(3, 3)).cols(), 0);
}

TEST(KernelBasis, RowOfOnes) {
  const MatrixXd B = KernelBasis((MatrixXd(1, 2) << 1.0, 1.0).finished());
  ASSERT_EQ(B.cols(), 1);
  const Eigen::Vector2d v(1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0));
  EXPECT_NEAR(std::abs(B.col(0).dot(v)), 1.0, 1e-14);
}

TEST(KernelBasis, RandomLowRank) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const int rank = 1 + trial % 3;
    const MatrixXd M = testing::RandomMatrix(5, rank, rng) * testing::RandomMatrix(rank, 7, rng);
    const MatrixXd B = KernelBasis(M);
    ASSERT_EQ(B.cols(), 7 - rank);
    EXPECT_LT((B.transpose() * B - MatrixXd::Identity(B.cols(), B.cols())).norm(), 1e-12);
    EXPECT_LT((M * B).norm(), 1e-12 * M.norm());
  }
}

TEST(EliminationData, SingleStageBoundaryConventions) {
  std::mt19937_64 rng(2);
  const SynthesisProblem prob = RandomProblem(2, 1, 2, 1, 0.5, rng);
  const EliminationData d = BuildEliminationData(prob);
  ASSERT_EQ(d.T, 1);
  ASSERT_EQ(d.B.size(), 3u);
  EXPECT_LT((Projector(d.B[1]) - Projector(KernelBasis(d.barL[1]))).norm(), 1e-10);
  EXPECT_LT((Projector(d.B[2]) - Projector(KernelBasis(d.barR[1]))).norm(), 1e-10);
  EXPECT_EQ(d.N[1].cols(), d.side);
}

TEST(EliminationData, MassSpringBases) {
  const SynthesisProblem prob = testing::MassSpringProblem();
  const EliminationData d = BuildEliminationData(prob);
  ASSERT_EQ(d.T, 5);
  for (int i = 1; i <= 6; ++i) {
    EXPECT_GT(d.B[i].cols(), 0);
    EXPECT_LT(d.B[i].cols(), prob.q_side());
    EXPECT_LE((d.barL[i] * d.B[i]).norm(), 1e-9 * std::max(1.0, d.barL[i].norm()));
  }
}

// ker(barL_j) is contained in ker(barL_{j+1}) and the intersections shrink.
TEST(EliminationData, KernelsAreNested) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const SynthesisProblem prob = RandomProblem(1 + trial % 3, 1 + trial % 2, 1 + trial % 3, 4,
                                                0.5, rng);
    const EliminationData d = BuildEliminationData(prob);
    for (int j = 1; j < d.T; ++j) {
      const MatrixXd Pj = Projector(KernelBasis(d.barL[j]));
      const MatrixXd Pn = Projector(KernelBasis(d.barL[j + 1]));
      EXPECT_LT((Pn * Pj - Pj).norm(), 1e-10);
      const MatrixXd Ni = Projector(d.N[j]), Nn = Projector(d.N[j + 1]);
      EXPECT_LT((Ni * Nn - Nn).norm(), 1e-10);
    }
  }
}

TEST(EliminatedProgram, VariableCount) {
  std::mt19937_64 rng(4);
  const SynthesisProblem prob = RandomProblem(2, 1, 1, 3, 0.5, rng);
  const EliminationData d = BuildEliminationData(prob);
  const int n = prob.dim();
  EXPECT_EQ(BuildEliminatedProgram(prob, d).program.num_vars(), 1 + n * (n + 1) / 2);
}

TEST(ProjectionLmi, ZeroUAndDefiniteP) {
  const MatrixXd P = (MatrixXd(2, 2) << 2.0, 0.5, 0.5, 1.0).finished();
  const ProjectionSolution s =
      SolveProjectionLmi(MatrixXd::Zero(1, 2), MatrixXd::Identity(2, 2), P, 1e-6);
  const MatrixXd S = MatrixXd::Zero(1, 2).transpose() * s.Y;
  EXPECT_GT(MinEig(P), 0.0);
  EXPECT_GT(s.margin, 0.0);
  EXPECT_EQ(S.norm(), 0.0);
}

TEST(ProjectionLmi, NegativeIdentityWithSquareFactors) {
  const MatrixXd I = MatrixXd::Identity(3, 3);
  const ProjectionSolution s = SolveProjectionLmi(I, I, -I, 1e-6);
  EXPECT_GT(MinEig(s.Y + s.Y.transpose() - I), 0.0);
  EXPECT_NEAR(s.margin, MinEig(s.Y + s.Y.transpose() - I), 1e-12);
}

TEST(ProjectionLmi, PlantedSolution) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 6, ru = 2, rv = 3;
    const MatrixXd U = testing::RandomMatrix(ru, m, rng);
    const MatrixXd V = testing::RandomMatrix(rv, m, rng);
    const MatrixXd Ystar = testing::RandomMatrix(ru, rv, rng);
    const MatrixXd S = U.transpose() * Ystar * V;
    // P = I - (S + S') makes Y* feasible with margin 1.
    const MatrixXd P = MatrixXd::Identity(m, m) - S - S.transpose();
    const ProjectionSolution sol = SolveProjectionLmi(U, V, P, 1e-6);
    const MatrixXd R = U.transpose() * sol.Y * V;
    EXPECT_GT(MinEig(R + R.transpose() + P), 0.0);
  }
}

TEST(ProjectionLmi, ReportsFailedKernelCondition) {
  const MatrixXd U = (MatrixXd(1, 2) << 1.0, 0.0).finished();
  const MatrixXd V = (MatrixXd(1, 2) << 1.0, 0.0).finished();
  const MatrixXd P = -MatrixXd::Identity(2, 2);
  try {
    SolveProjectionLmi(U, V, P, 1e-6);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("kernel of U"), std::string::npos);
  }
}

TEST(Eliminated, SingleStageMatchesReduced) {
  std::mt19937_64 rng(6);
  const SynthesisProblem prob = RandomProblem(1, 1, 1, 1, 0.5, rng);
  SynthesisOptions red, eli;
  red.method = Method::kReduced;
  eli.method = Method::kEliminated;
  EXPECT_LT(RelDiff(Synthesize(prob, red).value, Synthesize(prob, eli).value), 1e-3);
}

TEST(Eliminated, ReconstructionOnRandomSystems) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const SynthesisProblem prob =
        RandomProblem(1 + trial % 3, 1 + trial % 2, 1 + (trial + 1) % 3, 3, 0.3 + 0.1 * trial, rng);
    SynthesisOptions red, eli;
    red.method = Method::kReduced;
    eli.method = Method::kEliminated;
    const SynthesisResult a = Synthesize(prob, red);
    const SynthesisResult b = Synthesize(prob, eli);
    const MatrixXd& K = b.controller.K;
    EXPECT_EQ(prob.structure.AcausalNorm(K), 0.0);
    const MatrixXd Q = AssembleQ(b.gamma, b.X, K, prob);
    EXPECT_GE(MinEig(Q), -1e-7 * (1.0 + Q.norm()));
    // value(12) close to value(9), and the certificate sandwiched.
    const double scale = 1.0 + std::abs(a.value);
    EXPECT_LE(b.value, a.value + 1e-3 * scale);
    EXPECT_LE(a.value, b.certificate + 1e-6 * scale);
    EXPECT_LE(b.certificate, b.value + 1e-3 * scale);
  }
}

}  // namespace
}  // namespace drro
