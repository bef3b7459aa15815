#include <cmath>

#include <gtest/gtest.h>

#include "drro/wc_duality.h"
#include "test_util.h"

namespace drro {
namespace {

using testing::RandomMatrix;
using testing::RandomSpd;
using testing::RandomVector;

// Minimises gamma r^2 + m2 gamma / (gamma - 1) over gamma > 1 by golden
// section: the dual of the worst-case second moment reduces to this line
// search when the loss is |xi|^2.
double SecondMomentLineSearch(double m2, double r) {
  double lo = 1.0 + 1e-12, hi = 1.0 + 1e6;
  auto f = [&](double g) { return g * r * r + m2 * g / (g - 1.0); };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  // Work on log(gamma - 1) for a well-conditioned bracket.
  double a = std::log(lo - 1.0), b = std::log(hi - 1.0);
  auto h = [&](double t) { return f(1.0 + std::exp(t)); };
  double c = b - phi * (b - a), d = a + phi * (b - a);
  for (int it = 0; it < 300; ++it) {
    if (h(c) < h(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  return h(0.5 * (a + b));
}

Quadratic SquaredNorm(int n) { return Quadratic(MatrixXd::Identity(n, n), VectorXd::Zero(n), 0.0); }

TEST(MomentWce, ScalarAnchor) {
  const MomentNominal nom = MomentNominal::FromMoments(VectorXd::Zero(1), MatrixXd::Ones(1, 1));
  const WceSolution s = SolveMomentWce(SquaredNorm(1), nom, 1.0);
  ASSERT_TRUE(s.report.ok()) << s.report.diagnostics;
  EXPECT_NEAR(s.value, 4.0, 1e-6 * 4.0);
  EXPECT_NEAR(s.gamma, 2.0, 1e-3);
  EXPECT_NEAR(SecondMomentLineSearch(1.0, 1.0), 4.0, 1e-9);
}

TEST(MomentWce, SecondMomentFamily) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 6;
    const MomentNominal nom = MomentNominal::FromMoments(RandomVector(n, rng), RandomSpd(n, rng));
    const double r = 0.1 + 2.0 * std::uniform_real_distribution<double>()(rng);
    const double m2 = nom.Sigma.trace() + nom.mu.squaredNorm();
    const double oracle = SecondMomentLineSearch(m2, r);
    ASSERT_NEAR(oracle, std::pow(std::sqrt(m2) + r, 2), 1e-9 * oracle);
    const WceSolution s = SolveMomentWce(SquaredNorm(n), nom, r);
    ASSERT_TRUE(s.report.ok()) << s.report.diagnostics;
    EXPECT_NEAR(s.value, oracle, 1e-6 * oracle) << "n=" << n << " r=" << r;
    EXPECT_GE(s.gamma, 0.0);
    EXPECT_GT(MinEig(s.gamma * MatrixXd::Identity(n, n) - MatrixXd::Identity(n, n)), 0.0);
  }
}

TEST(MomentWce, SmallRadiusRecoversNominal) {
  std::mt19937_64 rng(2);
  const int n = 3;
  const MomentNominal nom = MomentNominal::FromMoments(RandomVector(n, rng), RandomSpd(n, rng));
  const WceSolution s = SolveMomentWce(SquaredNorm(n), nom, 1e-6);
  ASSERT_TRUE(s.report.ok()) << s.report.diagnostics;
  const double m2 = nom.Sigma.trace() + nom.mu.squaredNorm();
  EXPECT_NEAR(s.value, m2, 1e-3 * m2);

  const Quadratic l(RandomMatrix(n, n, rng), RandomVector(n, rng), 0.7);
  const WceSolution g = SolveMomentWce(l, nom, 1e-6);
  ASSERT_TRUE(g.report.ok()) << g.report.diagnostics;
  const double e = l.Expectation(nom.mu, nom.Sigma);
  EXPECT_NEAR(g.value, e, 1e-3 * (1 + std::abs(e)));
}

TEST(MomentWce, RejectsZeroLargestEigenvalue) {
  const MomentNominal nom = MomentNominal::FromMoments(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  const Quadratic l(-Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix(), VectorXd::Zero(2), 0);
  EXPECT_THROW(BuildMomentWceProgram(l, nom, 1.0), std::invalid_argument);
  EXPECT_THROW(BuildMomentWceProgram(SquaredNorm(2), nom, 0.0), std::invalid_argument);
}

TEST(MomentWce, NegativeDefiniteLossDominatesNominalAndIsMonotone) {
  std::mt19937_64 rng(3);
  const int n = 2;
  const MomentNominal nom = MomentNominal::FromMoments(RandomVector(n, rng), RandomSpd(n, rng));
  const Quadratic l(-MatrixXd::Identity(n, n), VectorXd::Zero(n), 0.0);
  const double nominal = l.Expectation(nom.mu, nom.Sigma);
  const double m2 = -nominal;
  double prev = -1e300;
  for (double r = 0.1; r <= 2.0 + 1e-12; r += 0.1) {
    const WceSolution s = SolveMomentWce(l, nom, r);
    ASSERT_TRUE(s.report.ok()) << s.report.diagnostics;
    EXPECT_GE(s.value, nominal - 1e-6 * (1 + std::abs(nominal)));
    EXPECT_LE(s.value, -m2 + 2 * r * std::sqrt(m2) + 1e-6 * (1 + std::abs(nominal)));
    EXPECT_GE(s.value, prev - 1e-6 * (1 + std::abs(prev)));
    prev = s.value;
  }
}

// Affine pushforward xi -> A xi + b keeps the distribution inside the ball
// when its coupling cost E|(A - I) xi + b|^2 is at most r^2.
TEST(MomentWce, DominatesExplicitPerturbations) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3;
    const MomentNominal nom = MomentNominal::FromMoments(RandomVector(n, rng), RandomSpd(n, rng));
    MatrixXd P = RandomMatrix(n, n, rng);
    P = 0.5 * (P + P.transpose());
    P.diagonal().array() += 1.0;
    const Quadratic l(P, RandomVector(n, rng), 0.3);
    const double r = 0.8;
    const WceSolution s = SolveMomentWce(l, nom, r);
    ASSERT_TRUE(s.report.ok()) << s.report.diagnostics;
    for (int k = 0; k < 20; ++k) {
      const MatrixXd E = RandomMatrix(n, n, rng, 0.3);
      const VectorXd b = RandomVector(n, rng, 0.3);
      const double cost2 = (E * nom.Sigma * E.transpose()).trace() + (E * nom.mu + b).squaredNorm();
      const double scale = std::min(1.0, r / std::sqrt(cost2));
      const MatrixXd A = MatrixXd::Identity(n, n) + scale * E;
      const VectorXd mu = A * nom.mu + scale * b;
      const double pert = l.Expectation(mu, A * nom.Sigma * A.transpose());
      EXPECT_LE(pert, s.value + 1e-6 * (1 + std::abs(s.value)));
    }
  }
}

TEST(MomentWce, MonotoneInRadius) {
  std::mt19937_64 rng(5);
  const int n = 3;
  const MomentNominal nom = MomentNominal::FromMoments(RandomVector(n, rng), RandomSpd(n, rng));
  MatrixXd P = RandomMatrix(n, n, rng);
  const Quadratic l(0.5 * (P + P.transpose()), RandomVector(n, rng), -1.0);
  double prev = -1e300;
  for (double r = 0.1; r <= 2.0 + 1e-12; r += 0.1) {
    const WceSolution s = SolveMomentWce(l, nom, r);
    ASSERT_TRUE(s.report.ok()) << s.report.diagnostics;
    EXPECT_GE(s.value, prev - 1e-6 * (1 + std::abs(prev)));
    prev = s.value;
  }
}

TEST(DiscreteDualMatrix, Examples) {
  const Ellipsoid e{MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0.0};
  const Quadratic zero(MatrixXd::Zero(2, 2), VectorXd::Zero(2), 0.0);
  EXPECT_TRUE(DiscreteDualMatrix(0, VectorXd::Zero(2), 0, 0, zero, {MatrixXd::Zero(2, 2), VectorXd::Zero(2), 0.0}).isZero(0));
  const MatrixXd W = DiscreteDualMatrix(1, VectorXd::Zero(2), 0, 0, zero, e);
  EXPECT_EQ(W, Eigen::Vector3d(0, 1, 1).asDiagonal().toDenseMatrix());

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3;
    const Quadratic l(RandomMatrix(n, n, rng), RandomVector(n, rng), 0.4);
    const Ellipsoid s{RandomSpd(n, rng), RandomVector(n, rng), -2.0};
    const VectorXd z = RandomVector(n, rng);
    const double lam = 1.3, al = 0.6, t = -0.2;
    // Quadratic form identity: [1; xi]' W [1; xi] =
    //   lam |xi - z|^2 - l(xi) + al * s(xi) - t.
    for (int k = 0; k < 5; ++k) {
      const VectorXd xi = RandomVector(n, rng);
      VectorXd v(n + 1);
      v << 1.0, xi;
      const double lhs = v.dot(DiscreteDualMatrix(lam, z, al, t, l, s) * v);
      const double rhs = lam * (xi - z).squaredNorm() - l(xi) + al * s.Evaluate(xi) - t;
      EXPECT_NEAR(lhs, rhs, 1e-10 * (1 + std::abs(rhs)));
    }
  }
}

DiscreteNominal UnitBallAtom(const VectorXd& at) {
  return DiscreteNominal::Uniform(at, Ellipsoid::Ball(VectorXd::Zero(at.size()), 1.0));
}

TEST(DiscreteWce, RadialTransportOracle) {
  const Quadratic l = SquaredNorm(2);
  for (double r : {0.5, 2.0}) {
    const WceSolution s = SolveDiscreteWce(l, UnitBallAtom(VectorXd::Zero(2)), r);
    ASSERT_TRUE(s.report.ok()) << s.report.diagnostics;
    EXPECT_NEAR(s.value, std::pow(std::min(r, 1.0), 2), 1e-6);
  }
  // Off-centre atom: optimal plan moves it radially by r, capped at the boundary.
  const VectorXd z = (VectorXd(2) << 0.3, 0.0).finished();
  for (double r : {0.1, 0.4, 0.9}) {
    const WceSolution s = SolveDiscreteWce(l, UnitBallAtom(z), r);
    ASSERT_TRUE(s.report.ok()) << s.report.diagnostics;
    EXPECT_NEAR(s.value, std::pow(std::min(0.3 + r, 1.0), 2), 1e-6);
    EXPECT_GE(s.lambda, 0.0);
    EXPECT_GE(s.alpha.minCoeff(), 0.0);
  }
}

TEST(DiscreteWce, ConstantLoss) {
  std::mt19937_64 rng(7);
  const MatrixXd pts = RandomMatrix(2, 4, rng, 0.2);
  const DiscreteNominal nom = DiscreteNominal::Uniform(pts, Ellipsoid::Ball(VectorXd::Zero(2), 1.0));
  const Quadratic l(MatrixXd::Zero(2, 2), VectorXd::Zero(2), 2.5);
  const WceSolution s = SolveDiscreteWce(l, nom, 0.7);
  ASSERT_TRUE(s.report.ok()) << s.report.diagnostics;
  EXPECT_NEAR(s.value, 2.5, 1e-6);
}

TEST(DiscreteWce, TwoAtomsOnIntervalMonotone) {
  const MatrixXd pts = (MatrixXd(1, 2) << 0.5, -0.5).finished();
  const DiscreteNominal nom = DiscreteNominal::Uniform(pts, Ellipsoid::Ball(VectorXd::Zero(1), 1.0));
  const Quadratic l = SquaredNorm(1);
  double prev = 0.25 - 1e-9;
  for (double r = 0.01; r <= 2.0; r += 0.1) {
    const WceSolution s = SolveDiscreteWce(l, nom, r);
    ASSERT_TRUE(s.report.ok()) << s.report.diagnostics;
    EXPECT_GE(s.value, 0.25 - 1e-7);
    EXPECT_GE(s.value, prev - 1e-7);
    EXPECT_LE(s.value, 1.0 + 1e-6);
    prev = s.value;
  }
}

TEST(DiscreteWce, ExplicitUniformWeightsMatch) {
  std::mt19937_64 rng(8);
  const MatrixXd pts = RandomMatrix(2, 5, rng, 0.3);
  DiscreteNominal a = DiscreteNominal::Uniform(pts, Ellipsoid::Ball(VectorXd::Zero(2), 1.0));
  DiscreteNominal b = a;
  b.weights = VectorXd::Constant(5, 0.2);
  const Quadratic l(RandomSpd(2, rng), RandomVector(2, rng), 0.0);
  EXPECT_EQ(SolveDiscreteWce(l, a, 0.5).value, SolveDiscreteWce(l, b, 0.5).value);
}

TEST(DiscreteWce, NominalRecoveryAndDominance) {
  std::mt19937_64 rng(9);
  const int n = 2, N = 4;
  const MatrixXd pts = RandomMatrix(n, N, rng, 0.25);
  DiscreteNominal nom = DiscreteNominal::Uniform(pts, Ellipsoid::Ball(VectorXd::Zero(n), 1.0));
  nom.weights << 0.1, 0.2, 0.3, 0.4;
  MatrixXd P = RandomMatrix(n, n, rng);
  const Quadratic l(0.5 * (P + P.transpose()), RandomVector(n, rng), 0.1);
  double nominal = 0.0;
  for (int i = 0; i < N; ++i) nominal += nom.weights(i) * l(pts.col(i));
  const WceSolution small = SolveDiscreteWce(l, nom, 1e-6);
  ASSERT_TRUE(small.report.ok()) << small.report.diagnostics;
  EXPECT_NEAR(small.value, nominal, 1e-4 * (1 + std::abs(nominal)));

  const double r = 0.3;
  const WceSolution s = SolveDiscreteWce(l, nom, r);
  ASSERT_TRUE(s.report.ok()) << s.report.diagnostics;
  for (int k = 0; k < 50; ++k) {
    // Move each atom inside the support; rescale so the coupling cost is r.
    MatrixXd moved = pts + RandomMatrix(n, N, rng, 0.2);
    for (int i = 0; i < N; ++i) {
      if (moved.col(i).norm() > 1.0) moved.col(i).normalize();
    }
    double cost2 = 0.0;
    for (int i = 0; i < N; ++i) cost2 += nom.weights(i) * (moved.col(i) - pts.col(i)).squaredNorm();
    if (cost2 > r * r) moved = pts + (moved - pts) * (r / std::sqrt(cost2));
    const double cc = CouplingCost(pts, nom.weights, moved, nom.weights, nom.weights.asDiagonal());
    ASSERT_LE(cc, r + 1e-12);
    double e = 0.0;
    for (int i = 0; i < N; ++i) e += nom.weights(i) * l(moved.col(i));
    EXPECT_LE(e, s.value + 1e-6 * (1 + std::abs(s.value)));
  }
}

}  // namespace
}  // namespace drro
