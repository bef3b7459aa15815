#include "drro/regret.h"

#include <stdexcept>

#include "drro/conic.h"

namespace drro {

void CostWeights::Validate(const LiftedOperators& lift) const {
  if (Jx.rows() != lift.Nx || Jx.cols() != lift.Nx) {
    throw std::invalid_argument("state weight must be Nx x Nx");
  }
  if (Ju.rows() != lift.Nu || Ju.cols() != lift.Nu) {
    throw std::invalid_argument("input weight must be Nu x Nu");
  }
  if ((Jx - Jx.transpose()).norm() > 1e-12 * std::max(1.0, Jx.norm()) ||
      (Ju - Ju.transpose()).norm() > 1e-12 * std::max(1.0, Ju.norm())) {
    throw std::invalid_argument("cost weights must be symmetric");
  }
  if (MinEig(Jx) < -1e-10 * Jx.norm()) throw std::invalid_argument("state weight must be PSD");
  if (!(MinEig(Ju) > 0)) throw std::invalid_argument("input weight must be positive definite");
}

CostWeights CostWeights::Identity(const LiftedOperators& lift) {
  return {MatrixXd::Identity(lift.Nx, lift.Nx), MatrixXd::Identity(lift.Nu, lift.Nu)};
}

Benchmark BuildBenchmark(const LiftedOperators& lift, const CostWeights& weights) {
  weights.Validate(lift);
  Benchmark b;
  b.D = weights.Ju + lift.F.transpose() * weights.Jx * lift.F;
  b.D = 0.5 * (b.D + b.D.transpose());
  Eigen::LLT<MatrixXd> llt(b.D);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("benchmark Hessian is not PD");
  b.D_chol = llt.matrixL();
  b.D_inv = llt.solve(MatrixXd::Identity(lift.Nu, lift.Nu));
  b.D_inv = 0.5 * (b.D_inv + b.D_inv.transpose());
  b.K_star = -llt.solve(lift.F.transpose() * weights.Jx * lift.G);
  if (b.K_star.norm() < 1e-12 * lift.G.norm()) {
    throw std::invalid_argument("benchmark gain vanishes; regret is identically the cost");
  }
  return b;
}

MatrixXd RegretMap(const MatrixXd& K, const LiftedOperators& lift, const Benchmark& bench) {
  MatrixXd M(lift.Nu, lift.Nx + lift.Ny);
  M.leftCols(lift.Nx) = K * lift.CG - bench.K_star;
  M.rightCols(lift.Ny) = K;
  return M;
}

double EvalCost(const VectorXd& u, const VectorXd& w, const LiftedOperators& lift,
                const CostWeights& weights) {
  const VectorXd x = lift.F * u + lift.G * w;
  return x.dot(weights.Jx * x) + u.dot(weights.Ju * u);
}

double EvalRegret(const AffineController& ctrl, const VectorXd& w, const VectorXd& v,
                  const LiftedOperators& lift, const Benchmark& bench) {
  VectorXd xi(lift.Nx + lift.Ny);
  xi << w, v;
  const VectorXd e = RegretMap(ctrl.K, lift, bench) * xi + ctrl.g;
  return e.dot(bench.D * e);
}

double ExpectedRegretMoments(const MatrixXd& M, const VectorXd& g, const VectorXd& mu,
                             const MatrixXd& Sigma, const Benchmark& bench) {
  const VectorXd e = M * mu + g;
  const MatrixXd DM = bench.D * M;
  return (M.transpose() * DM).cwiseProduct(Sigma).sum() + e.dot(bench.D * e);
}

}  // namespace drro
