#pragma once

#include <Eigen/Dense>

#include "drro/lift.h"

namespace drro {

// J(u, w) = x' Jx x + u' Ju u with x = F u + G w.
struct CostWeights {
  MatrixXd Jx;  // Nx x Nx, PSD
  MatrixXd Ju;  // Nu x Nu, PD

  void Validate(const LiftedOperators& lift) const;
  static CostWeights Identity(const LiftedOperators& lift);
};

// Clairvoyant controller u* = K_star w that minimises J(., w) for every w.
struct Benchmark {
  MatrixXd K_star;  // Nu x Nx
  MatrixXd D;       // Ju + F' Jx F
  MatrixXd D_inv;
  MatrixXd D_chol;  // lower Cholesky factor of D
};

// Throws std::invalid_argument when Ju is not PD or K_star vanishes.
Benchmark BuildBenchmark(const LiftedOperators& lift, const CostWeights& weights);

// Regret map M = [K CG - K_star | K], acting on the stacked (w; v).
MatrixXd RegretMap(const MatrixXd& K, const LiftedOperators& lift, const Benchmark& bench);

double EvalCost(const VectorXd& u, const VectorXd& w, const LiftedOperators& lift,
                const CostWeights& weights);

// |M (w; v) + g|_D^2, the cost excess over the clairvoyant benchmark.
double EvalRegret(const AffineController& ctrl, const VectorXd& w, const VectorXd& v,
                  const LiftedOperators& lift, const Benchmark& bench);

// E|M xi + g|_D^2 for xi with mean mu and covariance Sigma.
double ExpectedRegretMoments(const MatrixXd& M, const VectorXd& g, const VectorXd& mu,
                             const MatrixXd& Sigma, const Benchmark& bench);

}  // namespace drro
