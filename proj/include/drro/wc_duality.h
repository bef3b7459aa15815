#pragma once

#include <vector>

#include "drro/ambiguity.h"
#include "drro/conic.h"

namespace drro {

// l(xi) = xi' P xi + 2 q' xi + c.
struct Quadratic {
  MatrixXd P;
  VectorXd q;
  double c = 0.0;

  Quadratic() = default;
  Quadratic(const MatrixXd& P_in, const VectorXd& q_in, double c_in);
  int dim() const { return static_cast<int>(q.size()); }
  double operator()(const VectorXd& xi) const { return xi.dot(P * xi) + 2.0 * q.dot(xi) + c; }
  // E[l] under a distribution with the given mean and covariance.
  double Expectation(const VectorXd& mu, const MatrixXd& Sigma) const;
};

struct WceSolution {
  double value = 0.0;
  // Moment nominal duals.
  double gamma = 0.0;
  double beta = 0.0;
  MatrixXd X;
  // Discrete nominal duals.
  double lambda = 0.0;
  VectorXd alpha;
  VectorXd gammas;
  SolveReport report;
};

// Worst-case expectation of l over the type-2 Wasserstein ball of radius r
// around a distribution with the nominal's mean and covariance, as an SDP in
// (gamma, beta, X). Throws std::invalid_argument when lambda_max(P) = 0.
ConicProgram BuildMomentWceProgram(const Quadratic& l, const MomentNominal& nom, double r,
                                   const SolverSettings& s = {});
WceSolution SolveMomentWce(const Quadratic& l, const MomentNominal& nom, double r,
                           const SolverSettings& s = {});

// The (n+1) x (n+1) matrix whose semidefiniteness encodes one atom's dual
// constraint for an ellipsoidal support.
MatrixXd DiscreteDualMatrix(double lambda, const VectorXd& zeta, double alpha, double t,
                            const Quadratic& l, const Ellipsoid& support);

// Worst-case expectation over the ball around a discrete nominal restricted
// to its ellipsoidal support, as an SDP in (lambda, alpha_i, gamma_i).
ConicProgram BuildDiscreteWceProgram(const Quadratic& l, const DiscreteNominal& nom, double r);
WceSolution SolveDiscreteWce(const Quadratic& l, const DiscreteNominal& nom, double r,
                             const SolverSettings& s = {});

}  // namespace drro
