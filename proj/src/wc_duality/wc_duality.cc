#include "drro/wc_duality.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "drro/lmi.h"

namespace drro {
namespace {

void RequireRadius(double r) {
  if (!(r > 0) || !std::isfinite(r)) throw std::invalid_argument("radius must be positive");
}

void RequireValid(const std::vector<std::string>& violations) {
  if (!violations.empty()) throw std::invalid_argument(violations.front());
}

double LargestEig(const MatrixXd& P) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(P, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(P.rows() - 1);
}

}  // namespace

Quadratic::Quadratic(const MatrixXd& P_in, const VectorXd& q_in, double c_in)
    : P(0.5 * (P_in + P_in.transpose())), q(q_in), c(c_in) {
  if (P.rows() != q.size()) throw std::invalid_argument("quadratic P and q sizes differ");
}

double Quadratic::Expectation(const VectorXd& mu, const MatrixXd& Sigma) const {
  return mu.dot(P * mu) + P.cwiseProduct(Sigma).sum() + 2.0 * q.dot(mu) + c;
}

ConicProgram BuildMomentWceProgram(const Quadratic& l, const MomentNominal& nom, double r,
                                   const SolverSettings& s) {
  RequireRadius(r);
  RequireValid(Validate(nom));
  const int n = nom.dim();
  if (l.dim() != n) throw std::invalid_argument("loss and nominal dimensions differ");
  const double lmax = LargestEig(l.P);
  if (!(std::abs(lmax) > 1e-12 * l.P.norm())) {
    throw std::invalid_argument("loss matrix must have a nonzero largest eigenvalue");
  }
  const double m2 = nom.Sigma.trace() + nom.mu.squaredNorm();
  const double root = std::sqrt(m2) + r;
  const double scale = std::abs(lmax) * root * root + 2.0 * l.q.norm() * root + std::abs(l.c);
  const double eps = s.StrictEpsilon(scale);

  ConicProgram p;
  const int gamma = p.AddVariable("gamma");
  const int beta = p.AddVariable("beta");
  const SymMatrixVar X = SymMatrixVar::Add(p, "X", n);
  p.AddObjective(gamma, r * r - m2);
  p.AddObjective(beta, 1.0);
  X.AddTraceObjective(p, 1.0);

  // Both blocks are written after the fixed congruence T = [[I, 0], [-L, I]]
  // (L = Lambda or mu), which keeps the constraint and moves gamma onto the
  // identity diagonal; without it the slacks grow like gamma while their
  // small eigenvalues vanish, which stalls the solver as r -> 0.
  // T' [[X, gamma Lambda'], [gamma Lambda, gamma I - P]] T =
  //   [[X - gamma Lambda' Lambda - Lambda' P Lambda, Lambda' P], [P Lambda, gamma I - P]].
  const MatrixXd LtL = nom.Lambda.transpose() * nom.Lambda;
  const int cov = p.AddPsdBlock("covariance", 2 * n);
  X.Place(p, cov, 0);
  AddBlockTerm(p, cov, 0, 0, LtL, gamma, -1.0);
  AddBlockConstant(p, cov, 0, 0, nom.Lambda.transpose() * l.P * nom.Lambda, -1.0);
  AddBlockConstant(p, cov, n, 0, l.P * nom.Lambda);
  AddIdentityTerm(p, cov, n, n, gamma);
  AddBlockConstant(p, cov, n, n, l.P, -1.0);

  // T' [[beta - c, (gamma mu + q)'], [gamma mu + q, gamma I - P]] T =
  //   [[beta - gamma |mu|^2 - l(mu), (P mu + q)'], [P mu + q, gamma I - P]].
  const int mean = p.AddPsdBlock("mean", n + 1);
  p.AddPsdTerm(mean, 0, 0, beta, 1.0);
  p.AddPsdTerm(mean, 0, 0, gamma, -nom.mu.squaredNorm());
  p.AddPsdConstant(mean, 0, 0, -l(nom.mu));
  AddBlockConstant(p, mean, 1, 0, l.P * nom.mu + l.q);
  AddIdentityTerm(p, mean, 1, n, gamma);
  AddBlockConstant(p, mean, 1, 1, l.P, -1.0);

  // gamma I - P > 0 with margin eps.
  const int strict = p.AddPsdBlock("strict", n);
  AddIdentityTerm(p, strict, 0, n, gamma);
  AddBlockConstant(p, strict, 0, 0, l.P, -1.0);
  p.AddPsdShift(strict, -eps);

  const int nn = p.AddNonNegBlock("gamma>=0", 1);
  p.AddVectorTerm(nn, 0, gamma, 1.0);
  return p;
}

WceSolution SolveMomentWce(const Quadratic& l, const MomentNominal& nom, double r,
                           const SolverSettings& s) {
  const ConicProgram p = BuildMomentWceProgram(l, nom, r, s);
  WceSolution sol;
  sol.report = Solve(p, s);
  if (!sol.report.ok()) return sol;
  const VectorXd& x = sol.report.x;
  sol.value = sol.report.primal_value;
  sol.gamma = x(0);
  sol.beta = x(1);
  sol.X = SymMatrixVar{2, nom.dim()}.Value(x);
  return sol;
}

MatrixXd DiscreteDualMatrix(double lambda, const VectorXd& zeta, double alpha, double t,
                            const Quadratic& l, const Ellipsoid& support) {
  const int n = static_cast<int>(zeta.size());
  MatrixXd W(n + 1, n + 1);
  W(0, 0) = lambda * zeta.squaredNorm() - l.c + alpha * support.c2 - t;
  const VectorXd off = alpha * support.q2 - lambda * zeta - l.q;
  W.block(1, 0, n, 1) = off;
  W.block(0, 1, 1, n) = off.transpose();
  W.block(1, 1, n, n) = lambda * MatrixXd::Identity(n, n) - l.P + alpha * support.P2;
  return W;
}

ConicProgram BuildDiscreteWceProgram(const Quadratic& l, const DiscreteNominal& nom, double r) {
  RequireRadius(r);
  RequireValid(Validate(nom));
  const int n = nom.dim(), N = nom.count();
  if (l.dim() != n) throw std::invalid_argument("loss and nominal dimensions differ");
  const Ellipsoid& e = nom.support;

  ConicProgram p;
  const int lambda = p.AddVariable("lambda");
  const int alpha = p.AddVariables("alpha", N);
  const int gamma = p.AddVariables("gamma", N);
  p.AddObjective(lambda, r * r);
  for (int i = 0; i < N; ++i) p.AddObjective(gamma + i, nom.weights(i));

  // Each atom's block is Omega(lambda, zeta_i, alpha_i, -gamma_i) in
  // coordinates centred at zeta_i, i.e. T' Omega T with T = [[1, 0], [zeta_i, I]].
  // The congruence keeps the cone constraint and removes the
  // lambda |zeta_i|^2 cancellation in the corner when lambda is large.
  for (int i = 0; i < N; ++i) {
    const VectorXd zeta = nom.points.col(i);
    const int b = p.AddPsdBlock("atom" + std::to_string(i), n + 1);
    // Corner: gamma - l(zeta) + alpha s(zeta).
    p.AddPsdTerm(b, 0, 0, gamma + i, 1.0);
    p.AddPsdTerm(b, 0, 0, alpha + i, e.Evaluate(zeta));
    p.AddPsdConstant(b, 0, 0, -l(zeta));
    // Column: alpha (P2 zeta + q2) - (P zeta + q).
    AddBlockTerm(p, b, 1, 0, e.P2 * zeta + e.q2, alpha + i);
    AddBlockConstant(p, b, 1, 0, l.P * zeta + l.q, -1.0);
    // Lower-right: lambda I - P + alpha P2.
    AddIdentityTerm(p, b, 1, n, lambda);
    AddBlockConstant(p, b, 1, 1, l.P, -1.0);
    AddBlockTerm(p, b, 1, 1, e.P2, alpha + i);
  }
  const int nn = p.AddNonNegBlock("multipliers>=0", N + 1);
  p.AddVectorTerm(nn, 0, lambda, 1.0);
  for (int i = 0; i < N; ++i) p.AddVectorTerm(nn, i + 1, alpha + i, 1.0);
  return p;
}

WceSolution SolveDiscreteWce(const Quadratic& l, const DiscreteNominal& nom, double r,
                             const SolverSettings& s) {
  const ConicProgram p = BuildDiscreteWceProgram(l, nom, r);
  WceSolution sol;
  sol.report = Solve(p, s);
  if (!sol.report.ok()) return sol;
  const VectorXd& x = sol.report.x;
  const int N = nom.count();
  sol.value = sol.report.primal_value;
  sol.lambda = x(0);
  sol.alpha = x.segment(1, N);
  sol.gammas = x.segment(1 + N, N);
  return sol;
}

}  // namespace drro
