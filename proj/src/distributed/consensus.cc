#include "drro/consensus.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace drro {

VectorXd PackConsensus(double gamma, const MatrixXd& X) {
  VectorXd v(1 + SvecLength(static_cast<int>(X.rows())));
  v(0) = gamma;
  v.tail(v.size() - 1) = SvecPack(X);
  return v;
}

void UnpackConsensus(const VectorXd& v, double& gamma, MatrixXd& X) {
  gamma = v(0);
  X = SvecUnpack(v.tail(v.size() - 1));
}

namespace {

double LocalShare(double gamma, const MatrixXd& X, const SynthesisProblem& prob) {
  return gamma * (prob.radius * prob.radius - prob.nominal.Sigma.trace()) + X.trace();
}

// Smallest eigenvalue over all stage LMIs at (gamma, X).
double StageMinEig(double gamma, const MatrixXd& X, const EliminationData& data,
                   const SynthesisProblem& prob) {
  const MatrixXd Q0 = AssembleQ(gamma, X, MatrixXd::Zero(prob.lift.Nu, prob.lift.Ny), prob);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= data.T + 1; ++i) {
    if (data.B[i].cols() == 0) continue;
    worst = std::min(worst, MinEig(data.B[i].transpose() * Q0 * data.B[i]));
  }
  return gamma < 0 ? std::min(worst, gamma) : worst;
}

}  // namespace

LocalProgram BuildLocalProgram(int agent, const EliminationData& data, const SynthesisProblem& prob,
                               double rho, const VectorXd& anchor) {
  if (agent < 1 || agent > data.T + 1) throw std::out_of_range("agent index out of range");
  const int n = prob.dim();
  const int len = 1 + SvecLength(n);
  if (anchor.size() != len) throw std::invalid_argument("anchor has the wrong length");
  const double share = 1.0 / (data.T + 1);

  LocalProgram lp;
  ConicProgram& p = lp.program;
  lp.gamma = p.AddVariable("gamma");
  lp.X = SymMatrixVar::Add(p, "X", n);
  p.AddObjective(lp.gamma, share * (prob.radius * prob.radius - prob.nominal.Sigma.trace()));
  lp.X.AddTraceObjective(p, share);

  const int b = p.AddPsdBlock("stage" + std::to_string(agent), data.B[agent]);
  AddQ(p, b, lp.gamma, lp.X, nullptr, prob);
  p.AddPsdShift(b, -prob.Epsilon());
  const int nn = p.AddNonNegBlock("gamma>=0", 1);
  p.AddVectorTerm(nn, 0, lp.gamma, 1.0);

  if (rho > 0) {
    // s >= |v - anchor|^2 as (s + 1, s - 1, 2 (v - anchor)) in the
    // second-order cone.
    const int s = p.AddVariable("prox");
    p.AddObjective(s, 0.5 * rho);
    const int q = p.AddSecondOrderBlock("prox", 2 + len);
    p.AddVectorTerm(q, 0, s, 1.0);
    p.AddVectorConstant(q, 0, 1.0);
    p.AddVectorTerm(q, 1, s, 1.0);
    p.AddVectorConstant(q, 1, -1.0);
    p.AddVectorTerm(q, 2, lp.gamma, 2.0);
    p.AddVectorConstant(q, 2, -2.0 * anchor(0));
    int k = 1;
    for (int j = 0; j < n; ++j) {
      for (int i = j; i < n; ++i, ++k) {
        const double w = i == j ? 1.0 : M_SQRT2;
        p.AddVectorTerm(q, 2 + k, lp.X.index(i, j), 2.0 * w);
        p.AddVectorConstant(q, 2 + k, -2.0 * anchor(k));
      }
    }
  }
  return lp;
}

ConsensusResult ConsensusSolve(const SynthesisProblem& prob, const EliminationData& data,
                               const ConsensusOptions& opts) {
  if (!(opts.rho >= 0) || !(opts.tol > 0) || opts.max_iter < 1) {
    throw std::invalid_argument("consensus options must be positive");
  }
  const int agents = data.T + 1;
  const int len = 1 + SvecLength(prob.dim());
  const double mu = 10.0, tau = 2.0;

  std::vector<VectorXd> v(agents, VectorXd::Zero(len)), u(agents, VectorXd::Zero(len));
  VectorXd avg = VectorXd::Zero(len);
  double rho = opts.rho;
  ConsensusResult res;
  std::vector<SolveReport> reports(agents);

  for (int k = 0; k < opts.max_iter; ++k) {
    double obj = 0.0;
    for (int i = 0; i < agents; ++i) {
      const LocalProgram lp = BuildLocalProgram(i + 1, data, prob, rho, avg - u[i]);
      reports[i] = Solve(lp.program, prob.settings);
      if (!reports[i].ok()) {
        throw std::runtime_error("local solve of agent " + std::to_string(i + 1) + " failed: " +
                                 ToString(reports[i].status) + " " + reports[i].diagnostics);
      }
      const double g = reports[i].x(lp.gamma);
      const MatrixXd X = lp.X.Value(reports[i].x);
      v[i] = PackConsensus(g, X);
      obj += LocalShare(g, X, prob) / agents;
    }
    const VectorXd prev = avg;
    avg.setZero();
    for (int i = 0; i < agents; ++i) avg += v[i] + u[i];
    avg /= agents;
    double rmax = 0.0;
    for (int i = 0; i < agents; ++i) {
      u[i] += v[i] - avg;
      rmax = std::max(rmax, (v[i] - avg).norm());
    }
    const double scale = 1.0 + avg.norm();
    const double primal = rmax / scale;
    const double dual = rho * (avg - prev).norm() / scale;
    res.trace.primal_residual.push_back(primal);
    res.trace.dual_residual.push_back(dual);
    res.trace.rho.push_back(rho);
    res.trace.objective.push_back(obj);
    res.trace.iterations = k + 1;
    if (primal <= opts.tol && dual <= opts.tol) {
      res.trace.converged = true;
      break;
    }
    if (opts.adapt_rho && rho > 0) {
      if (primal > mu * dual) {
        rho *= tau;
        for (auto& ui : u) ui /= tau;
      } else if (dual > mu * primal) {
        rho /= tau;
        for (auto& ui : u) ui *= tau;
      }
    }
  }
  res.reports = reports;

  // Restore strict feasibility of the average: moving (gamma, X) along
  // (1, 2 (|Lambda|^2 + 1) I) adds a PSD term to every stage LMI.
  double gamma;
  MatrixXd X;
  UnpackConsensus(avg, gamma, X);
  const double eps = prob.Epsilon();
  const int n = prob.dim();
  const double lam2 = prob.nominal.Lambda.squaredNorm();
  auto feasible = [&](double t) {
    return StageMinEig(gamma + t, X + 2.0 * t * (lam2 + 1.0) * MatrixXd::Identity(n, n), data,
                       prob) >= eps;
  };
  double shift = 0.0;
  if (!feasible(0.0)) {
    double hi = std::max(1e-12, eps);
    int guard = 0;
    while (!feasible(hi)) {
      hi *= 2.0;
      if (++guard > 200) throw std::runtime_error("consensus average cannot be made feasible");
    }
    double lo = 0.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? hi : lo) = mid;
    }
    shift = hi;
  }
  res.trace.polish_shift = shift;
  res.gamma = gamma + shift;
  res.X = X + 2.0 * shift * (lam2 + 1.0) * MatrixXd::Identity(n, n);
  res.value = LocalShare(res.gamma, res.X, prob);
  return res;
}

}  // namespace drro
