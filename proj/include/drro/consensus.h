#pragma once

#include "drro/elimination.h"
#include "drro/synthesis.h"

namespace drro {

// Agent i (1-based) of the consensus splitting of the eliminated program:
// minimise share(gamma, X) + (rho / 2) |(gamma, svec X) - anchor|^2 subject
// to its single stage LMI, where share is the objective divided by T + 1.
struct LocalProgram {
  ConicProgram program;
  int gamma = -1;
  SymMatrixVar X;
};
LocalProgram BuildLocalProgram(int agent, const EliminationData& data, const SynthesisProblem& prob,
                               double rho, const VectorXd& anchor);

// Consensus vector (gamma, svec X) and back.
VectorXd PackConsensus(double gamma, const MatrixXd& X);
void UnpackConsensus(const VectorXd& v, double& gamma, MatrixXd& X);

struct ConsensusResult {
  double gamma = 0.0;
  MatrixXd X;
  double value = 0.0;  // eliminated objective at the returned (feasible) point
  ConsensusTrace trace;
  std::vector<SolveReport> reports;  // last iteration's local solves
};

// Scaled-form ADMM over the T + 1 agents with residual balancing of rho.
// The returned point is the final average, shifted minimally along a
// direction that restores every stage LMI with the strictness margin.
ConsensusResult ConsensusSolve(const SynthesisProblem& prob, const EliminationData& data,
                               const ConsensusOptions& opts);

}  // namespace drro
