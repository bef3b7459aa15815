#pragma once

#include <vector>

#include "drro/conic.h"
#include "drro/synthesis.h"

namespace drro {

// Orthonormal basis of ker(M). Singular values below tol * sigma_max count
// as zero; a negative tol selects max(rows, cols) * 64 * machine epsilon.
MatrixXd KernelBasis(const MatrixXd& M, double tol = -1.0);

// Gain-free reformulation: Q(gamma, X, K) = Q(gamma, X, 0) +
// sum_i (barL_i' K_i barR_i + transpose), with stage stacks K_i. Stages are
// 1-based here; barR[0] and barL[T + 1] are the zero maps.
struct EliminationData {
  int T = 0;
  int side = 0;
  std::vector<MatrixXd> barR;  // index 0..T, each ny x side
  std::vector<MatrixXd> barL;  // index 1..T+1 (entry 0 unused), rows (T-i+1) nu
  // B[i], i = 1..T+1: basis of ker barL_i intersected with ker barR_j, j < i.
  std::vector<MatrixXd> B;
  // N[i], i = 1..T: basis of the intersection of ker barR_j, j < i.
  std::vector<MatrixXd> N;
};

// Throws std::logic_error if a structural invariant fails numerically.
EliminationData BuildEliminationData(const SynthesisProblem& prob);

struct EliminatedProgram {
  ConicProgram program;
  int gamma = -1;
  SymMatrixVar X;
};
EliminatedProgram BuildEliminatedProgram(const SynthesisProblem& prob, const EliminationData& data);

// Finds Y with U' Y V + V' Y' U + P > 0, maximising the margin (with a mild
// penalty on |Y|). Throws std::runtime_error naming the failed solvability
// condition, or if the achieved margin is below `margin`.
struct ProjectionSolution {
  MatrixXd Y;
  double margin = 0.0;
  SolveReport report;
};
ProjectionSolution SolveProjectionLmi(const MatrixXd& U, const MatrixXd& V, const MatrixXd& P,
                                      double margin, const SolverSettings& s = {});

// Recovers a causal gain K with Q(gamma, X, K) > 0 from a feasible point of
// the eliminated program, stage by stage from the last.
struct Reconstruction {
  MatrixXd K;
  std::vector<SolveReport> reports;
};
Reconstruction ReconstructGains(double gamma, const MatrixXd& X, const EliminationData& data,
                                const SynthesisProblem& prob);

}  // namespace drro
