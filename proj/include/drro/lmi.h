#pragma once

// Helpers for writing block-structured LMIs into a ConicProgram.

#include "drro/conic.h"

namespace drro {

// Symmetric n x n matrix variable stored as its lower-triangular entries.
struct SymMatrixVar {
  int first = -1;
  int n = 0;

  static SymMatrixVar Add(ConicProgram& p, const std::string& name, int n);
  int index(int i, int j) const;
  MatrixXd Value(const VectorXd& x) const;
  // Adds the variable at diagonal offset `at` of a PSD block.
  void Place(ConicProgram& p, int block, int at) const;
  // Adds weight * trace(X) to the objective.
  void AddTraceObjective(ConicProgram& p, double weight) const;
};

// Adds var * scale * M with M's top-left corner at (r0, c0) of a PSD block.
// Blocks on the diagonal (r0 == c0) must be symmetric and only their lower
// triangle is read; off-diagonal blocks must lie strictly below the
// diagonal (r0 >= c0 + M.cols()).
void AddBlockTerm(ConicProgram& p, int block, int r0, int c0, const MatrixXd& M, int var,
                  double scale = 1.0);
void AddBlockConstant(ConicProgram& p, int block, int r0, int c0, const MatrixXd& M,
                      double scale = 1.0);
// var * scale * I on the diagonal, size n, starting at (at, at).
void AddIdentityTerm(ConicProgram& p, int block, int at, int n, int var, double scale = 1.0);
void AddIdentityConstant(ConicProgram& p, int block, int at, int n, double scale);

}  // namespace drro
