#include "drro/lmi.h"

#include <stdexcept>

namespace drro {

SymMatrixVar SymMatrixVar::Add(ConicProgram& p, const std::string& name, int n) {
  SymMatrixVar v;
  v.n = n;
  v.first = p.num_vars();
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      p.AddVariable(name + "(" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  return v;
}

int SymMatrixVar::index(int i, int j) const {
  if (i < j) std::swap(i, j);
  // Column j of the lower triangle starts after sum_{k<j} (n - k) entries.
  return first + j * n - j * (j - 1) / 2 + (i - j);
}

MatrixXd SymMatrixVar::Value(const VectorXd& x) const {
  MatrixXd X(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) X(i, j) = X(j, i) = x(index(i, j));
  }
  return X;
}

void SymMatrixVar::Place(ConicProgram& p, int block, int at) const {
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) p.AddPsdTerm(block, at + i, at + j, index(i, j), 1.0);
  }
}

void SymMatrixVar::AddTraceObjective(ConicProgram& p, double weight) const {
  for (int i = 0; i < n; ++i) p.AddObjective(index(i, i), weight);
}

namespace {

template <typename Fn>
void ForEachEntry(int r0, int c0, const MatrixXd& M, Fn fn) {
  if (r0 == c0) {
    if (M.rows() != M.cols()) throw std::invalid_argument("diagonal LMI block must be square");
    for (int j = 0; j < M.cols(); ++j) {
      for (int i = j; i < M.rows(); ++i) fn(r0 + i, c0 + j, M(i, j));
    }
    return;
  }
  if (r0 < c0 + M.cols()) throw std::invalid_argument("off-diagonal LMI block must be below");
  for (int j = 0; j < M.cols(); ++j) {
    for (int i = 0; i < M.rows(); ++i) fn(r0 + i, c0 + j, M(i, j));
  }
}

}  // namespace

void AddBlockTerm(ConicProgram& p, int block, int r0, int c0, const MatrixXd& M, int var,
                  double scale) {
  ForEachEntry(r0, c0, M, [&](int r, int c, double v) {
    if (v != 0.0) p.AddPsdTerm(block, r, c, var, scale * v);
  });
}

void AddBlockConstant(ConicProgram& p, int block, int r0, int c0, const MatrixXd& M,
                      double scale) {
  ForEachEntry(r0, c0, M, [&](int r, int c, double v) {
    if (v != 0.0) p.AddPsdConstant(block, r, c, scale * v);
  });
}

void AddIdentityTerm(ConicProgram& p, int block, int at, int n, int var, double scale) {
  for (int i = 0; i < n; ++i) p.AddPsdTerm(block, at + i, at + i, var, scale);
}

void AddIdentityConstant(ConicProgram& p, int block, int at, int n, double scale) {
  for (int i = 0; i < n; ++i) p.AddPsdConstant(block, at + i, at + i, scale);
}

}  // namespace drro
