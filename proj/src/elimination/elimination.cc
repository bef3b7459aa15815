#include "drro/elimination.h"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace drro {

MatrixXd KernelBasis(const MatrixXd& M, double tol) {
  const auto cols = M.cols();
  if (M.rows() == 0 || M.size() == 0) return MatrixXd::Identity(cols, cols);
  if (tol < 0) {
    tol = static_cast<double>(std::max(M.rows(), cols)) * 64.0 *
          std::numeric_limits<double>::epsilon();
  }
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullV);
  const VectorXd& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  if (smax == 0.0) return MatrixXd::Identity(cols, cols);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) >= tol * smax) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

namespace {

void Check(bool ok, const std::string& what) {
  if (!ok) throw std::logic_error("elimination data: " + what);
}

}  // namespace

EliminationData BuildEliminationData(const SynthesisProblem& prob) {
  const LiftedOperators& l = prob.lift;
  const GainStructure& gs = prob.structure;
  const int n = prob.dim();
  EliminationData d;
  d.T = l.T;
  d.side = prob.q_side();

  // [0 | CG I | 0] and [0 0 I] in the Q space.
  MatrixXd right = MatrixXd::Zero(l.Ny, d.side);
  right.block(0, n, l.Ny, l.Nx) = l.CG;
  right.block(0, n + l.Nx, l.Ny, l.Ny).setIdentity();
  MatrixXd left = MatrixXd::Zero(l.Nu, d.side);
  left.block(0, 2 * n, l.Nu, l.Nu).setIdentity();

  d.barR.assign(d.T + 1, MatrixXd());
  d.barL.assign(d.T + 2, MatrixXd());
  d.barR[0] = MatrixXd::Zero(0, d.side);
  for (int i = 1; i <= d.T; ++i) {
    d.barR[i] = gs.R[i - 1] * right;
    d.barL[i] = gs.L[i - 1].transpose() * left;
  }
  d.barL[d.T + 1] = MatrixXd::Zero(0, d.side);

  d.B.assign(d.T + 2, MatrixXd());
  d.N.assign(d.T + 1, MatrixXd());
  MatrixXd stacked(0, d.side);  // barR_1..barR_{i-1}
  for (int i = 1; i <= d.T + 1; ++i) {
    if (i <= d.T) d.N[i] = KernelBasis(stacked);
    MatrixXd all(stacked.rows() + d.barL[i].rows(), d.side);
    all << stacked, d.barL[i];
    d.B[i] = KernelBasis(all);
    if (i <= d.T) {
      MatrixXd grown(stacked.rows() + d.barR[i].rows(), d.side);
      grown << stacked, d.barR[i];
      stacked = grown;
    }
  }

  // Invariants.
  for (int i = 1; i <= d.T + 1; ++i) {
    const MatrixXd& B = d.B[i];
    Check((B.transpose() * B - MatrixXd::Identity(B.cols(), B.cols())).norm() <= 1e-10,
          "kernel basis is not orthonormal");
    Check((d.barL[i] * B).norm() <= 1e-9 * std::max(1.0, d.barL[i].norm()),
          "basis leaves the kernel of the left factor");
    for (int j = 1; j < i; ++j) {
      Check((d.barR[j] * B).norm() <= 1e-9 * std::max(1.0, d.barR[j].norm()),
            "basis leaves the kernel of a right factor");
    }
  }
  for (int j = 1; j < d.T; ++j) {
    const MatrixXd K = KernelBasis(d.barL[j]);
    Check((d.barL[j + 1] * K).norm() <= 1e-9, "left kernels are not nested");
  }
  return d;
}

EliminatedProgram BuildEliminatedProgram(const SynthesisProblem& prob, const EliminationData& data) {
  prob.Validate();
  EliminatedProgram e;
  ConicProgram& p = e.program;
  e.gamma = p.AddVariable("gamma");
  e.X = SymMatrixVar::Add(p, "X", prob.dim());
  p.AddObjective(e.gamma, prob.radius * prob.radius - prob.nominal.Sigma.trace());
  e.X.AddTraceObjective(p, 1.0);
  const double eps = prob.Epsilon();
  for (int i = 1; i <= data.T + 1; ++i) {
    const int b = p.AddPsdBlock("stage" + std::to_string(i), data.B[i]);
    AddQ(p, b, e.gamma, e.X, nullptr, prob);
    p.AddPsdShift(b, -eps);
  }
  const int nn = p.AddNonNegBlock("gamma>=0", 1);
  p.AddVectorTerm(nn, 0, e.gamma, 1.0);
  return e;
}

ProjectionSolution SolveProjectionLmi(const MatrixXd& U, const MatrixXd& V, const MatrixXd& P,
                                      double margin, const SolverSettings& s) {
  const int m = static_cast<int>(P.rows());
  if (P.cols() != m || U.cols() != m || V.cols() != m) {
    throw std::invalid_argument("projection LMI: dimension mismatch");
  }
  const MatrixXd Ps = 0.5 * (P + P.transpose());
  const MatrixXd Uperp = KernelBasis(U), Vperp = KernelBasis(V);
  if (Uperp.cols() > 0 && !(MinEig(Uperp.transpose() * Ps * Uperp) > 0)) {
    throw std::runtime_error("projection LMI: P is not positive on the kernel of U");
  }
  if (Vperp.cols() > 0 && !(MinEig(Vperp.transpose() * Ps * Vperp) > 0)) {
    throw std::runtime_error("projection LMI: P is not positive on the kernel of V");
  }

  const int rows = static_cast<int>(U.rows()), cols = static_cast<int>(V.rows());
  const double pnorm = std::max(1.0, Ps.norm());
  const double cap = 1e-2 * pnorm;
  const double penalty = 1e-4;

  ConicProgram p;
  const int t = p.AddVariable("t");
  const int c = p.AddVariable("c");
  const int y = p.AddVariables("Y", rows * cols);
  p.AddObjective(t, -1.0);
  p.AddObjective(c, penalty);

  // U' Y V + V' Y' U + P - t I >= 0; entry Y(a, b) contributes
  // U(a,:)' V(b,:) + transpose.
  const int lmi = p.AddPsdBlock("lmi", m);
  AddBlockConstant(p, lmi, 0, 0, Ps);
  AddIdentityTerm(p, lmi, 0, m, t, -1.0);
  for (int b = 0; b < cols; ++b) {
    for (int a = 0; a < rows; ++a) {
      const MatrixXd outer = U.row(a).transpose() * V.row(b);
      AddBlockTerm(p, lmi, 0, 0, outer + outer.transpose(), y + b * rows + a);
    }
  }
  // |Y| <= c.
  const int nb = p.AddPsdBlock("norm", rows + cols);
  AddIdentityTerm(p, nb, 0, rows + cols, c);
  for (int b = 0; b < cols; ++b) {
    for (int a = 0; a < rows; ++a) p.AddPsdTerm(nb, rows + b, a, y + b * rows + a, 1.0);
  }
  const int cb = p.AddNonNegBlock("cap", 1);
  p.AddVectorConstant(cb, 0, cap);
  p.AddVectorTerm(cb, 0, t, -1.0);

  ProjectionSolution sol;
  sol.report = Solve(p, s);
  if (!sol.report.ok()) {
    throw std::runtime_error(std::string("projection LMI solve failed: ") +
                             ToString(sol.report.status) + " " + sol.report.diagnostics);
  }
  sol.Y = Eigen::Map<const MatrixXd>(sol.report.x.data() + y, rows, cols);
  const MatrixXd S = U.transpose() * sol.Y * V;
  sol.margin = MinEig(S + S.transpose() + Ps);
  if (!(sol.margin >= margin)) {
    std::ostringstream os;
    os << "projection LMI margin " << sol.margin << " below required " << margin;
    throw std::runtime_error(os.str());
  }
  return sol;
}

Reconstruction ReconstructGains(double gamma, const MatrixXd& X, const EliminationData& data,
                                const SynthesisProblem& prob) {
  const GainStructure& gs = prob.structure;
  const MatrixXd Q0 = AssembleQ(gamma, X, MatrixXd::Zero(prob.lift.Nu, prob.lift.Ny), prob);
  Reconstruction rec;
  std::vector<MatrixXd> stages(gs.T);
  MatrixXd acc = Q0;  // Q0 plus the contributions of stages already fixed
  // The stage LMIs are active at eps, so the achievable margin is about eps.
  const double margin = 0.5 * prob.Epsilon();
  for (int i = data.T; i >= 1; --i) {
    const MatrixXd& N = data.N[i];
    const MatrixXd P = N.transpose() * acc * N;
    ProjectionSolution sol;
    try {
      sol = SolveProjectionLmi(data.barL[i] * N, data.barR[i] * N, P, margin, prob.settings);
    } catch (const std::exception& e) {
      throw std::runtime_error("gain reconstruction at stage " + std::to_string(i) + ": " + e.what());
    }
    rec.reports.push_back(sol.report);
    stages[i - 1] = sol.Y;
    const MatrixXd S = data.barL[i].transpose() * sol.Y * data.barR[i];
    acc += S + S.transpose();
  }
  rec.K = gs.Assemble(stages);
  return rec;
}

}  // namespace drro
