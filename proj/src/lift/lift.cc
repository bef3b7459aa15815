#include "drro/lift.h"

#include <stdexcept>
#include <string>

namespace drro {
namespace {

void Require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void SystemDef::Validate() const {
  Require(T >= 1, "horizon must be at least 1");
  Require(A.rows() > 0 && A.rows() == A.cols(), "A must be square and nonempty");
  Require(B.rows() == A.rows() && B.cols() > 0, "B must have as many rows as A");
  Require(H.cols() == A.rows() && H.rows() > 0, "H must have as many columns as A");
  Require(A.allFinite() && B.allFinite() && H.allFinite(), "system matrices must be finite");
}

LiftedOperators BuildLifted(const SystemDef& sys) {
  sys.Validate();
  LiftedOperators l;
  l.T = sys.T;
  l.nx = sys.nx();
  l.nu = sys.nu();
  l.ny = sys.ny();
  l.Nx = (l.T + 1) * l.nx;
  l.Nu = l.T * l.nu;
  l.Ny = l.T * l.ny;

  // Powers A^0..A^T.
  std::vector<MatrixXd> pw(l.T + 1);
  pw[0] = MatrixXd::Identity(l.nx, l.nx);
  for (int k = 1; k <= l.T; ++k) pw[k] = sys.A * pw[k - 1];

  l.G = MatrixXd::Zero(l.Nx, l.Nx);
  l.F = MatrixXd::Zero(l.Nx, l.Nu);
  for (int t = 0; t <= l.T; ++t) {
    for (int j = 0; j <= t; ++j) l.G.block(t * l.nx, j * l.nx, l.nx, l.nx) = pw[t - j];
    for (int s = 0; s < t; ++s) l.F.block(t * l.nx, s * l.nu, l.nx, l.nu) = pw[t - 1 - s] * sys.B;
  }
  l.C = MatrixXd::Zero(l.Ny, l.Nx);
  for (int t = 0; t < l.T; ++t) l.C.block(t * l.ny, t * l.nx, l.ny, l.nx) = sys.H;
  l.CG = l.C * l.G;
  return l;
}

GainStructure StructureFactors(const SystemDef& sys) {
  sys.Validate();
  GainStructure gs;
  gs.T = sys.T;
  gs.nu = sys.nu();
  gs.ny = sys.ny();
  const int Nu = gs.T * gs.nu, Ny = gs.T * gs.ny;
  for (int i = 0; i < gs.T; ++i) {
    const int rows = (gs.T - i) * gs.nu;
    MatrixXd L = MatrixXd::Zero(Nu, rows);
    L.block(i * gs.nu, 0, rows, rows).setIdentity();
    MatrixXd R = MatrixXd::Zero(gs.ny, Ny);
    R.block(0, i * gs.ny, gs.ny, gs.ny).setIdentity();
    gs.L.push_back(std::move(L));
    gs.R.push_back(std::move(R));
  }
  return gs;
}

MatrixXd GainStructure::Assemble(const std::vector<MatrixXd>& blocks) const {
  if (static_cast<int>(blocks.size()) != T) throw std::invalid_argument("need one block per stage");
  MatrixXd K = MatrixXd::Zero(T * nu, T * ny);
  for (int i = 0; i < T; ++i) {
    if (blocks[i].rows() != L[i].cols() || blocks[i].cols() != ny) {
      throw std::invalid_argument("stage block has wrong shape");
    }
    K += L[i] * blocks[i] * R[i];
  }
  return K;
}

std::vector<MatrixXd> GainStructure::Extract(const MatrixXd& K) const {
  std::vector<MatrixXd> out;
  for (int i = 0; i < T; ++i) out.push_back(L[i].transpose() * K * R[i].transpose());
  return out;
}

double GainStructure::AcausalNorm(const MatrixXd& K) const {
  double worst = 0.0;
  for (int t = 0; t < T; ++t) {
    for (int s = t + 1; s < T; ++s) {
      worst = std::max(worst, K.block(t * nu, s * ny, nu, ny).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

MatrixXd GainStructure::Project(const MatrixXd& K) const {
  MatrixXd P = K;
  for (int t = 0; t < T; ++t) {
    for (int s = t + 1; s < T; ++s) P.block(t * nu, s * ny, nu, ny).setZero();
  }
  return P;
}

AffineController AffineController::Zero(const LiftedOperators& lift) {
  return {MatrixXd::Zero(lift.Nu, lift.Ny), VectorXd::Zero(lift.Nu)};
}

Trajectory Simulate(const LiftedOperators& lift, const AffineController& ctrl, const VectorXd& w,
                    const VectorXd& v) {
  Require(w.size() == lift.Nx && v.size() == lift.Ny, "Simulate: trajectory length mismatch");
  Require(ctrl.K.rows() == lift.Nu && ctrl.K.cols() == lift.Ny && ctrl.g.size() == lift.Nu,
          "Simulate: controller dimension mismatch");
  Trajectory tr;
  tr.eta = lift.CG * w + v;
  tr.u = ctrl.K * tr.eta + ctrl.g;
  tr.x = lift.F * tr.u + lift.G * w;
  tr.y = lift.C * tr.x + v;
  return tr;
}

Trajectory Simulate(const SystemDef& sys, const AffineController& ctrl, const VectorXd& w,
                    const VectorXd& v) {
  return Simulate(BuildLifted(sys), ctrl, w, v);
}

}  // namespace drro
