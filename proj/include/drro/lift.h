#pragma once

#include <vector>

#include <Eigen/Dense>

namespace drro {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// x_{t+1} = A x_t + B u_t + w_t,  y_t = H x_t + v_t,  t = 0..T-1.
struct SystemDef {
  MatrixXd A;
  MatrixXd B;
  MatrixXd H;
  int T = 1;

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
  int ny() const { return static_cast<int>(H.rows()); }
  // Throws std::invalid_argument on inconsistent dimensions or T < 1.
  void Validate() const;
};

// Trajectory maps x = F u + G w, y = C x + v with w = (x_0, w_0, ..., w_{T-1}),
// x = (x_0, ..., x_T), u = (u_0, ..., u_{T-1}), y = (y_0, ..., y_{T-1}).
struct LiftedOperators {
  int T = 0, nx = 0, nu = 0, ny = 0;
  int Nx = 0, Nu = 0, Ny = 0;
  MatrixXd F;   // Nx x Nu
  MatrixXd G;   // Nx x Nx
  MatrixXd C;   // Ny x Nx
  MatrixXd CG;  // Ny x Nx
};

LiftedOperators BuildLifted(const SystemDef& sys);

// Causal gain K (block lower triangular, blocks nu x ny) written as
// K = sum_i L_i K_i R_i, where K_i is the column-block stack of K for stage i
// from its diagonal block downwards. Stages are indexed 0..T-1 here.
struct GainStructure {
  int T = 0, nu = 0, ny = 0;
  std::vector<MatrixXd> L;  // Nu x (T-i) nu
  std::vector<MatrixXd> R;  // ny x Ny

  MatrixXd Assemble(const std::vector<MatrixXd>& blocks) const;
  std::vector<MatrixXd> Extract(const MatrixXd& K) const;
  // Largest magnitude among the entries that must vanish in a causal gain.
  double AcausalNorm(const MatrixXd& K) const;
  // Zeroes the acausal entries.
  MatrixXd Project(const MatrixXd& K) const;
};

GainStructure StructureFactors(const SystemDef& sys);

// u = K eta + g with the purified output eta = y - C F u.
struct AffineController {
  MatrixXd K;  // Nu x Ny
  VectorXd g;  // Nu

  static AffineController Zero(const LiftedOperators& lift);
};

struct Trajectory {
  VectorXd x;
  VectorXd u;
  VectorXd y;
  VectorXd eta;
};

// Closed-loop trajectory from the lifted closed forms.
Trajectory Simulate(const LiftedOperators& lift, const AffineController& ctrl, const VectorXd& w,
                    const VectorXd& v);
Trajectory Simulate(const SystemDef& sys, const AffineController& ctrl, const VectorXd& w,
                    const VectorXd& v);

}  // namespace drro
