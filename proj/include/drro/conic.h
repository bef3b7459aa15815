#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace drro {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Packed symmetric vectorisation: lower triangle, column-major, off-diagonal
// entries scaled by sqrt(2) so that <svec(A), svec(B)> = trace(AB).
VectorXd SvecPack(const MatrixXd& S);
MatrixXd SvecUnpack(const VectorXd& v);
int SvecLength(int side);

// Smallest eigenvalue of a symmetric matrix (symmetrised first).
double MinEig(const MatrixXd& S);

enum class ConeKind { kNonNeg, kSecondOrder, kPsd };

// Coefficient of one variable in a symmetric matrix-valued affine map. The
// entry is mirrored: (row, col) and (col, row) both receive `value`.
struct PsdTerm {
  int var;
  int row;
  int col;
  double value;
};

struct ConeBlock {
  std::string name;
  ConeKind kind = ConeKind::kNonNeg;
  int size = 0;  // vector length, or side length for kPsd

  // kNonNeg / kSecondOrder: slack = offset + coeffs * x.
  std::vector<Eigen::Triplet<double>> coeffs;
  VectorXd offset;

  // kPsd: slack = basis' * (F0 + sum_j x_j F_j) * basis + shift * I, where
  // F0 and F_j live in a "full" space of side full_side. An empty basis means
  // the identity (full_side == size).
  int full_side = 0;
  MatrixXd basis;
  std::vector<PsdTerm> terms;      // var = -1 is unused here
  std::vector<PsdTerm> constants;  // var ignored
  double shift = 0.0;

  bool HasBasis() const { return basis.size() > 0; }
  int PackedSize() const { return kind == ConeKind::kPsd ? SvecLength(size) : size; }
};

// Standard-form conic program: minimise objective' x subject to every block's
// affine slack lying in its cone.
class ConicProgram {
 public:
  int AddVariable(const std::string& name);
  // Adds `count` variables named prefix[0..count); returns the first index.
  int AddVariables(const std::string& prefix, int count);
  int num_vars() const { return static_cast<int>(var_names_.size()); }
  const std::string& var_name(int i) const { return var_names_.at(i); }

  void AddObjective(int var, double coeff);
  const VectorXd& objective() const { return objective_; }

  int AddNonNegBlock(const std::string& name, int size);
  int AddSecondOrderBlock(const std::string& name, int size);
  int AddPsdBlock(const std::string& name, int side);
  // PSD block whose slack is the congruence basis' * M * basis of a matrix M
  // of side basis.rows().
  int AddPsdBlock(const std::string& name, const MatrixXd& basis);

  void AddVectorTerm(int block, int row, int var, double coeff);
  void AddVectorConstant(int block, int row, double value);
  // Symmetric entry (row, col) of the (full-space) PSD map; mirrored.
  void AddPsdTerm(int block, int row, int col, int var, double coeff);
  void AddPsdConstant(int block, int row, int col, double value);
  // Adds value * I to the slack after the congruence (strictness margins).
  void AddPsdShift(int block, double value);

  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const ConeBlock& block(int i) const { return blocks_.at(i); }
  const std::vector<ConeBlock>& blocks() const { return blocks_; }
  int FindBlock(const std::string& name) const;

  // Packed slack of one block at x (svec for PSD blocks).
  VectorXd PackedSlack(int block, const VectorXd& x) const;
  // Matrix slack of a PSD block at x.
  MatrixXd PsdSlack(int block, const VectorXd& x) const;
  // Smallest "eigenvalue" of a block's slack: min entry for kNonNeg,
  // x0 - |x1| for kSecondOrder, min eigenvalue for kPsd.
  double MinSlack(int block, const VectorXd& x) const;

  // Throws std::invalid_argument when an invariant is broken.
  void Validate() const;

 private:
  int AddBlock(ConeBlock b);
  ConeBlock& MutableBlock(int i);

  std::vector<std::string> var_names_;
  VectorXd objective_;
  std::vector<ConeBlock> blocks_;
};

struct SolverSettings {
  double feas_tol = 1e-8;
  double rel_gap_tol = 1e-8;
  int max_iterations = 10000;
  // Strict LMIs M > 0 are encoded as M - eps*I >= 0 with
  // eps = strict_margin * (1 + |objective scale estimate|).
  double strict_margin = 1e-7;
  bool verbose = false;

  void Validate() const;
  double StrictEpsilon(double objective_scale) const;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };
const char* ToString(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::kNumericalFailure;
  double primal_value = 0.0;
  double dual_value = 0.0;
  VectorXd x;
  std::vector<double> min_slack;  // per block, at x
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  double wall_time = 0.0;
  bool reduced_accuracy = false;
  std::string diagnostics;

  bool ok() const { return status == SolveStatus::kOptimal; }
};

// Backend interface. Implementations must be usable concurrently on
// distinct programs.
class ConicSolver {
 public:
  virtual ~ConicSolver() = default;
  virtual SolveReport Solve(const ConicProgram& p, const SolverSettings& s) const = 0;
};

// Primal-dual path-following method with Nesterov-Todd scaling and Mehrotra
// correction, dense Newton systems.
class InteriorPointSolver final : public ConicSolver {
 public:
  SolveReport Solve(const ConicProgram& p, const SolverSettings& s) const override;
};

// Solves with the default backend.
SolveReport Solve(const ConicProgram& p, const SolverSettings& s = {});

}  // namespace drro
