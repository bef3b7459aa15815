#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drro/ambiguity.h"
#include "drro/conic.h"
#include "drro/lift.h"
#include "drro/lmi.h"
#include "drro/regret.h"
#include "drro/wc_duality.h"

namespace drro {

// Worst-case expected regret minimisation over causal affine controllers,
// with the disturbance/noise pair (w; v) drawn from a type-2 Wasserstein ball
// around a moment nominal of dimension Nx + Ny.
struct SynthesisProblem {
  LiftedOperators lift;
  GainStructure structure;
  CostWeights weights;
  Benchmark bench;
  MomentNominal nominal;
  double radius = 0.0;
  SolverSettings settings;

  static SynthesisProblem Make(const SystemDef& sys, const CostWeights& weights,
                               const MomentNominal& nominal, double radius,
                               const SolverSettings& settings = {});
  // Throws std::invalid_argument on any broken invariant.
  void Validate() const;

  int dim() const { return lift.Nx + lift.Ny; }
  // Side of Q(gamma, X, K): two copies of the (w; v) space plus the inputs.
  int q_side() const { return 2 * dim() + lift.Nu; }
  // Rough magnitude of the optimal value, used to scale strictness margins.
  double ObjectiveScale() const;
  double Epsilon() const { return settings.StrictEpsilon(ObjectiveScale()); }
};

// Q(gamma, X, K) with block rows [X; gamma Lambda, gamma I; 0, M(K), D^{-1}].
MatrixXd AssembleQ(double gamma, const MatrixXd& X, const MatrixXd& K, const SynthesisProblem& prob);

// [[beta, *, *], [gamma mu0, gamma I, *], [-g, M(K), D^{-1}]].
MatrixXd AssembleMeanLmi(double beta, double gamma, const VectorXd& g, const MatrixXd& K,
                         const SynthesisProblem& prob);

// The affine term and scalar that complete a gain: g = -M(K) mu0,
// beta = gamma |mu0|^2.
struct AffineRecovery {
  VectorXd g;
  double beta = 0.0;
};
AffineRecovery RecoverAffineTerm(const MatrixXd& K, double gamma, const SynthesisProblem& prob);

// Causal gain entries as program variables, one stage stack at a time.
struct GainVar {
  int first = -1;
  Eigen::MatrixXi index;  // Nu x Ny, -1 on structural zeros

  static GainVar Add(ConicProgram& p, const SynthesisProblem& prob);
  MatrixXd Value(const VectorXd& x) const;
  int count() const;
};

// Writes M(K) = [K CG - K_star | K] into a PSD block with its top-left corner
// at (r0, c0). A null gain writes M(0).
void AddRegretMap(ConicProgram& p, int block, int r0, int c0, const GainVar* K,
                  const SynthesisProblem& prob);
// Writes Q(gamma, X, K) into a PSD block whose full space is the Q space.
void AddQ(ConicProgram& p, int block, int gamma, const SymMatrixVar& X, const GainVar* K,
          const SynthesisProblem& prob);

struct FullProgram {
  ConicProgram program;
  int gamma = -1, beta = -1, g = -1;
  SymMatrixVar X;
  GainVar K;
};
FullProgram BuildFullProgram(const SynthesisProblem& prob);

struct ReducedProgram {
  ConicProgram program;
  int gamma = -1;
  SymMatrixVar X;
  GainVar K;
};
ReducedProgram BuildReducedProgram(const SynthesisProblem& prob);

// The regret of u = K eta + g as a quadratic in xi = (w; v):
// |M(K) xi + g|_D^2.
Quadratic RegretQuadratic(const AffineController& ctrl, const SynthesisProblem& prob);

enum class Method { kFull, kReduced, kEliminated, kDistributed };
const char* ToString(Method m);
std::optional<Method> ParseMethod(const std::string& s);

struct ConsensusOptions {
  double rho = 1.0;
  double tol = 1e-5;
  int max_iter = 500;
  bool adapt_rho = true;
};

struct ConsensusTrace {
  std::vector<double> primal_residual;
  std::vector<double> dual_residual;
  std::vector<double> rho;
  std::vector<double> objective;
  int iterations = 0;
  bool converged = false;
  double polish_shift = 0.0;
};

struct StageTimes {
  double build = 0.0;
  double solve = 0.0;
  double reconstruct = 0.0;
};

struct SynthesisResult {
  Method method = Method::kFull;
  AffineController controller;
  double gamma = 0.0;
  double beta = 0.0;
  MatrixXd X;
  double value = 0.0;        // optimal value of the method's program
  double certificate = 0.0;  // worst-case expected regret of the controller
  double reconstruction_gap = 0.0;  // certificate - value
  double q_min_eig = 0.0;
  double affine_min_eig = 0.0;  // mean LMI at the recovered (g, beta)
  int num_vars = 0;
  std::vector<SolveReport> reports;
  StageTimes times;
  std::optional<ConsensusTrace> consensus;
};

// Thrown when a method's solve or reconstruction fails; the message carries
// the method tag.
class SynthesisError : public std::runtime_error {
 public:
  SynthesisError(Method m, const std::string& what);
  Method method() const { return method_; }

 private:
  Method method_;
};

// Thrown when a computed result violates a checked invariant (for example a
// reconstructed gain that does not make Q(gamma, X, K) positive semidefinite).
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthesisOptions {
  Method method = Method::kFull;
  ConsensusOptions consensus;
  bool certify = true;
};

SynthesisResult Synthesize(const SynthesisProblem& prob, const SynthesisOptions& opts);

}  // namespace drro
