#include "drro/synthesis.h"

#include <cmath>
#include <stdexcept>

namespace drro {

SynthesisProblem SynthesisProblem::Make(const SystemDef& sys, const CostWeights& weights,
                                        const MomentNominal& nominal, double radius,
                                        const SolverSettings& settings) {
  SynthesisProblem p;
  p.lift = BuildLifted(sys);
  p.structure = StructureFactors(sys);
  p.weights = weights;
  p.bench = BuildBenchmark(p.lift, weights);
  p.nominal = nominal;
  p.radius = radius;
  p.settings = settings;
  p.Validate();
  return p;
}

void SynthesisProblem::Validate() const {
  settings.Validate();
  weights.Validate(lift);
  if (nominal.dim() != dim()) {
    throw std::invalid_argument("nominal dimension must equal Nx + Ny");
  }
  const auto violations = drro::Validate(AmbiguityBall{nominal, radius});
  if (!violations.empty()) throw std::invalid_argument(violations.front());
}

double SynthesisProblem::ObjectiveScale() const {
  // Upper bound on the worst-case expected regret of the zero controller:
  // E[xi' P xi]^(1/2) is a norm on the ball, so the nominal value plus
  // sqrt(lambda_max(P)) * radius bounds its square root.
  const MatrixXd M = RegretMap(MatrixXd::Zero(lift.Nu, lift.Ny), lift, bench);
  const MatrixXd P = M.transpose() * bench.D * M;
  const MatrixXd M2 = nominal.Sigma + nominal.mu * nominal.mu.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(P, Eigen::EigenvaluesOnly);
  const double lmax = std::max(0.0, es.eigenvalues()(P.rows() - 1));
  const double root = std::sqrt(std::max(0.0, (P * M2).trace())) + std::sqrt(lmax) * radius;
  return root * root;
}

MatrixXd AssembleQ(double gamma, const MatrixXd& X, const MatrixXd& K,
                   const SynthesisProblem& prob) {
  const int n = prob.dim(), nu = prob.lift.Nu;
  if (X.rows() != n || X.cols() != n || K.rows() != nu || K.cols() != prob.lift.Ny) {
    throw std::invalid_argument("AssembleQ: dimension mismatch");
  }
  MatrixXd Q = MatrixXd::Zero(prob.q_side(), prob.q_side());
  Q.block(0, 0, n, n) = 0.5 * (X + X.transpose());
  Q.block(n, 0, n, n) = gamma * prob.nominal.Lambda;
  Q.block(n, n, n, n) = gamma * MatrixXd::Identity(n, n);
  Q.block(2 * n, n, nu, n) = RegretMap(K, prob.lift, prob.bench);
  Q.block(2 * n, 2 * n, nu, nu) = prob.bench.D_inv;
  return Q.selfadjointView<Eigen::Lower>();
}

MatrixXd AssembleMeanLmi(double beta, double gamma, const VectorXd& g, const MatrixXd& K,
                         const SynthesisProblem& prob) {
  const int n = prob.dim(), nu = prob.lift.Nu;
  MatrixXd W = MatrixXd::Zero(1 + n + nu, 1 + n + nu);
  W(0, 0) = beta;
  W.block(1, 0, n, 1) = gamma * prob.nominal.mu;
  W.block(1, 1, n, n) = gamma * MatrixXd::Identity(n, n);
  W.block(1 + n, 0, nu, 1) = -g;
  W.block(1 + n, 1, nu, n) = RegretMap(K, prob.lift, prob.bench);
  W.block(1 + n, 1 + n, nu, nu) = prob.bench.D_inv;
  return W.selfadjointView<Eigen::Lower>();
}

AffineRecovery RecoverAffineTerm(const MatrixXd& K, double gamma, const SynthesisProblem& prob) {
  AffineRecovery a;
  a.g = -RegretMap(K, prob.lift, prob.bench) * prob.nominal.mu;
  a.beta = gamma * prob.nominal.mu.squaredNorm();
  return a;
}

GainVar GainVar::Add(ConicProgram& p, const SynthesisProblem& prob) {
  const GainStructure& gs = prob.structure;
  GainVar k;
  k.first = p.num_vars();
  k.index = Eigen::MatrixXi::Constant(prob.lift.Nu, prob.lift.Ny, -1);
  for (int i = 0; i < gs.T; ++i) {
    // Stage stack: rows from stage i downwards, columns of output stage i.
    for (int c = 0; c < gs.ny; ++c) {
      for (int r = i * gs.nu; r < gs.T * gs.nu; ++r) {
        k.index(r, i * gs.ny + c) = p.AddVariable(
            "K" + std::to_string(i) + "(" + std::to_string(r - i * gs.nu) + "," + std::to_string(c) + ")");
      }
    }
  }
  return k;
}

MatrixXd GainVar::Value(const VectorXd& x) const {
  MatrixXd K = MatrixXd::Zero(index.rows(), index.cols());
  for (int j = 0; j < index.cols(); ++j) {
    for (int i = 0; i < index.rows(); ++i) {
      if (index(i, j) >= 0) K(i, j) = x(index(i, j));
    }
  }
  return K;
}

int GainVar::count() const { return static_cast<int>((index.array() >= 0).count()); }

void AddRegretMap(ConicProgram& p, int block, int r0, int c0, const GainVar* K,
                  const SynthesisProblem& prob) {
  const LiftedOperators& l = prob.lift;
  AddBlockConstant(p, block, r0, c0, -prob.bench.K_star);
  if (K == nullptr) return;
  for (int c = 0; c < l.Ny; ++c) {
    for (int a = 0; a < l.Nu; ++a) {
      const int var = K->index(a, c);
      if (var < 0) continue;
      for (int b = 0; b < l.Nx; ++b) {
        if (l.CG(c, b) != 0.0) p.AddPsdTerm(block, r0 + a, c0 + b, var, l.CG(c, b));
      }
      p.AddPsdTerm(block, r0 + a, c0 + l.Nx + c, var, 1.0);
    }
  }
}

void AddQ(ConicProgram& p, int block, int gamma, const SymMatrixVar& X, const GainVar* K,
          const SynthesisProblem& prob) {
  const int n = prob.dim();
  X.Place(p, block, 0);
  AddBlockTerm(p, block, n, 0, prob.nominal.Lambda, gamma);
  AddIdentityTerm(p, block, n, n, gamma);
  AddRegretMap(p, block, 2 * n, n, K, prob);
  AddBlockConstant(p, block, 2 * n, 2 * n, prob.bench.D_inv);
}

namespace {

// [[gamma I, *], [M(K), D^{-1}]] - eps I >= 0.
void AddStrictRegretBlock(ConicProgram& p, int gamma, const GainVar& K, const SynthesisProblem& prob) {
  const int n = prob.dim();
  const int b = p.AddPsdBlock("regret-strict", n + prob.lift.Nu);
  AddIdentityTerm(p, b, 0, n, gamma);
  AddRegretMap(p, b, n, 0, &K, prob);
  AddBlockConstant(p, b, n, n, prob.bench.D_inv);
  p.AddPsdShift(b, -prob.Epsilon());
}

}  // namespace

FullProgram BuildFullProgram(const SynthesisProblem& prob) {
  prob.Validate();
  const int n = prob.dim(), nu = prob.lift.Nu;
  const double m2 = prob.nominal.Sigma.trace() + prob.nominal.mu.squaredNorm();
  FullProgram f;
  ConicProgram& p = f.program;
  f.gamma = p.AddVariable("gamma");
  f.beta = p.AddVariable("beta");
  f.X = SymMatrixVar::Add(p, "X", n);
  f.g = p.AddVariables("g", nu);
  f.K = GainVar::Add(p, prob);
  p.AddObjective(f.gamma, prob.radius * prob.radius - m2);
  p.AddObjective(f.beta, 1.0);
  f.X.AddTraceObjective(p, 1.0);

  AddStrictRegretBlock(p, f.gamma, f.K, prob);
  const int q = p.AddPsdBlock("covariance", prob.q_side());
  AddQ(p, q, f.gamma, f.X, &f.K, prob);

  // [[beta, *, *], [gamma mu0, gamma I, *], [-g, M(K), D^{-1}]] >= 0.
  const int m = p.AddPsdBlock("mean", 1 + n + nu);
  p.AddPsdTerm(m, 0, 0, f.beta, 1.0);
  AddBlockTerm(p, m, 1, 0, prob.nominal.mu, f.gamma);
  AddIdentityTerm(p, m, 1, n, f.gamma);
  for (int a = 0; a < nu; ++a) p.AddPsdTerm(m, 1 + n + a, 0, f.g + a, -1.0);
  AddRegretMap(p, m, 1 + n, 1, &f.K, prob);
  AddBlockConstant(p, m, 1 + n, 1 + n, prob.bench.D_inv);

  const int nn = p.AddNonNegBlock("gamma>=0", 1);
  p.AddVectorTerm(nn, 0, f.gamma, 1.0);
  return f;
}

ReducedProgram BuildReducedProgram(const SynthesisProblem& prob) {
  prob.Validate();
  const int n = prob.dim();
  ReducedProgram r;
  ConicProgram& p = r.program;
  r.gamma = p.AddVariable("gamma");
  r.X = SymMatrixVar::Add(p, "X", n);
  r.K = GainVar::Add(p, prob);
  p.AddObjective(r.gamma, prob.radius * prob.radius - prob.nominal.Sigma.trace());
  r.X.AddTraceObjective(p, 1.0);

  AddStrictRegretBlock(p, r.gamma, r.K, prob);
  const int q = p.AddPsdBlock("covariance", prob.q_side());
  AddQ(p, q, r.gamma, r.X, &r.K, prob);
  const int nn = p.AddNonNegBlock("gamma>=0", 1);
  p.AddVectorTerm(nn, 0, r.gamma, 1.0);
  return r;
}

Quadratic RegretQuadratic(const AffineController& ctrl, const SynthesisProblem& prob) {
  const MatrixXd M = RegretMap(ctrl.K, prob.lift, prob.bench);
  const MatrixXd DM = prob.bench.D * M;
  return Quadratic(M.transpose() * DM, DM.transpose() * ctrl.g, ctrl.g.dot(prob.bench.D * ctrl.g));
}

const char* ToString(Method m) {
  switch (m) {
    case Method::kFull:
      return "full";
    case Method::kReduced:
      return "reduced";
    case Method::kEliminated:
      return "eliminated";
    case Method::kDistributed:
      return "distributed";
  }
  return "unknown";
}

std::optional<Method> ParseMethod(const std::string& s) {
  for (Method m : {Method::kFull, Method::kReduced, Method::kEliminated, Method::kDistributed}) {
    if (s == ToString(m)) return m;
  }
  return std::nullopt;
}

SynthesisError::SynthesisError(Method m, const std::string& what)
    : std::runtime_error(std::string(ToString(m)) + ": " + what), method_(m) {}

}  // namespace drro
