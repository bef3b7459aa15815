#include <chrono>
#include <cmath>

#include "drro/consensus.h"
#include "drro/elimination.h"
#include "drro/synthesis.h"

namespace drro {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

void RequireOk(Method m, const SolveReport& r, const char* what) {
  if (!r.ok()) {
    throw SynthesisError(m, std::string(what) + " returned " + ToString(r.status) +
                                (r.diagnostics.empty() ? "" : " (" + r.diagnostics + ")"));
  }
}

}  // namespace

SynthesisResult Synthesize(const SynthesisProblem& prob, const SynthesisOptions& opts) {
  prob.Validate();
  SynthesisResult res;
  res.method = opts.method;
  const Method m = opts.method;
  MatrixXd K;
  bool recover = true;

  switch (m) {
    case Method::kFull: {
      auto t0 = Clock::now();
      const FullProgram f = BuildFullProgram(prob);
      res.times.build = Seconds(t0);
      res.num_vars = f.program.num_vars();
      t0 = Clock::now();
      res.reports.push_back(Solve(f.program, prob.settings));
      res.times.solve = Seconds(t0);
      const SolveReport& r = res.reports.back();
      RequireOk(m, r, "synthesis program");
      res.value = r.primal_value;
      res.gamma = r.x(f.gamma);
      res.beta = r.x(f.beta);
      res.X = f.X.Value(r.x);
      K = f.K.Value(r.x);
      res.controller.g = r.x.segment(f.g, prob.lift.Nu);
      recover = false;
      break;
    }
    case Method::kReduced: {
      auto t0 = Clock::now();
      const ReducedProgram f = BuildReducedProgram(prob);
      res.times.build = Seconds(t0);
      res.num_vars = f.program.num_vars();
      t0 = Clock::now();
      res.reports.push_back(Solve(f.program, prob.settings));
      res.times.solve = Seconds(t0);
      const SolveReport& r = res.reports.back();
      RequireOk(m, r, "reduced program");
      res.value = r.primal_value;
      res.gamma = r.x(f.gamma);
      res.X = f.X.Value(r.x);
      K = f.K.Value(r.x);
      break;
    }
    case Method::kEliminated:
    case Method::kDistributed: {
      auto t0 = Clock::now();
      EliminationData data;
      try {
        data = BuildEliminationData(prob);
      } catch (const std::logic_error& e) {
        throw InvariantError(std::string(ToString(m)) + ": " + e.what());
      }
      if (m == Method::kEliminated) {
        const EliminatedProgram e = BuildEliminatedProgram(prob, data);
        res.times.build = Seconds(t0);
        res.num_vars = e.program.num_vars();
        t0 = Clock::now();
        res.reports.push_back(Solve(e.program, prob.settings));
        res.times.solve = Seconds(t0);
        const SolveReport& r = res.reports.back();
        RequireOk(m, r, "eliminated program");
        res.value = r.primal_value;
        res.gamma = r.x(e.gamma);
        res.X = e.X.Value(r.x);
      } else {
        res.times.build = Seconds(t0);
        res.num_vars = 1 + SvecLength(prob.dim());
        t0 = Clock::now();
        ConsensusResult c;
        try {
          c = ConsensusSolve(prob, data, opts.consensus);
        } catch (const std::runtime_error& e) {
          throw SynthesisError(m, e.what());
        }
        res.times.solve = Seconds(t0);
        res.value = c.value;
        res.gamma = c.gamma;
        res.X = c.X;
        res.reports = c.reports;
        res.consensus = c.trace;
      }
      t0 = Clock::now();
      try {
        Reconstruction rec = ReconstructGains(res.gamma, res.X, data, prob);
        K = rec.K;
        for (auto& r : rec.reports) res.reports.push_back(std::move(r));
      } catch (const std::runtime_error& e) {
        throw SynthesisError(m, e.what());
      }
      res.times.reconstruct = Seconds(t0);
      break;
    }
  }

  if (prob.structure.AcausalNorm(K) != 0.0) {
    throw InvariantError(std::string(ToString(m)) + ": gain is not causal");
  }
  res.controller.K = K;
  if (recover) {
    const AffineRecovery a = RecoverAffineTerm(K, res.gamma, prob);
    res.controller.g = a.g;
    res.beta = a.beta;
  }

  const MatrixXd Q = AssembleQ(res.gamma, res.X, K, prob);
  res.q_min_eig = MinEig(Q);
  if (res.q_min_eig < -1e-7 * (1.0 + Q.norm())) {
    throw InvariantError(std::string(ToString(m)) + ": Q(gamma, X, K) is not positive semidefinite");
  }
  const MatrixXd W = AssembleMeanLmi(res.beta, res.gamma, res.controller.g, K, prob);
  res.affine_min_eig = MinEig(W);
  if (res.affine_min_eig < -1e-7 * (1.0 + W.norm())) {
    throw InvariantError(std::string(ToString(m)) + ": mean LMI fails at the affine term");
  }

  if (opts.certify) {
    const WceSolution w =
        SolveMomentWce(RegretQuadratic(res.controller, prob), prob.nominal, prob.radius, prob.settings);
    RequireOk(m, w.report, "certificate program");
    res.certificate = w.value;
    res.reconstruction_gap = res.certificate - res.value;
  }
  return res;
}

}  // namespace drro
