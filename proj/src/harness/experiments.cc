#include "drro/experiments.h"

#include <cmath>
#include <sstream>

#include "drro/report.h"

namespace drro {

using nlohmann::json;

namespace {

json Header(const ExperimentConfig& cfg, const char* command) {
  return {{"tool", kToolVersion}, {"command", command}, {"config", cfg.source}};
}

double NominalExpectedRegret(const SynthesisProblem& prob, const AffineController& ctrl) {
  return ExpectedRegretMoments(RegretMap(ctrl.K, prob.lift, prob.bench), ctrl.g, prob.nominal.mu,
                               prob.nominal.Sigma, prob.bench);
}

double RelDiff(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

json RunSynth(const ExperimentConfig& cfg) {
  const SynthesisProblem prob = ProblemFromConfig(cfg);
  SynthesisOptions opts;
  opts.method = cfg.method;
  opts.consensus = cfg.consensus;
  const SynthesisResult res = Synthesize(prob, opts);
  json out = Header(cfg, "synth");
  out.update(ResultToJson(res));
  out["evaluation"] = {{"nominal_expected_regret", NominalExpectedRegret(prob, res.controller)}};
  return out;
}

EvalSummary EvaluateController(const SynthesisProblem& prob, const AffineController& ctrl,
                               int samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("need at least 2 samples");
  const MatrixXd draws = SampleGaussian(prob.nominal, samples, seed);
  const int nx = prob.lift.Nx, ny = prob.lift.Ny;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double r = EvalRegret(ctrl, draws.col(k).head(nx), draws.col(k).tail(ny), prob.lift,
                                prob.bench);
    sum += r;
    sum2 += r * r;
  }
  EvalSummary s;
  s.mc_mean = sum / samples;
  const double var = std::max(0.0, (sum2 - samples * s.mc_mean * s.mc_mean) / (samples - 1));
  s.mc_stderr = std::sqrt(var / samples);
  s.closed_form = NominalExpectedRegret(prob, ctrl);
  s.within_3se = std::abs(s.mc_mean - s.closed_form) <= 3.0 * s.mc_stderr;
  return s;
}

json RunEval(const ExperimentConfig& cfg, const AffineController& ctrl, int samples,
             std::uint64_t seed) {
  const SynthesisProblem prob = ProblemFromConfig(cfg);
  const EvalSummary s = EvaluateController(prob, ctrl, samples, seed);
  json out = Header(cfg, "eval");
  out["evaluation"] = {{"samples", samples},
                       {"seed", seed},
                       {"monte_carlo_mean", s.mc_mean},
                       {"monte_carlo_stderr", s.mc_stderr},
                       {"nominal_expected_regret", s.closed_form},
                       {"within_3_stderr", s.within_3se}};
  if (!s.within_3se) {
    std::ostringstream os;
    os << "Monte-Carlo mean " << s.mc_mean << " differs from the closed form " << s.closed_form
       << " by more than 3 standard errors (" << s.mc_stderr << ")";
    throw CheckFailure(os.str(), out);
  }
  return out;
}

json RunCompare(const ExperimentConfig& cfg, int repeats) {
  if (repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  const SynthesisProblem prob = ProblemFromConfig(cfg);
  json rows = json::array();
  std::vector<double> values;
  bool deterministic = true;
  for (Method m : {Method::kFull, Method::kReduced, Method::kEliminated, Method::kDistributed}) {
    SynthesisOptions opts;
    opts.method = m;
    opts.consensus = cfg.consensus;
    json row = {{"method", ToString(m)}};
    try {
      StageTimes total;
      SynthesisResult first;
      for (int k = 0; k < repeats; ++k) {
        SynthesisResult r = Synthesize(prob, opts);
        total.build += r.times.build;
        total.solve += r.times.solve;
        total.reconstruct += r.times.reconstruct;
        if (k == 0) {
          first = std::move(r);
        } else if (r.value != first.value || r.controller.K != first.controller.K ||
                   r.controller.g != first.controller.g) {
          deterministic = false;
        }
      }
      values.push_back(first.value);
      row["value"] = first.value;
      row["certificate"] = first.certificate;
      row["reconstruction_gap"] = first.reconstruction_gap;
      row["num_vars"] = first.num_vars;
      row["mean_timings"] = {{"build", total.build / repeats},
                             {"solve", total.solve / repeats},
                             {"reconstruct", total.reconstruct / repeats}};
      if (first.consensus) row["consensus_iterations"] = first.consensus->iterations;
      row["status"] = "ok";
    } catch (const std::exception& e) {
      row["status"] = "failed";
      row["error"] = e.what();
    }
    rows.push_back(std::move(row));
  }
  double spread = 0.0;
  for (double a : values) {
    for (double b : values) spread = std::max(spread, RelDiff(a, b));
  }
  json out = Header(cfg, "compare");
  out["repeats"] = repeats;
  out["rows"] = rows;
  out["max_relative_difference"] = spread;
  out["agree"] = spread <= 1e-3;
  out["deterministic"] = deterministic;
  if (spread > 1e-3) {
    throw CheckFailure("method values disagree: max relative difference " + std::to_string(spread),
                       out);
  }
  if (!deterministic) throw CheckFailure("repeated runs produced different results", out);
  return out;
}

json RunWce(const ExperimentConfig& cfg) {
  Quadratic loss;
  if (cfg.loss) {
    loss = *cfg.loss;
  } else {
    if (!cfg.system || !cfg.is_moment()) {
      throw ConfigError({"$.loss: missing (required without a system and moment nominal)"});
    }
    const SynthesisProblem prob = ProblemFromConfig(cfg);
    loss = RegretQuadratic(AffineController::Zero(prob.lift), prob);
  }
  WceSolution w;
  json out = Header(cfg, "wce");
  try {
    if (cfg.is_moment()) {
      w = SolveMomentWce(loss, std::get<MomentNominal>(cfg.ball.nominal), cfg.ball.radius,
                         cfg.settings);
      out["duals"] = {{"gamma", w.gamma}, {"beta", w.beta}, {"X", ToJson(w.X)}};
    } else {
      w = SolveDiscreteWce(loss, std::get<DiscreteNominal>(cfg.ball.nominal), cfg.ball.radius,
                           cfg.settings);
      out["duals"] = {{"lambda", w.lambda}, {"alpha", ToJson(w.alpha)}, {"gamma", ToJson(w.gammas)}};
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError({std::string("$.loss: ") + e.what()});
  }
  out["solve"] = ToJson(w.report);
  if (!w.report.ok()) {
    throw SolverFailure(std::string("worst-case expectation solve returned ") +
                        ToString(w.report.status) + " " + w.report.diagnostics);
  }
  out["value"] = w.value;
  return out;
}

}  // namespace drro
