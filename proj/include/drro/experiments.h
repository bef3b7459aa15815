#pragma once

#include <cstdint>
#include <stdexcept>

#include <json.hpp>

#include "drro/config.h"
#include "drro/synthesis.h"

namespace drro {

// Raised by drivers whose built-in checks fail (cross-method disagreement,
// Monte-Carlo mismatch); maps to the invariant-failure exit code.
class CheckFailure : public std::runtime_error {
 public:
  CheckFailure(const std::string& what, nlohmann::json report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const nlohmann::json& report() const { return report_; }

 private:
  nlohmann::json report_;
};

// A solve outside synthesis (the worst-case expectation oracle) failed.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Synthesises with cfg.method and cfg.consensus; the report carries the
// result, the closed-form nominal expected regret of the controller, the
// config echo and the tool version.
nlohmann::json RunSynth(const ExperimentConfig& cfg);

struct EvalSummary {
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double closed_form = 0.0;
  bool within_3se = false;
};
// Monte-Carlo regret over draws from the nominal Gaussian N(mu0, Sigma0)
// against the closed-form nominal expectation.
EvalSummary EvaluateController(const SynthesisProblem& prob, const AffineController& ctrl,
                               int samples, std::uint64_t seed);
// Throws CheckFailure when the two estimates differ by more than 3 standard
// errors.
nlohmann::json RunEval(const ExperimentConfig& cfg, const AffineController& ctrl, int samples,
                       std::uint64_t seed);

// Runs every method `repeats` times. Rows of failed methods carry the error
// and the comparison continues; throws CheckFailure when the values that were
// obtained disagree by more than 1e-3 relative or a repeat is not identical.
nlohmann::json RunCompare(const ExperimentConfig& cfg, int repeats);

// Worst-case expectation of cfg.loss (or of the zero controller's regret)
// over the configured ball, for either nominal kind.
nlohmann::json RunWce(const ExperimentConfig& cfg);

}  // namespace drro
