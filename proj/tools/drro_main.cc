#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "drro/config.h"
#include "drro/experiments.h"
#include "drro/report.h"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;
constexpr int kInvariantFailure = 4;

void Emit(const nlohmann::json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    drro::WriteJson(out, j);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally robust regret-optimal controller synthesis"};
  app.require_subcommand(1);
  std::string config, out, controller, method;
  int samples = 10000, repeats = 1;
  std::uint64_t seed = 0;
  double rho = -1.0, tol = -1.0;
  int max_iter = -1;

  auto* synth = app.add_subcommand("synth", "synthesise a controller");
  synth->add_option("--config", config, "experiment config (JSON)")->required();
  synth->add_option("--method", method, "full | reduced | eliminated | distributed");
  synth->add_option("--out", out, "report path (stdout if omitted)");
  synth->add_option("--rho", rho, "initial consensus penalty");
  synth->add_option("--consensus-tol", tol, "consensus residual tolerance");
  synth->add_option("--max-iter", max_iter, "consensus iteration cap");

  auto* eval = app.add_subcommand("eval", "Monte-Carlo evaluation of a controller");
  eval->add_option("--config", config, "experiment config (JSON)")->required();
  eval->add_option("--controller", controller, "report or controller file (JSON)")->required();
  eval->add_option("--samples", samples, "number of draws");
  eval->add_option("--seed", seed, "sampling seed");
  eval->add_option("--out", out, "report path (stdout if omitted)");

  auto* wce = app.add_subcommand("wce", "worst-case expectation over the ambiguity ball");
  wce->add_option("--config", config, "experiment config (JSON)")->required();
  wce->add_option("--out", out, "report path (stdout if omitted)");

  auto* compare = app.add_subcommand("compare", "run every method and compare");
  compare->add_option("--config", config, "experiment config (JSON)")->required();
  compare->add_option("--repeats", repeats, "runs per method");
  compare->add_option("--out", out, "report path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    drro::ExperimentConfig cfg = drro::LoadConfig(config);
    if (!method.empty()) {
      const auto m = drro::ParseMethod(method);
      if (!m) throw drro::ConfigError({"--method: unknown method \"" + method + "\""});
      cfg.method = *m;
    }
    if (rho >= 0) cfg.consensus.rho = rho;
    if (tol > 0) cfg.consensus.tol = tol;
    if (max_iter > 0) cfg.consensus.max_iter = max_iter;

    if (*synth) {
      Emit(drro::RunSynth(cfg), out);
    } else if (*eval) {
      if (!cfg.system) throw drro::ConfigError({"$.system: missing (required for eval)"});
      nlohmann::json doc;
      try {
        doc = drro::ReadJson(controller);
      } catch (const std::exception& e) {
        throw drro::ConfigError({controller + ": " + e.what()});
      }
      drro::AffineController ctrl;
      try {
        ctrl = drro::ControllerFromJson(doc, drro::BuildLifted(*cfg.system));
      } catch (const std::invalid_argument& e) {
        throw drro::ConfigError({controller + ": " + e.what()});
      }
      Emit(drro::RunEval(cfg, ctrl, samples, seed), out);
    } else if (*wce) {
      Emit(drro::RunWce(cfg), out);
    } else if (*compare) {
      Emit(drro::RunCompare(cfg, repeats), out);
    }
  } catch (const drro::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  } catch (const drro::CheckFailure& e) {
    Emit(e.report(), out);
    std::cerr << "check failed: " << e.what() << "\n";
    return kInvariantFailure;
  } catch (const drro::InvariantError& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return kInvariantFailure;
  } catch (const drro::SynthesisError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const drro::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kOk;
}
