#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "drro/ambiguity.h"
#include "drro/conic.h"
#include "drro/lift.h"
#include "drro/regret.h"
#include "drro/synthesis.h"
#include "drro/wc_duality.h"

namespace drro {

// Schema violations, each prefixed with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct ExperimentConfig {
  std::optional<SystemDef> system;
  // Expanded to lifted sizes; empty until a system is present.
  CostWeights weights;
  AmbiguityBall ball;
  // Explicit loss for the worst-case expectation oracle; when absent the
  // oracle uses the regret of the zero controller.
  std::optional<Quadratic> loss;
  SolverSettings settings;
  Method method = Method::kFull;
  ConsensusOptions consensus;
  std::uint64_t seed = 0;
  nlohmann::json source;  // the parsed document, echoed in reports

  bool is_moment() const { return std::holds_alternative<MomentNominal>(ball.nominal); }
};

// Throws ConfigError listing every violation found.
ExperimentConfig ParseConfig(const nlohmann::json& doc);
ExperimentConfig LoadConfig(const std::string& path);

// Synthesis problem for a config with a system and a moment nominal; throws
// ConfigError otherwise.
SynthesisProblem ProblemFromConfig(const ExperimentConfig& cfg);

}  // namespace drro
