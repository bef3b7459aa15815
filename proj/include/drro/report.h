#pragma once

#include <string>

#include <json.hpp>

#include "drro/conic.h"
#include "drro/lift.h"
#include "drro/synthesis.h"

namespace drro {

inline constexpr const char* kToolVersion = "drro 1.0.0";

// Row-major nested arrays; doubles are written in shortest round-trip form.
nlohmann::json ToJson(const MatrixXd& M);
nlohmann::json ToJson(const VectorXd& v);
nlohmann::json ToJson(const SolveReport& r);
nlohmann::json ToJson(const ConsensusTrace& t);

// Throws std::invalid_argument on non-rectangular or non-numeric input.
MatrixXd MatrixFromJson(const nlohmann::json& j);
VectorXd VectorFromJson(const nlohmann::json& j);

// Reads {"K": ..., "g": ...}, either at the top level or under "controller",
// and checks the sizes against the lifted system.
AffineController ControllerFromJson(const nlohmann::json& j, const LiftedOperators& lift);

// Deterministic part of a synthesis result; timings go under "timings" so
// that reports differ across repeated runs only there.
nlohmann::json ResultToJson(const SynthesisResult& r);

// Writes with a trailing newline; throws std::runtime_error on I/O failure.
void WriteJson(const std::string& path, const nlohmann::json& j);
nlohmann::json ReadJson(const std::string& path);

}  // namespace drro
