#include "drro/config.h"

#include <fstream>
#include <sstream>

namespace drro {

using nlohmann::json;

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string s = "invalid configuration:";
        for (const auto& v : violations) s += "\n  " + v;
        return s;
      }()),
      violations_(std::move(violations)) {}

namespace {

// Reads typed values out of a JSON document, recording violations instead of
// throwing so that one pass reports every problem.
class Reader {
 public:
  std::vector<std::string> errors;

  void Fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  const json* Field(const json& obj, const std::string& path, const char* key, bool required) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) Fail(path + "." + key, "missing");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> Number(const json* j, const std::string& path) {
    if (!j) return std::nullopt;
    if (!j->is_number()) {
      Fail(path, "expected a number");
      return std::nullopt;
    }
    return j->get<double>();
  }

  std::optional<long long> Integer(const json* j, const std::string& path) {
    if (!j) return std::nullopt;
    if (!j->is_number_integer() && !j->is_number_unsigned()) {
      Fail(path, "expected an integer");
      return std::nullopt;
    }
    return j->get<long long>();
  }

  std::optional<VectorXd> Vector(const json* j, const std::string& path) {
    if (!j) return std::nullopt;
    if (!j->is_array()) {
      Fail(path, "expected an array of numbers");
      return std::nullopt;
    }
    VectorXd v(j->size());
    for (std::size_t i = 0; i < j->size(); ++i) {
      if (!(*j)[i].is_number()) {
        Fail(path + "[" + std::to_string(i) + "]", "expected a number");
        return std::nullopt;
      }
      v(i) = (*j)[i].get<double>();
    }
    return v;
  }

  // Row-major nested arrays; all rows must have the same length.
  std::optional<MatrixXd> Matrix(const json* j, const std::string& path) {
    if (!j) return std::nullopt;
    if (!j->is_array()) {
      Fail(path, "expected a nested array (rows)");
      return std::nullopt;
    }
    const std::size_t rows = j->size();
    std::size_t cols = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      const json& row = (*j)[r];
      const std::string rp = path + "[" + std::to_string(r) + "]";
      if (!row.is_array()) {
        Fail(rp, "expected an array of numbers");
        return std::nullopt;
      }
      if (r == 0) cols = row.size();
      if (row.size() != cols) {
        Fail(rp, "row length " + std::to_string(row.size()) + " differs from " +
                     std::to_string(cols) + " (matrix must be rectangular)");
        return std::nullopt;
      }
    }
    MatrixXd M(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const json& e = (*j)[r][c];
        if (!e.is_number()) {
          Fail(path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]", "expected a number");
          return std::nullopt;
        }
        M(r, c) = e.get<double>();
      }
    }
    return M;
  }

  bool IsIdentityToken(const json* j) { return j && j->is_string() && j->get<std::string>() == "identity"; }
};

// Stagewise block (stage x stage) expanded block-diagonally, a full lifted
// matrix, or the identity token.
std::optional<MatrixXd> Weight(Reader& rd, const json* j, const std::string& path, int stage,
                               int blocks) {
  const int full = stage * blocks;
  if (!j || rd.IsIdentityToken(j)) return MatrixXd::Identity(full, full);
  if (j->is_string()) {
    rd.Fail(path, "unknown token \"" + j->get<std::string>() + "\" (expected \"identity\")");
    return std::nullopt;
  }
  auto M = rd.Matrix(j, path);
  if (!M) return std::nullopt;
  if (M->rows() == stage && M->cols() == stage) {
    MatrixXd out = MatrixXd::Zero(full, full);
    for (int b = 0; b < blocks; ++b) out.block(b * stage, b * stage, stage, stage) = *M;
    return out;
  }
  if (M->rows() == full && M->cols() == full) return M;
  rd.Fail(path, "expected " + std::to_string(stage) + "x" + std::to_string(stage) +
                    " (stagewise) or " + std::to_string(full) + "x" + std::to_string(full) +
                    " (lifted), got " + std::to_string(M->rows()) + "x" +
                    std::to_string(M->cols()));
  return std::nullopt;
}

std::optional<MatrixXd> SquareOrIdentity(Reader& rd, const json* j, const std::string& path, int n) {
  if (rd.IsIdentityToken(j)) return MatrixXd::Identity(n, n);
  auto M = rd.Matrix(j, path);
  if (M && (M->rows() != n || M->cols() != n)) {
    rd.Fail(path, "expected " + std::to_string(n) + "x" + std::to_string(n));
    return std::nullopt;
  }
  return M;
}

void AddViolations(Reader& rd, const std::string& path, const std::vector<std::string>& v) {
  for (const auto& s : v) rd.Fail(path, s);
}

void ParseSystem(Reader& rd, const json& doc, ExperimentConfig& cfg) {
  const json* sys = rd.Field(doc, "$", "system", false);
  if (!sys) return;
  if (!sys->is_object()) {
    rd.Fail("$.system", "expected an object");
    return;
  }
  auto A = rd.Matrix(rd.Field(*sys, "$.system", "A", true), "$.system.A");
  auto B = rd.Matrix(rd.Field(*sys, "$.system", "B", true), "$.system.B");
  auto H = rd.Matrix(rd.Field(*sys, "$.system", "H", true), "$.system.H");
  auto T = rd.Integer(rd.Field(*sys, "$.system", "T", true), "$.system.T");
  if (!A || !B || !H || !T) return;
  SystemDef s{*A, *B, *H, static_cast<int>(*T)};
  try {
    s.Validate();
  } catch (const std::invalid_argument& e) {
    rd.Fail("$.system", e.what());
    return;
  }
  cfg.system = s;

  const LiftedOperators lift = BuildLifted(s);
  const json* cost = rd.Field(doc, "$", "cost", false);
  if (cost && !rd.IsIdentityToken(cost) && !cost->is_object()) {
    rd.Fail("$.cost", "expected an object or \"identity\"");
    return;
  }
  const json* jx = cost && cost->is_object() ? rd.Field(*cost, "$.cost", "Jx", false) : nullptr;
  const json* ju = cost && cost->is_object() ? rd.Field(*cost, "$.cost", "Ju", false) : nullptr;
  auto Jx = Weight(rd, jx, "$.cost.Jx", s.nx(), s.T + 1);
  auto Ju = Weight(rd, ju, "$.cost.Ju", s.nu(), s.T);
  if (!Jx || !Ju) return;
  cfg.weights = CostWeights{*Jx, *Ju};
  try {
    cfg.weights.Validate(lift);
  } catch (const std::invalid_argument& e) {
    rd.Fail("$.cost", e.what());
  }
}

// Nominal moments from an explicit mean/covariance or from a data block.
std::optional<MomentNominal> ParseMoment(Reader& rd, const json& amb, int expected_dim) {
  const std::string p = "$.ambiguity";
  const json* data = rd.Field(amb, p, "data", false);
  if (data) {
    const std::string dp = p + ".data";
    if (!data->is_object()) {
      rd.Fail(dp, "expected an object");
      return std::nullopt;
    }
    MatrixXd samples;
    const json* gen = rd.Field(*data, dp, "generate", false);
    const json* raw = rd.Field(*data, dp, "samples", false);
    if ((gen != nullptr) == (raw != nullptr)) {
      rd.Fail(dp, "exactly one of \"generate\" or \"samples\" is required");
      return std::nullopt;
    }
    if (gen) {
      const std::string gp = dp + ".generate";
      auto count = rd.Integer(rd.Field(*gen, gp, "count", true), gp + ".count");
      auto seed = rd.Integer(rd.Field(*gen, gp, "seed", true), gp + ".seed");
      int n = expected_dim;
      auto dimf = rd.Integer(rd.Field(*gen, gp, "dim", false), gp + ".dim");
      if (dimf) n = static_cast<int>(*dimf);
      if (n <= 0) {
        rd.Fail(gp + ".dim", "required when no system is given");
        return std::nullopt;
      }
      const json* mj = rd.Field(*gen, gp, "mean", false);
      VectorXd mean = VectorXd::Zero(n);
      if (mj && mj->is_number()) {
        mean.setConstant(mj->get<double>());
      } else if (mj) {
        auto v = rd.Vector(mj, gp + ".mean");
        if (!v) return std::nullopt;
        if (v->size() != n) {
          rd.Fail(gp + ".mean", "expected length " + std::to_string(n));
          return std::nullopt;
        }
        mean = *v;
      }
      const json* cj = rd.Field(*gen, gp, "covariance", false);
      MatrixXd cov = MatrixXd::Identity(n, n);
      if (cj) {
        auto c = SquareOrIdentity(rd, cj, gp + ".covariance", n);
        if (!c) return std::nullopt;
        cov = *c;
      }
      if (!count || !seed) return std::nullopt;
      if (*count < 2) {
        rd.Fail(gp + ".count", "need at least 2 samples");
        return std::nullopt;
      }
      try {
        samples = SampleGaussian(MomentNominal::FromMoments(mean, cov), static_cast<int>(*count),
                                 static_cast<std::uint64_t>(*seed));
      } catch (const std::invalid_argument& e) {
        rd.Fail(gp, e.what());
        return std::nullopt;
      }
    } else {
      // One sample per row.
      auto S = rd.Matrix(raw, dp + ".samples");
      if (!S) return std::nullopt;
      if (S->rows() < 2) {
        rd.Fail(dp + ".samples", "need at least 2 samples");
        return std::nullopt;
      }
      samples = S->transpose();
    }
    const json* est = rd.Field(*data, dp, "estimate_moments", false);
    if (est && !(est->is_boolean() && est->get<bool>())) {
      rd.Fail(dp + ".estimate_moments", "only true is supported (moments are estimated from the data)");
      return std::nullopt;
    }
    if (expected_dim > 0 && samples.rows() != expected_dim) {
      rd.Fail(dp, "sample dimension " + std::to_string(samples.rows()) + " differs from Nx + Ny = " +
                      std::to_string(expected_dim));
      return std::nullopt;
    }
    return EstimateMoments(samples);
  }

  auto mu = rd.Vector(rd.Field(amb, p, "mean", true), p + ".mean");
  if (!mu) return std::nullopt;
  const int n = static_cast<int>(mu->size());
  if (expected_dim > 0 && n != expected_dim) {
    rd.Fail(p + ".mean", "length " + std::to_string(n) + " differs from Nx + Ny = " +
                             std::to_string(expected_dim));
    return std::nullopt;
  }
  auto Sigma = SquareOrIdentity(rd, rd.Field(amb, p, "covariance", true), p + ".covariance", n);
  if (!Sigma) return std::nullopt;
  try {
    return MomentNominal::FromMoments(*mu, *Sigma);
  } catch (const std::invalid_argument& e) {
    rd.Fail(p + ".covariance", e.what());
    return std::nullopt;
  }
}

std::optional<DiscreteNominal> ParseDiscrete(Reader& rd, const json& amb) {
  const std::string p = "$.ambiguity";
  auto pts = rd.Matrix(rd.Field(amb, p, "points", true), p + ".points");
  const json* sj = rd.Field(amb, p, "support", true);
  if (!pts || !sj) return std::nullopt;
  const int n = static_cast<int>(pts->cols());
  const std::string sp = p + ".support";
  Ellipsoid e;
  if (!sj->is_object()) {
    rd.Fail(sp, "expected an object");
    return std::nullopt;
  }
  if (sj->contains("center")) {
    auto c = rd.Vector(rd.Field(*sj, sp, "center", true), sp + ".center");
    auto r = rd.Number(rd.Field(*sj, sp, "radius", true), sp + ".radius");
    if (!c || !r) return std::nullopt;
    if (c->size() != n) {
      rd.Fail(sp + ".center", "expected length " + std::to_string(n));
      return std::nullopt;
    }
    e = Ellipsoid::Ball(*c, *r);
  } else {
    auto P = SquareOrIdentity(rd, rd.Field(*sj, sp, "P", true), sp + ".P", n);
    auto q = rd.Vector(rd.Field(*sj, sp, "q", false), sp + ".q");
    auto c = rd.Number(rd.Field(*sj, sp, "c", true), sp + ".c");
    if (!P || !c) return std::nullopt;
    e = Ellipsoid{*P, q ? *q : VectorXd::Zero(n), *c};
  }
  DiscreteNominal nom;
  nom.points = pts->transpose();
  nom.support = e;
  const json* wj = rd.Field(amb, p, "weights", false);
  if (wj) {
    auto w = rd.Vector(wj, p + ".weights");
    if (!w) return std::nullopt;
    nom.weights = *w;
  } else {
    nom.weights = VectorXd::Constant(nom.count(), 1.0 / std::max(1, nom.count()));
  }
  const auto bad = Validate(nom);
  if (!bad.empty()) {
    AddViolations(rd, p, bad);
    return std::nullopt;
  }
  return nom;
}

void ParseAmbiguity(Reader& rd, const json& doc, ExperimentConfig& cfg) {
  const std::string p = "$.ambiguity";
  const json* amb = rd.Field(doc, "$", "ambiguity", true);
  if (!amb) return;
  if (!amb->is_object()) {
    rd.Fail(p, "expected an object");
    return;
  }
  auto r = rd.Number(rd.Field(*amb, p, "radius", true), p + ".radius");
  if (r && !(*r > 0)) rd.Fail(p + ".radius", "must be positive");
  if (r) cfg.ball.radius = *r;

  std::string kind = "moment";
  const json* kj = rd.Field(*amb, p, "kind", false);
  if (kj) {
    if (!kj->is_string()) {
      rd.Fail(p + ".kind", "expected \"moment\" or \"discrete\"");
      return;
    }
    kind = kj->get<std::string>();
  }
  if (kind == "moment") {
    int dim = 0;
    if (cfg.system) {
      const LiftedOperators lift = BuildLifted(*cfg.system);
      dim = lift.Nx + lift.Ny;
    }
    if (auto m = ParseMoment(rd, *amb, dim)) cfg.ball.nominal = *m;
  } else if (kind == "discrete") {
    if (auto d = ParseDiscrete(rd, *amb)) cfg.ball.nominal = *d;
  } else {
    rd.Fail(p + ".kind", "unknown kind \"" + kind + "\" (expected \"moment\" or \"discrete\")");
  }
}

void ParseLoss(Reader& rd, const json& doc, ExperimentConfig& cfg) {
  const json* lj = rd.Field(doc, "$", "loss", false);
  if (!lj) return;
  const std::string p = "$.loss";
  if (!lj->is_object()) {
    rd.Fail(p, "expected an object");
    return;
  }
  const int n = std::visit([](const auto& nom) { return nom.dim(); }, cfg.ball.nominal);
  auto P = SquareOrIdentity(rd, rd.Field(*lj, p, "P", true), p + ".P", n);
  auto q = rd.Vector(rd.Field(*lj, p, "q", false), p + ".q");
  auto c = rd.Number(rd.Field(*lj, p, "c", false), p + ".c");
  if (!P) return;
  if (q && q->size() != n) {
    rd.Fail(p + ".q", "expected length " + std::to_string(n));
    return;
  }
  cfg.loss = Quadratic(*P, q ? *q : VectorXd::Zero(n), c ? *c : 0.0);
}

void ParseSolver(Reader& rd, const json& doc, ExperimentConfig& cfg) {
  const json* sj = rd.Field(doc, "$", "solver", false);
  if (sj) {
    const std::string p = "$.solver";
    if (!sj->is_object()) {
      rd.Fail(p, "expected an object");
    } else {
      if (auto v = rd.Number(rd.Field(*sj, p, "feas_tol", false), p + ".feas_tol")) cfg.settings.feas_tol = *v;
      if (auto v = rd.Number(rd.Field(*sj, p, "rel_gap_tol", false), p + ".rel_gap_tol")) {
        cfg.settings.rel_gap_tol = *v;
      }
      if (auto v = rd.Integer(rd.Field(*sj, p, "max_iterations", false), p + ".max_iterations")) {
        cfg.settings.max_iterations = static_cast<int>(*v);
      }
      if (auto v = rd.Number(rd.Field(*sj, p, "strict_margin", false), p + ".strict_margin")) {
        cfg.settings.strict_margin = *v;
      }
      try {
        cfg.settings.Validate();
      } catch (const std::invalid_argument& e) {
        rd.Fail(p, e.what());
      }
    }
  }

  if (const json* mj = rd.Field(doc, "$", "method", false)) {
    std::optional<Method> m;
    if (mj->is_string()) m = ParseMethod(mj->get<std::string>());
    if (m) {
      cfg.method = *m;
    } else {
      rd.Fail("$.method", "expected one of full, reduced, eliminated, distributed");
    }
  }
  if (const json* cj = rd.Field(doc, "$", "consensus", false)) {
    const std::string p = "$.consensus";
    if (auto v = rd.Number(rd.Field(*cj, p, "rho", false), p + ".rho")) cfg.consensus.rho = *v;
    if (auto v = rd.Number(rd.Field(*cj, p, "tol", false), p + ".tol")) cfg.consensus.tol = *v;
    if (auto v = rd.Integer(rd.Field(*cj, p, "max_iter", false), p + ".max_iter")) {
      cfg.consensus.max_iter = static_cast<int>(*v);
    }
  }
  if (auto s = rd.Integer(rd.Field(doc, "$", "seed", false), "$.seed")) {
    cfg.seed = static_cast<std::uint64_t>(*s);
  }
}

}  // namespace

ExperimentConfig ParseConfig(const json& doc) {
  Reader rd;
  ExperimentConfig cfg;
  cfg.source = doc;
  if (!doc.is_object()) throw ConfigError({"$: expected an object"});
  ParseSystem(rd, doc, cfg);
  ParseAmbiguity(rd, doc, cfg);
  if (rd.errors.empty()) ParseLoss(rd, doc, cfg);
  ParseSolver(rd, doc, cfg);
  if (!rd.errors.empty()) throw ConfigError(rd.errors);
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path + ": cannot open file"});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({path + ": parse error: " + e.what()});
  }
  return ParseConfig(doc);
}

SynthesisProblem ProblemFromConfig(const ExperimentConfig& cfg) {
  if (!cfg.system) throw ConfigError({"$.system: missing (required for synthesis)"});
  if (!cfg.is_moment()) {
    throw ConfigError({"$.ambiguity.kind: synthesis needs a moment nominal"});
  }
  try {
    return SynthesisProblem::Make(*cfg.system, cfg.weights, std::get<MomentNominal>(cfg.ball.nominal),
                                  cfg.ball.radius, cfg.settings);
  } catch (const std::invalid_argument& e) {
    throw ConfigError({std::string("$: ") + e.what()});
  }
}

}  // namespace drro
