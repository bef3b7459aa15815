#include "drro/report.h"

#include <fstream>
#include <stdexcept>

namespace drro {

using nlohmann::json;

json ToJson(const MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json ToJson(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json ToJson(const SolveReport& r) {
  return {{"status", ToString(r.status)},
          {"primal_value", r.primal_value},
          {"dual_value", r.dual_value},
          {"iterations", r.iterations},
          {"primal_residual", r.primal_residual},
          {"dual_residual", r.dual_residual},
          {"gap", r.gap},
          {"reduced_accuracy", r.reduced_accuracy}};
}

json ToJson(const ConsensusTrace& t) {
  return {{"iterations", t.iterations},
          {"converged", t.converged},
          {"final_primal_residual", t.primal_residual.empty() ? 0.0 : t.primal_residual.back()},
          {"final_dual_residual", t.dual_residual.empty() ? 0.0 : t.dual_residual.back()},
          {"polish_shift", t.polish_shift},
          {"primal_residual", t.primal_residual},
          {"dual_residual", t.dual_residual},
          {"rho", t.rho},
          {"objective", t.objective}};
}

MatrixXd MatrixFromJson(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("matrix must be an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j[0].size() : 0;
  MatrixXd M(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw std::invalid_argument("matrix rows must be arrays of equal length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw std::invalid_argument("matrix entries must be numbers");
      M(r, c) = j[r][c].get<double>();
    }
  }
  return M;
}

VectorXd VectorFromJson(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("vector must be an array");
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument("vector entries must be numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

AffineController ControllerFromJson(const json& j, const LiftedOperators& lift) {
  const json& c = j.contains("controller") ? j.at("controller") : j;
  if (!c.contains("K") || !c.contains("g")) {
    throw std::invalid_argument("controller needs fields K and g");
  }
  AffineController ctrl{MatrixFromJson(c.at("K")), VectorFromJson(c.at("g"))};
  if (ctrl.K.rows() != lift.Nu || ctrl.K.cols() != lift.Ny || ctrl.g.size() != lift.Nu) {
    throw std::invalid_argument("controller dimensions do not match the system: expected K " +
                                std::to_string(lift.Nu) + "x" + std::to_string(lift.Ny) +
                                " and g of length " + std::to_string(lift.Nu));
  }
  return ctrl;
}

json ResultToJson(const SynthesisResult& r) {
  json solves = json::array();
  for (const auto& s : r.reports) solves.push_back(ToJson(s));
  json out = {{"method", ToString(r.method)},
              {"value", r.value},
              {"certificate", r.certificate},
              {"reconstruction_gap", r.reconstruction_gap},
              {"gamma", r.gamma},
              {"beta", r.beta},
              {"q_min_eig", r.q_min_eig},
              {"affine_min_eig", r.affine_min_eig},
              {"num_vars", r.num_vars},
              {"controller", {{"K", ToJson(r.controller.K)}, {"g", ToJson(r.controller.g)}}},
              {"X", ToJson(r.X)},
              {"solves", solves},
              {"timings",
               {{"build", r.times.build}, {"solve", r.times.solve}, {"reconstruct", r.times.reconstruct}}}};
  if (r.consensus) out["consensus"] = ToJson(*r.consensus);
  return out;
}

void WriteJson(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

json ReadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

}  // namespace drro
