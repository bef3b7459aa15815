#include <cmath>
#include <set>
#include <stdexcept>

#include "drro/conic.h"

namespace drro {

int SvecLength(int side) { return side * (side + 1) / 2; }

VectorXd SvecPack(const MatrixXd& S) {
  if (S.rows() != S.cols()) {
    throw std::invalid_argument("SvecPack: matrix is not square");
  }
  const int n = static_cast<int>(S.rows());
  VectorXd v(SvecLength(n));
  int k = 0;
  for (int j = 0; j < n; ++j) {
    v(k++) = S(j, j);
    for (int i = j + 1; i < n; ++i) {
      v(k++) = M_SQRT2 * 0.5 * (S(i, j) + S(j, i));
    }
  }
  return v;
}

MatrixXd SvecUnpack(const VectorXd& v) {
  const double disc = std::sqrt(1.0 + 8.0 * static_cast<double>(v.size()));
  const int n = static_cast<int>(std::lround((disc - 1.0) / 2.0));
  if (SvecLength(n) != v.size()) {
    throw std::invalid_argument("SvecUnpack: length is not a triangular number");
  }
  MatrixXd S(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    S(j, j) = v(k++);
    for (int i = j + 1; i < n; ++i) {
      S(i, j) = S(j, i) = v(k++) / M_SQRT2;
    }
  }
  return S;
}

double MinEig(const MatrixXd& S) {
  if (S.size() == 0) return 0.0;
  const MatrixXd sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

int ConicProgram::AddVariable(const std::string& name) {
  var_names_.push_back(name);
  objective_.conservativeResize(num_vars());
  objective_(num_vars() - 1) = 0.0;
  return num_vars() - 1;
}

int ConicProgram::AddVariables(const std::string& prefix, int count) {
  const int first = num_vars();
  for (int i = 0; i < count; ++i) {
    AddVariable(prefix + "[" + std::to_string(i) + "]");
  }
  return first;
}

void ConicProgram::AddObjective(int var, double coeff) {
  if (var < 0 || var >= num_vars()) throw std::out_of_range("AddObjective: bad variable");
  objective_(var) += coeff;
}

int ConicProgram::AddBlock(ConeBlock b) {
  if (FindBlock(b.name) >= 0) {
    throw std::invalid_argument("duplicate cone block name: " + b.name);
  }
  blocks_.push_back(std::move(b));
  return num_blocks() - 1;
}

ConeBlock& ConicProgram::MutableBlock(int i) {
  if (i < 0 || i >= num_blocks()) throw std::out_of_range("bad block index");
  return blocks_[i];
}

int ConicProgram::AddNonNegBlock(const std::string& name, int size) {
  ConeBlock b;
  b.name = name;
  b.kind = ConeKind::kNonNeg;
  b.size = size;
  b.offset = VectorXd::Zero(size);
  return AddBlock(std::move(b));
}

int ConicProgram::AddSecondOrderBlock(const std::string& name, int size) {
  if (size < 1) throw std::invalid_argument("second-order cone needs size >= 1");
  ConeBlock b;
  b.name = name;
  b.kind = ConeKind::kSecondOrder;
  b.size = size;
  b.offset = VectorXd::Zero(size);
  return AddBlock(std::move(b));
}

int ConicProgram::AddPsdBlock(const std::string& name, int side) {
  ConeBlock b;
  b.name = name;
  b.kind = ConeKind::kPsd;
  b.size = side;
  b.full_side = side;
  return AddBlock(std::move(b));
}

int ConicProgram::AddPsdBlock(const std::string& name, const MatrixXd& basis) {
  ConeBlock b;
  b.name = name;
  b.kind = ConeKind::kPsd;
  b.size = static_cast<int>(basis.cols());
  b.full_side = static_cast<int>(basis.rows());
  b.basis = basis;
  return AddBlock(std::move(b));
}

void ConicProgram::AddVectorTerm(int block, int row, int var, double coeff) {
  ConeBlock& b = MutableBlock(block);
  if (b.kind == ConeKind::kPsd) throw std::invalid_argument("AddVectorTerm on PSD block");
  if (row < 0 || row >= b.size || var < 0 || var >= num_vars()) {
    throw std::out_of_range("AddVectorTerm: index out of range");
  }
  if (coeff != 0.0) b.coeffs.emplace_back(row, var, coeff);
}

void ConicProgram::AddVectorConstant(int block, int row, double value) {
  ConeBlock& b = MutableBlock(block);
  if (b.kind == ConeKind::kPsd) throw std::invalid_argument("AddVectorConstant on PSD block");
  b.offset(row) += value;
}

void ConicProgram::AddPsdTerm(int block, int row, int col, int var, double coeff) {
  ConeBlock& b = MutableBlock(block);
  if (b.kind != ConeKind::kPsd) throw std::invalid_argument("AddPsdTerm on vector block");
  if (row < 0 || col < 0 || row >= b.full_side || col >= b.full_side || var < 0 ||
      var >= num_vars()) {
    throw std::out_of_range("AddPsdTerm: index out of range");
  }
  if (coeff == 0.0) return;
  if (row < col) std::swap(row, col);
  b.terms.push_back({var, row, col, coeff});
}

void ConicProgram::AddPsdConstant(int block, int row, int col, double value) {
  ConeBlock& b = MutableBlock(block);
  if (b.kind != ConeKind::kPsd) throw std::invalid_argument("AddPsdConstant on vector block");
  if (row < 0 || col < 0 || row >= b.full_side || col >= b.full_side) {
    throw std::out_of_range("AddPsdConstant: index out of range");
  }
  if (value == 0.0) return;
  if (row < col) std::swap(row, col);
  b.constants.push_back({-1, row, col, value});
}

void ConicProgram::AddPsdShift(int block, double value) {
  ConeBlock& b = MutableBlock(block);
  if (b.kind != ConeKind::kPsd) throw std::invalid_argument("AddPsdShift on vector block");
  b.shift += value;
}

int ConicProgram::FindBlock(const std::string& name) const {
  for (int i = 0; i < num_blocks(); ++i) {
    if (blocks_[i].name == name) return i;
  }
  return -1;
}

namespace {

void Accumulate(MatrixXd& M, const PsdTerm& t, double scale) {
  M(t.row, t.col) += scale * t.value;
  if (t.row != t.col) M(t.col, t.row) += scale * t.value;
}

}  // namespace

MatrixXd ConicProgram::PsdSlack(int block, const VectorXd& x) const {
  const ConeBlock& b = blocks_.at(block);
  if (b.kind != ConeKind::kPsd) throw std::invalid_argument("PsdSlack on vector block");
  MatrixXd full = MatrixXd::Zero(b.full_side, b.full_side);
  for (const auto& c : b.constants) Accumulate(full, c, 1.0);
  for (const auto& t : b.terms) Accumulate(full, t, x(t.var));
  MatrixXd S = b.HasBasis() ? MatrixXd(b.basis.transpose() * full * b.basis) : full;
  S.diagonal().array() += b.shift;
  return S;
}

VectorXd ConicProgram::PackedSlack(int block, const VectorXd& x) const {
  const ConeBlock& b = blocks_.at(block);
  if (x.size() != num_vars()) throw std::invalid_argument("PackedSlack: wrong x length");
  if (b.kind == ConeKind::kPsd) return SvecPack(PsdSlack(block, x));
  VectorXd s = b.offset;
  for (const auto& t : b.coeffs) s(t.row()) += t.value() * x(t.col());
  return s;
}

double ConicProgram::MinSlack(int block, const VectorXd& x) const {
  const ConeBlock& b = blocks_.at(block);
  switch (b.kind) {
    case ConeKind::kNonNeg: {
      const VectorXd s = PackedSlack(block, x);
      return s.size() ? s.minCoeff() : 0.0;
    }
    case ConeKind::kSecondOrder: {
      const VectorXd s = PackedSlack(block, x);
      return s(0) - s.tail(s.size() - 1).norm();
    }
    case ConeKind::kPsd:
      return MinEig(PsdSlack(block, x));
  }
  return 0.0;
}

void ConicProgram::Validate() const {
  if (objective_.size() != num_vars()) {
    throw std::invalid_argument("objective length differs from variable count");
  }
  std::set<std::string> names;
  for (const auto& b : blocks_) {
    if (!names.insert(b.name).second) throw std::invalid_argument("duplicate block " + b.name);
    if (b.size < 0) throw std::invalid_argument("negative block size in " + b.name);
    if (b.kind == ConeKind::kPsd) {
      if (b.HasBasis() && (b.basis.rows() != b.full_side || b.basis.cols() != b.size)) {
        throw std::invalid_argument("basis shape mismatch in " + b.name);
      }
      if (!b.HasBasis() && b.full_side != b.size) {
        throw std::invalid_argument("full side mismatch in " + b.name);
      }
    } else if (b.offset.size() != b.size) {
      throw std::invalid_argument("offset length mismatch in " + b.name);
    }
  }
}

void SolverSettings::Validate() const {
  if (!(feas_tol > 0 && rel_gap_tol > 0 && strict_margin > 0 && max_iterations > 0)) {
    throw std::invalid_argument("solver tolerances must be positive");
  }
}

double SolverSettings::StrictEpsilon(double objective_scale) const {
  return strict_margin * (1.0 + std::abs(objective_scale));
}

const char* ToString(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
    case SolveStatus::kNumericalFailure:
      return "numerical-failure";
  }
  return "unknown";
}

SolveReport Solve(const ConicProgram& p, const SolverSettings& s) {
  static const InteriorPointSolver backend;
  return backend.Solve(p, s);
}

}  // namespace drro
