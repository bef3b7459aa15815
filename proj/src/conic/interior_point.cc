// Dense primal-dual interior-point method for
//
//   minimise c'x  subject to  s = h + A x in K,
//
// where K is a product of nonnegative orthants, second-order cones and PSD
// cones. Nesterov-Todd scaling, Mehrotra predictor-corrector, infeasible start.
// Internally the G = -A convention is used for the Newton system.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "drro/conic.h"

namespace drro {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStepFraction = 0.99;

struct Entry {
  int row;
  int col;
  double value;
};

// Block data compiled from a ConeBlock.
struct Block {
  ConeKind kind;
  int size = 0;
  // Vector cones.
  Eigen::SparseMatrix<double> A;  // size x n
  MatrixXd AtA;                   // second-order cones only
  // PSD cones.
  int full = 0;
  bool has_basis = false;
  MatrixXd basis;
  std::vector<int> vars;                   // sorted distinct variables
  std::vector<std::vector<Entry>> terms;   // aligned with vars
  // Constant part, as a column vector for vector cones and a symmetric
  // matrix for PSD cones.
  MatrixXd h;
};

using ConeVec = std::vector<MatrixXd>;

struct Scaling {
  // kNonNeg: W = diag(d).
  VectorXd d;
  // kSecondOrder: W = beta (2 v v' - J).
  double beta = 1.0;
  VectorXd v;
  // kPsd: W(Z) = r' Z r, W^{-T}(S) = rti' S rti with rti = r^{-T}.
  MatrixXd r;
  MatrixXd rti;
};

double Dot(const ConeVec& a, const ConeVec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i].cwiseProduct(b[i]).sum();
  return s;
}

double Norm(const ConeVec& a) { return std::sqrt(Dot(a, a)); }

void Axpy(double alpha, const ConeVec& x, ConeVec& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

ConeVec Scaled(double alpha, const ConeVec& x) {
  ConeVec y = x;
  for (auto& m : y) m *= alpha;
  return y;
}

// Smallest t such that u + t e lies in the cone.
double Violation(const Block& b, const MatrixXd& u) {
  switch (b.kind) {
    case ConeKind::kNonNeg:
      return u.size() ? -u.minCoeff() : -kInf;
    case ConeKind::kSecondOrder:
      return u.col(0).tail(b.size - 1).norm() - u(0, 0);
    case ConeKind::kPsd:
      return b.size ? -MinEig(u) : -kInf;
  }
  return 0.0;
}

MatrixXd Identity(const Block& b) {
  switch (b.kind) {
    case ConeKind::kNonNeg:
      return MatrixXd::Ones(b.size, 1);
    case ConeKind::kSecondOrder: {
      MatrixXd e = MatrixXd::Zero(b.size, 1);
      e(0, 0) = 1.0;
      return e;
    }
    case ConeKind::kPsd:
      return MatrixXd::Identity(b.size, b.size);
  }
  return {};
}

int Degree(const Block& b) { return b.kind == ConeKind::kSecondOrder ? 1 : b.size; }

// Jordan product u o v.
MatrixXd Product(const Block& b, const MatrixXd& u, const MatrixXd& v) {
  switch (b.kind) {
    case ConeKind::kNonNeg:
      return u.cwiseProduct(v);
    case ConeKind::kSecondOrder: {
      MatrixXd w(b.size, 1);
      w(0, 0) = u.col(0).dot(v.col(0));
      w.col(0).tail(b.size - 1) =
          u(0, 0) * v.col(0).tail(b.size - 1) + v(0, 0) * u.col(0).tail(b.size - 1);
      return w;
    }
    case ConeKind::kPsd: {
      MatrixXd w = u * v;
      return 0.5 * (w + w.transpose());
    }
  }
  return {};
}

// Solves lambda o x = r for x, where lambda is a scaled point (diagonal for
// PSD blocks).
MatrixXd InverseProduct(const Block& b, const MatrixXd& lambda, const MatrixXd& r) {
  switch (b.kind) {
    case ConeKind::kNonNeg:
      return r.cwiseQuotient(lambda);
    case ConeKind::kSecondOrder: {
      const double l0 = lambda(0, 0);
      const auto l1 = lambda.col(0).tail(b.size - 1);
      const double det = (l0 - l1.norm()) * (l0 + l1.norm());
      MatrixXd x(b.size, 1);
      x(0, 0) = (l0 * r(0, 0) - l1.dot(r.col(0).tail(b.size - 1))) / det;
      x.col(0).tail(b.size - 1) = (r.col(0).tail(b.size - 1) - x(0, 0) * l1) / l0;
      return x;
    }
    case ConeKind::kPsd: {
      MatrixXd x(b.size, b.size);
      for (int j = 0; j < b.size; ++j) {
        for (int i = 0; i < b.size; ++i) {
          x(i, j) = 2.0 * r(i, j) / (lambda(i, i) + lambda(j, j));
        }
      }
      return x;
    }
  }
  return {};
}

// Largest alpha with lambda + alpha * du in the cone (lambda interior,
// diagonal for PSD blocks).
double MaxStep(const Block& b, const MatrixXd& lambda, const MatrixXd& du) {
  switch (b.kind) {
    case ConeKind::kNonNeg: {
      double a = kInf;
      for (int i = 0; i < b.size; ++i) {
        if (du(i, 0) < 0) a = std::min(a, -lambda(i, 0) / du(i, 0));
      }
      return a;
    }
    case ConeKind::kSecondOrder: {
      const int m = b.size - 1;
      const double u0 = lambda(0, 0), d0 = du(0, 0);
      const auto u1 = lambda.col(0).tail(m);
      const auto d1 = du.col(0).tail(m);
      const double qa = d0 * d0 - d1.squaredNorm();
      const double qb = 2.0 * (u0 * d0 - u1.dot(d1));
      const double qc = (u0 - u1.norm()) * (u0 + u1.norm());
      if (qa == 0.0) return qb < 0 ? -qc / qb : kInf;
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc < 0) return kInf;
      const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
      double best = kInf;
      for (double root : {q / qa, q != 0.0 ? qc / q : kInf}) {
        if (root > 0) best = std::min(best, root);
      }
      return best;
    }
    case ConeKind::kPsd: {
      if (b.size == 0) return kInf;
      const VectorXd isq = lambda.diagonal().cwiseSqrt().cwiseInverse();
      const MatrixXd m = isq.asDiagonal() * du * isq.asDiagonal();
      const double e = MinEig(m);
      return e < 0 ? -1.0 / e : kInf;
    }
  }
  return kInf;
}

// Any factor L with S = L L' (S symmetric positive definite).
MatrixXd Factor(const MatrixXd& S) {
  Eigen::LLT<MatrixXd> llt(S);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (S + S.transpose()));
  const VectorXd ev = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

class Engine {
 public:
  Engine(const ConicProgram& p, const SolverSettings& s) : prog_(p), set_(s) {
    n_ = p.num_vars();
    c_ = p.objective();
    for (const auto& cb : p.blocks()) blocks_.push_back(Compile(cb));
    degree_ = 0;
    for (const auto& b : blocks_) degree_ += Degree(b);
  }

  SolveReport Run();

 private:
  Block Compile(const ConeBlock& cb) const;
  ConeVec ApplyA(const VectorXd& x) const;
  VectorXd ApplyAt(const ConeVec& z) const;
  MatrixXd BlockApplyA(const Block& b, const VectorXd& x) const;

  // Scaling operators, per block.
  MatrixXd W(const Block& b, const Scaling& w, const MatrixXd& u) const;
  MatrixXd Wt(const Block& b, const Scaling& w, const MatrixXd& u) const;
  MatrixXd Winv(const Block& b, const Scaling& w, const MatrixXd& u) const;
  MatrixXd WinvT(const Block& b, const Scaling& w, const MatrixXd& u) const;
  ConeVec WinvT(const ConeVec& u) const;
  ConeVec Winv(const ConeVec& u) const;

  Scaling IdentityScaling(const Block& b) const;
  void ComputeScaling(const ConeVec& s, const ConeVec& z);
  void UpdateScaling(const ConeVec& s, const ConeVec& z, const ConeVec& st, const ConeVec& zt);

  MatrixXd NewtonMatrix() const;
  bool Factorize(const MatrixXd& H);
  VectorXd SolveH(const VectorXd& rhs) const;
  void NewtonSolve(const VectorXd& rx, const ConeVec& rz, const ConeVec& d, VectorXd& dx,
                   ConeVec& dst, ConeVec& dzt) const;

  double StepLength(const ConeVec& dst, const ConeVec& dzt) const;
  bool SlackInvariantHolds(const VectorXd& x) const;

  const ConicProgram& prog_;
  const SolverSettings& set_;
  int n_ = 0;
  VectorXd c_;
  std::vector<Block> blocks_;
  int degree_ = 0;

  std::vector<Scaling> scal_;
  ConeVec lambda_;
  MatrixXd H_;
  Eigen::LLT<MatrixXd> llt_;
  Eigen::LDLT<MatrixXd> ldlt_;
  bool use_ldlt_ = false;
};

Block Engine::Compile(const ConeBlock& cb) const {
  Block b;
  b.kind = cb.kind;
  b.size = cb.size;
  if (cb.kind != ConeKind::kPsd) {
    b.A.resize(cb.size, n_);
    b.A.setFromTriplets(cb.coeffs.begin(), cb.coeffs.end());
    b.A.makeCompressed();
    b.h = cb.offset;
    if (cb.kind == ConeKind::kSecondOrder) b.AtA = MatrixXd(b.A.transpose() * b.A);
    return b;
  }
  b.full = cb.full_side;
  b.has_basis = cb.HasBasis();
  b.basis = cb.basis;
  std::vector<std::vector<Entry>> by_var(n_);
  for (const auto& t : cb.terms) by_var[t.var].push_back({t.row, t.col, t.value});
  for (int j = 0; j < n_; ++j) {
    if (!by_var[j].empty()) {
      b.vars.push_back(j);
      b.terms.push_back(std::move(by_var[j]));
    }
  }
  MatrixXd full = MatrixXd::Zero(b.full, b.full);
  for (const auto& t : cb.constants) {
    full(t.row, t.col) += t.value;
    if (t.row != t.col) full(t.col, t.row) += t.value;
  }
  b.h = b.has_basis ? MatrixXd(b.basis.transpose() * full * b.basis) : full;
  b.h.diagonal().array() += cb.shift;
  return b;
}

MatrixXd Engine::BlockApplyA(const Block& b, const VectorXd& x) const {
  if (b.kind != ConeKind::kPsd) return MatrixXd(b.A * x);
  MatrixXd full = MatrixXd::Zero(b.full, b.full);
  for (size_t k = 0; k < b.vars.size(); ++k) {
    const double xv = x(b.vars[k]);
    if (xv == 0.0) continue;
    for (const auto& e : b.terms[k]) {
      full(e.row, e.col) += xv * e.value;
      if (e.row != e.col) full(e.col, e.row) += xv * e.value;
    }
  }
  return b.has_basis ? MatrixXd(b.basis.transpose() * full * b.basis) : full;
}

ConeVec Engine::ApplyA(const VectorXd& x) const {
  ConeVec out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(BlockApplyA(b, x));
  return out;
}

VectorXd Engine::ApplyAt(const ConeVec& z) const {
  VectorXd g = VectorXd::Zero(n_);
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    if (b.kind != ConeKind::kPsd) {
      g += b.A.transpose() * z[i].col(0);
      continue;
    }
    const MatrixXd M = b.has_basis ? MatrixXd(b.basis * z[i] * b.basis.transpose()) : z[i];
    for (size_t k = 0; k < b.vars.size(); ++k) {
      double acc = 0.0;
      for (const auto& e : b.terms[k]) {
        acc += e.value * (e.row == e.col ? M(e.row, e.row) : M(e.row, e.col) + M(e.col, e.row));
      }
      g(b.vars[k]) += acc;
    }
  }
  return g;
}

MatrixXd Engine::W(const Block& b, const Scaling& w, const MatrixXd& u) const {
  switch (b.kind) {
    case ConeKind::kNonNeg:
      return w.d.cwiseProduct(u.col(0));
    case ConeKind::kSecondOrder: {
      VectorXd ju = u.col(0);
      ju.tail(b.size - 1) *= -1.0;
      return w.beta * (2.0 * w.v * w.v.dot(u.col(0)) - ju);
    }
    case ConeKind::kPsd:
      return w.r.transpose() * u * w.r;
  }
  return {};
}

MatrixXd Engine::Wt(const Block& b, const Scaling& w, const MatrixXd& u) const {
  if (b.kind == ConeKind::kPsd) return w.r * u * w.r.transpose();
  return W(b, w, u);
}

MatrixXd Engine::Winv(const Block& b, const Scaling& w, const MatrixXd& u) const {
  switch (b.kind) {
    case ConeKind::kNonNeg:
      return u.col(0).cwiseQuotient(w.d);
    case ConeKind::kSecondOrder: {
      // W^{-1} = (1/beta) J (2 v v' - J) J = (1/beta) (2 Jv (Jv)' - J).
      VectorXd jv = w.v;
      jv.tail(b.size - 1) *= -1.0;
      VectorXd ju = u.col(0);
      ju.tail(b.size - 1) *= -1.0;
      return (2.0 * jv * jv.dot(u.col(0)) - ju) / w.beta;
    }
    case ConeKind::kPsd:
      return w.rti * u * w.rti.transpose();
  }
  return {};
}

MatrixXd Engine::WinvT(const Block& b, const Scaling& w, const MatrixXd& u) const {
  if (b.kind == ConeKind::kPsd) return w.rti.transpose() * u * w.rti;
  return Winv(b, w, u);
}

ConeVec Engine::WinvT(const ConeVec& u) const {
  ConeVec out(u.size());
  for (size_t i = 0; i < u.size(); ++i) out[i] = WinvT(blocks_[i], scal_[i], u[i]);
  return out;
}

ConeVec Engine::Winv(const ConeVec& u) const {
  ConeVec out(u.size());
  for (size_t i = 0; i < u.size(); ++i) out[i] = Winv(blocks_[i], scal_[i], u[i]);
  return out;
}

Scaling Engine::IdentityScaling(const Block& b) const {
  Scaling w;
  switch (b.kind) {
    case ConeKind::kNonNeg:
      w.d = VectorXd::Ones(b.size);
      break;
    case ConeKind::kSecondOrder:
      w.beta = 1.0;
      w.v = VectorXd::Zero(b.size);
      w.v(0) = 1.0;
      break;
    case ConeKind::kPsd:
      w.r = MatrixXd::Identity(b.size, b.size);
      w.rti = w.r;
      break;
  }
  return w;
}

Scaling SecondOrderScaling(const VectorXd& s, const VectorXd& z) {
  const int m = static_cast<int>(s.size()) - 1;
  const double sn1 = s.tail(m).norm(), zn1 = z.tail(m).norm();
  const double snorm = std::sqrt((s(0) - sn1) * (s(0) + sn1));
  const double znorm = std::sqrt((z(0) - zn1) * (z(0) + zn1));
  const VectorXd sb = s / snorm, zb = z / znorm;
  const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
  VectorXd wb(m + 1);
  wb(0) = (sb(0) + zb(0)) / (2.0 * gamma);
  wb.tail(m) = (sb.tail(m) - zb.tail(m)) / (2.0 * gamma);
  Scaling w;
  w.beta = std::sqrt(snorm / znorm);
  w.v = wb;
  w.v(0) += 1.0;
  w.v /= std::sqrt(2.0 * (wb(0) + 1.0));
  return w;
}

void Engine::ComputeScaling(const ConeVec& s, const ConeVec& z) {
  scal_.assign(blocks_.size(), Scaling{});
  lambda_.assign(blocks_.size(), MatrixXd{});
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    Scaling& w = scal_[i];
    switch (b.kind) {
      case ConeKind::kNonNeg:
        w.d = s[i].col(0).cwiseQuotient(z[i].col(0)).cwiseSqrt();
        lambda_[i] = s[i].cwiseProduct(z[i]).cwiseSqrt();
        break;
      case ConeKind::kSecondOrder:
        w = SecondOrderScaling(s[i].col(0), z[i].col(0));
        lambda_[i] = W(b, w, z[i]);
        break;
      case ConeKind::kPsd: {
        if (b.size == 0) {
          w.r = w.rti = MatrixXd(0, 0);
          lambda_[i] = MatrixXd(0, 0);
          break;
        }
        const MatrixXd ls = Factor(s[i]);
        const MatrixXd lz = Factor(z[i]);
        Eigen::JacobiSVD<MatrixXd> svd(lz.transpose() * ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const VectorXd isq = svd.singularValues().cwiseSqrt().cwiseInverse();
        w.r = ls * svd.matrixV() * isq.asDiagonal();
        w.rti = lz * svd.matrixU() * isq.asDiagonal();
        lambda_[i] = svd.singularValues().asDiagonal();
        break;
      }
    }
  }
}

// Rescaling after a step. Vector cones are rescaled from the unscaled
// iterates (s, z); PSD blocks are updated from the scaled iterates
// st = W^{-T} s, zt = W z, which stay well conditioned near the boundary.
void Engine::UpdateScaling(const ConeVec& s, const ConeVec& z, const ConeVec& st,
                           const ConeVec& zt) {
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    Scaling& w = scal_[i];
    switch (b.kind) {
      case ConeKind::kNonNeg:
        w.d = s[i].col(0).cwiseQuotient(z[i].col(0)).cwiseSqrt();
        lambda_[i] = s[i].cwiseProduct(z[i]).cwiseSqrt();
        break;
      case ConeKind::kSecondOrder:
        w = SecondOrderScaling(s[i].col(0), z[i].col(0));
        lambda_[i] = W(b, w, z[i]);
        break;
      case ConeKind::kPsd: {
        if (b.size == 0) break;
        const MatrixXd ls = Factor(st[i]);
        const MatrixXd lz = Factor(zt[i]);
        Eigen::JacobiSVD<MatrixXd> svd(lz.transpose() * ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const VectorXd isq = svd.singularValues().cwiseSqrt().cwiseInverse();
        w.r = w.r * ls * svd.matrixV() * isq.asDiagonal();
        w.rti = w.rti * lz * svd.matrixU() * isq.asDiagonal();
        lambda_[i] = svd.singularValues().asDiagonal();
        break;
      }
    }
  }
}

// H = A' W^{-1} W^{-T} A.
MatrixXd Engine::NewtonMatrix() const {
  MatrixXd H = MatrixXd::Zero(n_, n_);
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    const Scaling& w = scal_[i];
    switch (b.kind) {
      case ConeKind::kNonNeg: {
        const VectorXd dinv = w.d.cwiseInverse();
        const Eigen::SparseMatrix<double> As = dinv.asDiagonal() * b.A;
        H += MatrixXd(As.transpose() * As);
        break;
      }
      case ConeKind::kSecondOrder: {
        // W^{-2} = (1/beta^2) (I + 4 |v|^2 u u' - 2 (u v' + v u')), u = J v.
        VectorXd u = w.v;
        u.tail(b.size - 1) *= -1.0;
        const VectorXd au = b.A.transpose() * u;
        const VectorXd av = b.A.transpose() * w.v;
        const double ib2 = 1.0 / (w.beta * w.beta);
        H += ib2 * (b.AtA + 4.0 * w.v.squaredNorm() * au * au.transpose() -
                    2.0 * (au * av.transpose() + av * au.transpose()));
        break;
      }
      case ConeKind::kPsd: {
        if (b.vars.empty()) break;
        // Gamma = C' C with C = rti' basis', so tr(C F_j C' C F_k C') =
        // tr(F_j Gamma F_k Gamma).
        const MatrixXd Ct =
            b.has_basis ? MatrixXd(b.basis * w.rti) : w.rti;  // full x size
        const MatrixXd gam = Ct * Ct.transpose();
        const int nf = b.full;
        MatrixXd Y(nf, nf);
        MatrixXd dense(nf, nf);
        for (size_t k = 0; k < b.vars.size(); ++k) {
          const auto& tk = b.terms[k];
          if (static_cast<int>(tk.size()) < nf) {
            Y.setZero();
            for (const auto& e : tk) {
              if (e.row == e.col) {
                Y.noalias() += e.value * gam.col(e.row) * gam.col(e.row).transpose();
              } else {
                Y.noalias() += e.value * gam.col(e.row) * gam.col(e.col).transpose();
                Y.noalias() += e.value * gam.col(e.col) * gam.col(e.row).transpose();
              }
            }
          } else {
            dense.setZero();
            for (const auto& e : tk) {
              dense(e.row, e.col) += e.value;
              if (e.row != e.col) dense(e.col, e.row) += e.value;
            }
            Y.noalias() = gam * dense * gam;
          }
          const int vk = b.vars[k];
          for (size_t j = 0; j <= k; ++j) {
            double acc = 0.0;
            for (const auto& e : b.terms[j]) {
              acc += e.value * (e.row == e.col ? Y(e.row, e.row) : Y(e.row, e.col) + Y(e.col, e.row));
            }
            const int vj = b.vars[j];
            H(vj, vk) += acc;
            if (vj != vk) H(vk, vj) += acc;
          }
        }
        break;
      }
    }
  }
  return H;
}

bool Engine::Factorize(const MatrixXd& H) {
  H_ = H;
  llt_.compute(H_);
  use_ldlt_ = llt_.info() != Eigen::Success;
  if (!use_ldlt_) return true;
  const double reg = 1e-14 * std::max(1.0, H_.diagonal().cwiseAbs().maxCoeff());
  H_.diagonal().array() += reg;
  ldlt_.compute(H_);
  return ldlt_.info() == Eigen::Success && ldlt_.isPositive();
}

VectorXd Engine::SolveH(const VectorXd& rhs) const {
  VectorXd x = use_ldlt_ ? VectorXd(ldlt_.solve(rhs)) : VectorXd(llt_.solve(rhs));
  // One step of iterative refinement.
  const VectorXd r = rhs - H_ * x;
  x += use_ldlt_ ? VectorXd(ldlt_.solve(r)) : VectorXd(llt_.solve(r));
  return x;
}

// Solves  G dx + W' dst = -rz,  G' W^{-1} dzt = -rx,  dst + dzt = d
// with G = -A, in scaled coordinates dst = W^{-T} ds, dzt = W dz.
void Engine::NewtonSolve(const VectorXd& rx, const ConeVec& rz, const ConeVec& d, VectorXd& dx,
                         ConeVec& dst, ConeVec& dzt) const {
  ConeVec t = WinvT(rz);
  Axpy(1.0, d, t);
  dx = SolveH(-rx + ApplyAt(Winv(t)));
  const ConeVec adx = ApplyA(dx);
  dzt = t;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    dzt[i] -= WinvT(blocks_[i], scal_[i], adx[i]);
  }
  dst = d;
  Axpy(-1.0, dzt, dst);
}

double Engine::StepLength(const ConeVec& dst, const ConeVec& dzt) const {
  double a = kInf;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    a = std::min(a, MaxStep(blocks_[i], lambda_[i], dst[i]));
    a = std::min(a, MaxStep(blocks_[i], lambda_[i], dzt[i]));
  }
  return a;
}

bool Engine::SlackInvariantHolds(const VectorXd& x) const {
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    if (b.kind != ConeKind::kPsd || b.size == 0) continue;
    const MatrixXd S = b.h + BlockApplyA(b, x);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
    const double trace_norm = es.eigenvalues().cwiseAbs().sum();
    if (es.eigenvalues()(0) < -set_.feas_tol * (1.0 + trace_norm)) return false;
  }
  return true;
}

SolveReport Engine::Run() {
  SolveReport rep;
  const auto t0 = std::chrono::steady_clock::now();
  auto finish = [&](SolveStatus st, const VectorXd& x, std::string msg) {
    rep.status = st;
    rep.x = x;
    rep.primal_value = c_.dot(x);
    rep.diagnostics = std::move(msg);
    rep.min_slack.clear();
    for (int i = 0; i < prog_.num_blocks(); ++i) rep.min_slack.push_back(prog_.MinSlack(i, x));
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  };

  ConeVec h;
  for (const auto& b : blocks_) h.push_back(b.h);
  const double hnorm = std::max(1.0, Norm(h));
  const double cnorm = std::max(1.0, c_.norm());

  if (blocks_.empty()) {
    if (c_.lpNorm<Eigen::Infinity>() == 0.0) return finish(SolveStatus::kOptimal, VectorXd::Zero(n_), "");
    return finish(SolveStatus::kUnbounded, VectorXd::Zero(n_), "no constraints");
  }

  // Starting point: least-squares primal and least-norm dual, shifted into
  // the interior.
  scal_.clear();
  for (const auto& b : blocks_) scal_.push_back(IdentityScaling(b));
  if (!Factorize(NewtonMatrix())) {
    return finish(SolveStatus::kNumericalFailure, VectorXd::Zero(n_),
                  "constraint map is rank deficient");
  }
  VectorXd x = -SolveH(ApplyAt(h));
  ConeVec s = ApplyA(x);
  Axpy(1.0, h, s);
  ConeVec z = ApplyA(SolveH(c_));
  auto shift_in = [&](ConeVec& u) {
    double t = -kInf;
    for (size_t i = 0; i < blocks_.size(); ++i) t = std::max(t, Violation(blocks_[i], u[i]));
    if (t >= -1e-8 * std::max(1.0, Norm(u))) {
      for (size_t i = 0; i < blocks_.size(); ++i) u[i] += (1.0 + t) * Identity(blocks_[i]);
    }
  };
  shift_in(s);
  shift_in(z);
  ComputeScaling(s, z);

  const int max_it = set_.max_iterations;
  int small_steps = 0;
  for (int it = 0; it <= max_it; ++it) {
    rep.iterations = it;
    const VectorXd rx = c_ - ApplyAt(z);
    ConeVec rz = s;
    Axpy(-1.0, h, rz);
    Axpy(-1.0, ApplyA(x), rz);
    const double gap = Dot(s, z);
    const double pcost = c_.dot(x);
    const double dcost = -Dot(h, z);
    const double pres = Norm(rz) / hnorm;
    const double dres = rx.norm() / cnorm;
    rep.primal_residual = pres;
    rep.dual_residual = dres;
    rep.gap = gap;
    rep.dual_value = dcost;
    const double scale = std::max({1.0, std::abs(pcost), std::abs(dcost)});
    if (!std::isfinite(pres + dres + gap + pcost + dcost)) {
      return finish(SolveStatus::kNumericalFailure, x, "non-finite iterate");
    }
    if (set_.verbose) {
      std::fprintf(stderr, "%3d  pcost % .8e  dcost % .8e  gap %.2e  pres %.2e  dres %.2e\n", it,
                   pcost, dcost, gap, pres, dres);
    }
    if (pres <= set_.feas_tol && dres <= set_.feas_tol && gap <= set_.rel_gap_tol * scale &&
        SlackInvariantHolds(x)) {
      return finish(SolveStatus::kOptimal, x, "");
    }
    // Infeasibility certificates.
    const double hz = Dot(h, z);
    if (hz < 0 && ApplyAt(z).norm() <= set_.feas_tol * -hz && pres > 1e-4) {
      return finish(SolveStatus::kInfeasible, x, "primal infeasibility certificate");
    }
    const double cx = c_.dot(x);
    if (cx < 0 && dres > 1e-4) {
      ConeVec ax = ApplyA(x / -cx);
      double viol = -kInf;
      for (size_t i = 0; i < blocks_.size(); ++i) viol = std::max(viol, Violation(blocks_[i], ax[i]));
      if (viol <= set_.feas_tol) {
        return finish(SolveStatus::kUnbounded, x, "dual infeasibility certificate");
      }
    }
    auto stalled = [&](const char* why) {
      const bool near = pres <= 1e-6 && dres <= 1e-6 && gap <= 1e-6 * scale;
      if (near && SlackInvariantHolds(x)) {
        rep.reduced_accuracy = true;
        return finish(SolveStatus::kOptimal, x, why);
      }
      std::ostringstream os;
      os << why << " (pres " << pres << ", dres " << dres << ", gap " << gap << ")";
      return finish(SolveStatus::kNumericalFailure, x, os.str());
    };
    if (it == max_it) return stalled("iteration limit reached");

    if (!Factorize(NewtonMatrix())) return stalled("Newton system is singular");
    const double mu = gap / degree_;

    // Predictor.
    ConeVec d = Scaled(-1.0, lambda_);
    VectorXd dxa;
    ConeVec dsa, dza;
    NewtonSolve(rx, rz, d, dxa, dsa, dza);
    const double alpha_a = std::min(1.0, StepLength(dsa, dza));
    ConeVec sa = lambda_, za = lambda_;
    Axpy(alpha_a, dsa, sa);
    Axpy(alpha_a, dza, za);
    const double ratio = std::clamp(Dot(sa, za) / std::max(gap, 1e-300), 0.0, 1.0);
    const double sigma = ratio * ratio * ratio;

    // Corrector.
    for (size_t i = 0; i < blocks_.size(); ++i) {
      const Block& b = blocks_[i];
      MatrixXd r = sigma * mu * Identity(b) - Product(b, dsa[i], dza[i]);
      d[i] = -lambda_[i] + InverseProduct(b, lambda_[i], r);
    }
    VectorXd dx;
    ConeVec ds, dz;
    NewtonSolve(rx, rz, d, dx, ds, dz);
    const double amax = StepLength(ds, dz);
    const double alpha = std::min(1.0, kStepFraction * amax);
    if (set_.verbose) {
      std::fprintf(stderr, "     sigma %.2e  alpha %.2e  |dx| %.2e  |ds| %.2e  |dz| %.2e\n", sigma,
                   alpha, dx.norm(), Norm(ds), Norm(dz));
    }
    if (!(alpha > 1e-12)) {
      if (++small_steps >= 3) return stalled("step length collapsed");
    } else {
      small_steps = 0;
    }

    // s and z are updated additively so the residuals stay exact; the
    // scaling is updated from the scaled step.
    x += alpha * dx;
    ConeVec st = lambda_, zt = lambda_;
    Axpy(alpha, ds, st);
    Axpy(alpha, dz, zt);
    for (size_t i = 0; i < blocks_.size(); ++i) {
      s[i] += alpha * Wt(blocks_[i], scal_[i], ds[i]);
      z[i] += alpha * Winv(blocks_[i], scal_[i], dz[i]);
    }
    UpdateScaling(s, z, st, zt);
  }
  return finish(SolveStatus::kNumericalFailure, x, "unreachable");
}

}  // namespace

SolveReport InteriorPointSolver::Solve(const ConicProgram& p, const SolverSettings& s) const {
  p.Validate();
  s.Validate();
  Engine engine(p, s);
  return engine.Run();
}

}  // namespace drro
