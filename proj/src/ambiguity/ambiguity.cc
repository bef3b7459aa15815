#include "drro/ambiguity.h"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "drro/conic.h"

namespace drro {
namespace {

bool IsSymmetric(const MatrixXd& S) {
  return S.rows() == S.cols() && (S - S.transpose()).norm() <= 1e-12 * std::max(1.0, S.norm());
}

}  // namespace

MatrixXd CholeskyLower(const MatrixXd& S) {
  if (!IsSymmetric(S)) throw std::invalid_argument("covariance must be square and symmetric");
  Eigen::LLT<MatrixXd> llt(0.5 * (S + S.transpose()));
  if (llt.info() != Eigen::Success || !(MinEig(S) > 0)) {
    throw std::invalid_argument("covariance must be positive definite");
  }
  return llt.matrixL();
}

MomentNominal MomentNominal::FromMoments(const VectorXd& mu, const MatrixXd& Sigma) {
  if (Sigma.rows() != mu.size()) throw std::invalid_argument("mean and covariance sizes differ");
  MomentNominal m;
  m.mu = mu;
  m.Sigma = 0.5 * (Sigma + Sigma.transpose());
  m.Lambda = CholeskyLower(Sigma);
  return m;
}

Ellipsoid Ellipsoid::Ball(const VectorXd& center, double radius) {
  const int n = static_cast<int>(center.size());
  return {MatrixXd::Identity(n, n), -center, center.squaredNorm() - radius * radius};
}

DiscreteNominal DiscreteNominal::Uniform(const MatrixXd& points, const Ellipsoid& support) {
  DiscreteNominal d;
  d.points = points;
  d.weights = VectorXd::Constant(points.cols(), 1.0 / std::max<Eigen::Index>(1, points.cols()));
  d.support = support;
  return d;
}

std::vector<std::string> Validate(const MomentNominal& nom) {
  std::vector<std::string> v;
  const int n = nom.dim();
  if (n == 0) v.push_back("nominal dimension must be positive");
  if (nom.Sigma.rows() != n || nom.Sigma.cols() != n) {
    v.push_back("covariance must be n x n");
    return v;
  }
  if (!IsSymmetric(nom.Sigma)) v.push_back("covariance must be symmetric");
  if (!(MinEig(nom.Sigma) > 0)) v.push_back("covariance must be positive definite");
  if (nom.Lambda.rows() != n || nom.Lambda.cols() != n) {
    v.push_back("Cholesky factor must be n x n");
    return v;
  }
  if (!nom.Lambda.isLowerTriangular(0.0)) v.push_back("Cholesky factor must be lower triangular");
  if (n > 0 && !(nom.Lambda.diagonal().minCoeff() > 0)) {
    v.push_back("Cholesky factor must have a positive diagonal");
  }
  if ((nom.Lambda * nom.Lambda.transpose() - nom.Sigma).norm() >
      1e-10 * std::max(1.0, nom.Sigma.norm())) {
    v.push_back("Cholesky factor does not reproduce the covariance");
  }
  return v;
}

std::vector<std::string> Validate(const Ellipsoid& e) {
  std::vector<std::string> v;
  const auto n = e.P2.rows();
  if (e.P2.cols() != n || e.q2.size() != n || n == 0) {
    v.push_back("support ellipsoid has inconsistent dimensions");
    return v;
  }
  if (!IsSymmetric(e.P2) || !(MinEig(e.P2) > 0)) {
    v.push_back("support shape matrix must be symmetric positive definite");
    return v;
  }
  const double inner = e.q2.dot(e.P2.ldlt().solve(e.q2)) - e.c2;
  if (!(inner > 0)) v.push_back("support ellipsoid has no interior point");
  return v;
}

std::vector<std::string> Validate(const DiscreteNominal& nom) {
  std::vector<std::string> v = Validate(nom.support);
  if (nom.count() == 0) v.push_back("discrete nominal needs at least one atom");
  if (nom.weights.size() != nom.count()) {
    v.push_back("one weight per atom is required");
    return v;
  }
  if (nom.count() > 0 && nom.weights.minCoeff() < 0) v.push_back("weights must be nonnegative");
  if (std::abs(nom.weights.sum() - 1.0) > 1e-12) v.push_back("weights must sum to 1");
  if (!v.empty() || nom.support.P2.rows() != nom.dim()) {
    if (nom.support.P2.rows() != nom.dim()) v.push_back("atoms and support differ in dimension");
    return v;
  }
  for (int i = 0; i < nom.count(); ++i) {
    if (nom.support.Evaluate(nom.points.col(i)) > 1e-9) {
      std::ostringstream os;
      os << "atom " << i << " lies outside the support";
      v.push_back(os.str());
    }
  }
  return v;
}

std::vector<std::string> Validate(const AmbiguityBall& ball) {
  std::vector<std::string> v =
      std::visit([](const auto& nom) { return Validate(nom); }, ball.nominal);
  if (!(ball.radius > 0) || !std::isfinite(ball.radius)) {
    v.insert(v.begin(), "radius must be positive");
  }
  return v;
}

MatrixXd SampleGaussian(const MomentNominal& nom, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample count must be at least 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  MatrixXd Z(nom.dim(), count);
  for (int j = 0; j < count; ++j) {
    for (int i = 0; i < nom.dim(); ++i) Z(i, j) = nd(rng);
  }
  return (nom.Lambda * Z).colwise() + nom.mu;
}

double CouplingCost(const MatrixXd& src, const VectorXd& src_weights, const MatrixXd& dst,
                    const VectorXd& dst_weights, const MatrixXd& coupling) {
  if (coupling.rows() != src.cols() || coupling.cols() != dst.cols() ||
      src_weights.size() != src.cols() || dst_weights.size() != dst.cols() ||
      src.rows() != dst.rows()) {
    throw std::invalid_argument("coupling dimensions do not match the distributions");
  }
  if (coupling.size() && coupling.minCoeff() < 0) {
    throw std::invalid_argument("coupling must be nonnegative");
  }
  if ((coupling.rowwise().sum() - src_weights).cwiseAbs().maxCoeff() > 1e-10 ||
      (coupling.colwise().sum().transpose() - dst_weights).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("coupling marginals do not match the weights");
  }
  double total = 0.0;
  for (int i = 0; i < coupling.rows(); ++i) {
    for (int j = 0; j < coupling.cols(); ++j) {
      if (coupling(i, j) != 0.0) total += coupling(i, j) * (src.col(i) - dst.col(j)).squaredNorm();
    }
  }
  return std::sqrt(total);
}

MomentNominal EstimateMoments(const MatrixXd& samples) {
  const auto count = samples.cols();
  if (count < 2) throw std::invalid_argument("need at least two samples to estimate moments");
  const VectorXd mu = samples.rowwise().mean();
  const MatrixXd centered = samples.colwise() - mu;
  MatrixXd Sigma = centered * centered.transpose() / static_cast<double>(count - 1);
  Sigma = 0.5 * (Sigma + Sigma.transpose());
  Eigen::LLT<MatrixXd> llt(Sigma);
  if (llt.info() != Eigen::Success || !(MinEig(Sigma) > 0)) {
    Sigma.diagonal().array() += 1e-8;
  }
  return MomentNominal::FromMoments(mu, Sigma);
}

}  // namespace drro
