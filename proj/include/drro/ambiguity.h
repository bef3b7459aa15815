#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace drro {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Nominal distribution on R^n known through its first two moments.
struct MomentNominal {
  VectorXd mu;
  MatrixXd Sigma;
  MatrixXd Lambda;  // lower Cholesky factor of Sigma

  int dim() const { return static_cast<int>(mu.size()); }
  // Throws std::invalid_argument if Sigma is not symmetric PD.
  static MomentNominal FromMoments(const VectorXd& mu, const MatrixXd& Sigma);
};

// {xi : xi' P2 xi + 2 q2' xi + c2 <= 0}.
struct Ellipsoid {
  MatrixXd P2;
  VectorXd q2;
  double c2 = 0.0;

  double Evaluate(const VectorXd& xi) const { return xi.dot(P2 * xi) + 2.0 * q2.dot(xi) + c2; }
  static Ellipsoid Ball(const VectorXd& center, double radius);
};

// Weighted atoms supported on an ellipsoid.
struct DiscreteNominal {
  MatrixXd points;  // n x N, one atom per column
  VectorXd weights;
  Ellipsoid support;

  int dim() const { return static_cast<int>(points.rows()); }
  int count() const { return static_cast<int>(points.cols()); }
  static DiscreteNominal Uniform(const MatrixXd& points, const Ellipsoid& support);
};

// Type-2 Wasserstein ball of radius r around a nominal distribution.
struct AmbiguityBall {
  std::variant<MomentNominal, DiscreteNominal> nominal;
  double radius = 0.0;
};

// Lower-triangular L with positive diagonal and L L' = S.
MatrixXd CholeskyLower(const MatrixXd& S);

// Human-readable descriptions of every broken invariant; empty when valid.
std::vector<std::string> Validate(const MomentNominal& nom);
std::vector<std::string> Validate(const Ellipsoid& e);
std::vector<std::string> Validate(const DiscreteNominal& nom);
std::vector<std::string> Validate(const AmbiguityBall& ball);

// Gaussian draws N(mu, Sigma), one per column, from a seeded mt19937_64.
MatrixXd SampleGaussian(const MomentNominal& nom, int count, std::uint64_t seed);

// sqrt(sum_ij pi_ij |src_i - dst_j|^2): the transport cost of an explicit
// coupling, an upper bound on the type-2 Wasserstein distance.
double CouplingCost(const MatrixXd& src, const VectorXd& src_weights, const MatrixXd& dst,
                    const VectorXd& dst_weights, const MatrixXd& coupling);

// Sample mean and unbiased covariance of the columns; adds 1e-8 I when the
// covariance estimate is singular.
MomentNominal EstimateMoments(const MatrixXd& samples);

}  // namespace drro
