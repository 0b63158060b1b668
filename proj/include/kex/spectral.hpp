#pragma once

#include "kex/kernels.hpp"
#include "kex/measured_set.hpp"

namespace kex {

// eigenvalues below rank_tol * lambda_1 are treated as numerical nulls
inline constexpr double kDefaultRankTol = 1e-12;

// Eigensystem of the measure-weighted kernel operator
//   (K f)(x) = sum_y k(x, y) f(y) mu(y),
// eigenfunctions orthonormal in L^2(mu), eigenvalues positive decreasing.
class SpectralModel {
 public:
  SpectralModel(MeasuredSet base, Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenfunctions,
                double rank_tol);

  const MeasuredSet& base() const { return base_; }
  Index rank() const { return eigenvalues_.size(); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  // N x m; column j holds v_j at the base points
  const Eigen::MatrixXd& eigenfunctions() const { return eigenfunctions_; }
  double rank_tol() const { return rank_tol_; }

 private:
  MeasuredSet base_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenfunctions_;
  double rank_tol_;
};

// Solves the weighted eigenproblem through the symmetric surrogate
// B = D^{1/2} K D^{1/2}, D = diag(mu); v = D^{-1/2} u keeps both the
// eigen-equation and L^2(mu)-orthonormality. Sign convention: the first
// component of each eigenfunction that is not negligibly small is positive.
SpectralModel spectral_decompose(const KernelMatrix& k, const MeasuredSet& s,
                                 double rank_tol = kDefaultRankTol);

// phi_j = sqrt(lambda_j) v_j; rows are per-point feature vectors.
class FeatureMap {
 public:
  explicit FeatureMap(const SpectralModel& m);
  const Eigen::MatrixXd& values() const { return values_; }
  Index count() const { return values_.rows(); }
  Index dimension() const { return values_.cols(); }

 private:
  Eigen::MatrixXd values_;
};

FeatureMap feature_map(const SpectralModel& m);

// <f, g>_H = sum_j c_j d_j / lambda_j with c, d the L^2(mu) coefficients.
// Both arguments must lie in the eigenfunction span: the L^2 projection onto
// the span has to reproduce them within span_tol (relative).
double rkhs_inner(const SpectralModel& m, const Eigen::Ref<const Eigen::VectorXd>& f,
                  const Eigen::Ref<const Eigen::VectorXd>& g, double span_tol = 1e-8);

// sum_j phi_j(x) phi_j(y)
KernelMatrix reconstruct_kernel(const FeatureMap& fm);

}  // namespace kex
