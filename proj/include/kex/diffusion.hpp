#pragma once

#include "kex/kernels.hpp"
#include "kex/spectral.hpp"

namespace kex {

// Trained diffusion embedding: gaussian affinity W on the training set,
// densities S_i = sum_j W_ij mu_j, total mass, and the spectrum of the
// diffusion kernel k(x, y) = w(x, y) / sqrt(S(x) S(y)). The spectrum keeps
// the trivial top eigenpair (1, sqrt(S/S_total)); the three embedding
// variants exclude it.
struct DiffusionModel {
  MeasuredSet train;
  double epsilon = 0.0;
  double eta = 0.0;
  KernelMatrix weight;         // W on train x train
  Eigen::VectorXd densities;   // S_i, strictly positive
  double total_mass = 0.0;     // S = sum_i S_i mu_i
  SpectralModel spectra;       // eigenvalues in (0, 1], top pair trivial
  Eigen::MatrixXd standard_dr;    // psi~_j = sqrt(lambda_j) psi_j, j >= 1
  Eigen::MatrixXd weighted_dr;    // u_j = sqrt(S)   * psi~_j
  Eigen::MatrixXd normalized_dr;  // v_j = psi~_j / sqrt(S)
  double trivial_residual = 0.0;  // eigen-equation residual of sqrt(S/S_total)
  double trivial_match = 0.0;     // deviation of the top eigenfunction from it

  Index embedding_dim() const { return standard_dr.cols(); }
};

DiffusionModel diffusion_fit(const MeasuredSet& train, double epsilon, double eta = 0.0,
                             double rank_tol = kDefaultRankTol);

// m(x, y) = w(x, y) / S(x); asymmetric, row-stochastic in the mu-weighted
// sense. Returned without a Mercer certificate.
KernelMatrix random_walk_kernel(const DiffusionModel& m);

// Out-of-sample rows for the three embedding variants. Weighted rows follow
// the quadrature u_j(z) = (1/lambda_j) sum_i w(z, x_i) v_j(x_i) mu_i; the
// standard and normalized rows rescale by the updated density of z over the
// combined set (training density plus test-block density).
struct DiffusionExtension {
  Eigen::MatrixXd weighted;    // M x r
  Eigen::MatrixXd standard;    // weighted / sqrt(updated density)
  Eigen::MatrixXd normalized;  // weighted / updated density
  Eigen::VectorXd updated_densities;
};

DiffusionExtension diffusion_extend(const DiffusionModel& model, const MeasuredSet& test);

enum class MultiplierDirection { forward, inverse, squared };

// forward: sqrt(S) * f, inverse: f / sqrt(S), squared: S * f
Eigen::VectorXd multiplier(const Eigen::Ref<const Eigen::VectorXd>& values,
                           const Eigen::Ref<const Eigen::VectorXd>& densities,
                           MultiplierDirection direction);

// Quadrature identities that make the extension consistent on training data:
// the affinity kernel maps v_j to lambda_j u_j, and the density-normalized
// kernel a(x, y) = w(x, y)/(S(x) S(y)) maps u_j back to lambda_j v_j.
struct ExchangeIdentityReport {
  double max_forward_error = 0.0;
  double max_backward_error = 0.0;
};

ExchangeIdentityReport exchange_identity_check(const DiffusionModel& m);

}  // namespace kex
