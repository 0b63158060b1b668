#pragma once

#include <cstdint>
#include <optional>

#include "kex/kernels.hpp"
#include "kex/spectral.hpp"

namespace kex {

// Trained out-of-sample extension state: training set, kernel, training
// spectra (sigma_j, v_j) and features (psi_j = sqrt(sigma_j) v_j).
struct ExtensionModel {
  MeasuredSet train;
  KernelSpec spec;
  KernelMatrix train_kernel;
  SpectralModel spectra;
  FeatureMap features;

  Index rank() const { return spectra.rank(); }
};

ExtensionModel fit(const MeasuredSet& train, const KernelSpec& spec,
                   double rank_tol = kDefaultRankTol);

// Features of every point of the full set under the extension quadrature
//   psi_hat_j(x) = (1/sigma_j) sum_{y in train} k(x, y) psi_j(y) mu(y),
// plus the extended kernel k_hat(x, y) = sum_j psi_hat_j(x) psi_hat_j(y).
struct ExtendedEmbedding {
  SplitView full;
  Eigen::MatrixXd features;      // N x d, row i = extended feature vector of x_i
  KernelMatrix extended_kernel;  // k_hat on the full set, Mercer-certified
};

// Evaluates the kernel spec on (full set x training set). The split's train
// side must be the fitted training set. Precomputed specs cannot be evaluated
// at unseen points; use extend_with_kernel instead.
ExtendedEmbedding extend(const ExtensionModel& model, const SplitView& full);

// Same extension, but the kernel on the full set is supplied by the caller
// (covers precomputed kernels). Its train x train block must match the
// fitted kernel.
ExtendedEmbedding extend_with_kernel(const ExtensionModel& model, const SplitView& full,
                                     const KernelMatrix& full_kernel);

const KernelMatrix& extended_kernel(const ExtendedEmbedding& e);

// k_0 = k - k_hat with its spectrum (eta_j, alpha_j), the transfer matrix
// C (c_ij = <psi_hat_i, phi_j>_H, d x m, C C^T = I) and the complementary
// projector M = I - C^T C of rank s = m - d.
struct ResidualDecomposition {
  KernelMatrix k0;
  double lambda1 = 0.0;   // largest eigenvalue of the full kernel; tolerance scale
  double k0_norm2 = 0.0;  // largest eigenvalue of the weighted residual operator
  Index s = 0;
  std::optional<SpectralModel> residual_spectra;  // absent when s == 0
  Eigen::MatrixXd transfer;                       // C
  Eigen::MatrixXd projector;                      // M = I - C^T C
};

// Throws numerical_error when k_0 has an eigenvalue below -psd_tol * lambda1
// (an eigensolver inconsistency, not a theory failure); negatives within
// tolerance are clipped before the residual spectrum is formed.
ResidualDecomposition residual(const KernelMatrix& full_kernel, const ExtendedEmbedding& e,
                               const SpectralModel& full_spectra, double psd_tol = 1e-8);

struct ExactnessReport {
  bool exact = false;
  Index s = 0;
  double k0_norm2 = 0.0;
  double tol_used = 0.0;
};

// exact iff |k_0|_2 <= tol * lambda_1
ExactnessReport exactness_check(const ResidualDecomposition& r, double tol = 1e-8);

struct MinimalNormReport {
  int trials = 0;
  double max_identity_violation = 0.0;  // | |Tf+g|^2 - |Tf|^2 - |g|^2 |
  double min_norm_gap = 0.0;            // min over trials of |Tf+g|^2 - |Tf|^2
};

// Randomized check that the extension is norm-minimal: for f in the training
// space and g in the residual space, |Tf + g|^2_H = |Tf|^2_H + |g|^2_H.
// Vacuous (trials = 0) when s = 0.
MinimalNormReport minimal_norm_check(const ExtendedEmbedding& e,
                                     const ResidualDecomposition& r,
                                     const SpectralModel& full_spectra, int trials,
                                     std::uint64_t seed);

}  // namespace kex
