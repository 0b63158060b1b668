#pragma once

#include <array>
#include <vector>

#include "kex/nystrom.hpp"

namespace kex {

// Average-distance error of the extension together with its trace and
// spectral-radius upper bounds.
struct ErrorReport {
  double avg_distance = 0.0;    // (1/|X|) sqrt(sum over test pairs of d^2_{k0} mu mu)
  double trace_bound = 0.0;     // sqrt(2 |Z|)/|X| * sqrt(tr k0)
  double spectral_bound = 0.0;  // sqrt(2 s |Z|)/|X| * sqrt(|k0|_2)
  double trace_k0 = 0.0;        // weighted trace, equals the sum of residual eigenvalues
  double spec_radius_k0 = 0.0;
  Index s = 0;
  double vol_X = 0.0;
  double vol_Z = 0.0;
  bool chain_ok = false;  // avg <= trace <= spectral within slack 1e-10
};

// Distance averaged over test pairs only; entries of k - k_hat must form a
// PSD kernel within psd_tol (relative to the largest eigenvalue of k).
double average_kernel_distance(const KernelMatrix& k, const KernelMatrix& k_hat,
                               const SplitView& view, double psd_tol = 1e-8);

ErrorReport error_bounds(const ResidualDecomposition& r, const SplitView& view);

// Spectra of the three kernels involved in an extension run plus the
// auxiliary kernels t and l = train_kernel + t whose spectrum on the training
// set reproduces the spectrum of k_hat on the full set.
struct SpectrumComparison {
  Eigen::VectorXd lambda;  // spectrum of k on X
  Eigen::VectorXd gamma;   // spectrum of k_hat on X
  Eigen::VectorXd sigma;   // spectrum of the training kernel
  Eigen::MatrixXd J;       // sum over test points of Vhat Vhat^T mu, d x d
  KernelMatrix t_kernel;   // t = Psi^T J Psi on the training set
  KernelMatrix l_kernel;   // l = train_kernel + t
  double k0_norm2 = 0.0;
  double t_norm2 = 0.0;
  double spectrum_identity_error = 0.0;  // max |spec(l) - gamma|
};

// Throws numerical_error when an eigenvalue gap bound or the spectrum
// identity is violated beyond tol * lambda_1.
SpectrumComparison spectrum_comparison(const SpectralModel& full_spectra,
                                       const ExtendedEmbedding& e, const ExtensionModel& model,
                                       const SplitView& view, double tol = 1e-8);

// gap below which the first-order eigenfunction formula is meaningless
inline constexpr double kDefaultGapTol = 1e-6;

// First-order eigenpair estimates of k_hat from the spectrum of k and the
// residual projector M: gamma_hat_i = lambda_i (1 - M_ii) and
// g_hat_i = v_i - sum_{j != i} M_ij sqrt(lambda_i lambda_j)/(lambda_i - lambda_j) v_j.
struct PerturbationEstimate {
  Eigen::MatrixXd M;
  Eigen::VectorXd gamma_hat;       // one estimate per full eigenvalue
  Eigen::MatrixXd g_hat;           // N x m; columns listed in `degenerate` stay zeroth-order
  std::vector<Index> degenerate;   // rows whose eigenvalue gap is below gap_tol * lambda_1
};

PerturbationEstimate perturbation_estimate(const SpectralModel& full_spectra,
                                           const Eigen::MatrixXd& M,
                                           double gap_tol = kDefaultGapTol);

// Scaling experiment: shrink the residual kernel by {1, 1/2, 1/4} and measure
// max_i |gamma_i - gamma_hat_i| against the true spectrum of k_hat. A
// quadratic remainder shows as a per-halving error ratio near 4.
struct PerturbationScaling {
  std::array<double, 3> scales{1.0, 0.5, 0.25};
  std::array<double, 3> max_error{};
  std::array<double, 2> ratios{};  // error(1)/error(1/2), error(1/2)/error(1/4)
  double order = 0.0;              // mean log2 of the ratios
};

PerturbationScaling perturbation_scaling(const ExtendedEmbedding& e,
                                         const ResidualDecomposition& r,
                                         double rank_tol = kDefaultRankTol);

}  // namespace kex
