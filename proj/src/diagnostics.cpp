#include "kex/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace kex {

namespace {

// eigenvalues of the mu-weighted operator of a symmetric kernel block
Eigen::VectorXd weighted_eigenvalues(const RowMatrixXd& K, const Eigen::VectorXd& mu) {
  const Eigen::VectorXd root_mu = mu.cwiseSqrt();
  const Eigen::MatrixXd B =
      root_mu.asDiagonal() * (0.5 * (K + K.transpose())) * root_mu.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw numerical_error("eigenvalue computation failed");
  }
  return es.eigenvalues().reverse();
}

double padded(const Eigen::VectorXd& v, Index i) { return i < v.size() ? v[i] : 0.0; }

double avg_distance_from_residual(const RowMatrixXd& K0, const SplitView& view) {
  const Eigen::VectorXd& mu = view.parent().weights();
  double acc = 0.0;
  for (Index a : view.test_indices()) {
    for (Index b : view.test_indices()) {
      const double d2 = K0(a, a) + K0(b, b) - 2.0 * K0(a, b);
      acc += std::max(d2, 0.0) * mu[a] * mu[b];
    }
  }
  return std::sqrt(std::max(acc, 0.0)) / total_volume(view.parent());
}

}  // namespace

double average_kernel_distance(const KernelMatrix& k, const KernelMatrix& k_hat,
                               const SplitView& view, double psd_tol) {
  const Index n = view.parent().size();
  if (!k.square() || k.rows() != n || k_hat.rows() != n || k_hat.cols() != n) {
    throw dimension_error("kernels do not cover the split's parent set");
  }
  const RowMatrixXd K0 = k.values() - k_hat.values();
  const Eigen::VectorXd ev = weighted_eigenvalues(K0, view.parent().weights());
  const Eigen::VectorXd ek = weighted_eigenvalues(k.values(), view.parent().weights());
  const double scale = std::max(ek[0], 0.0);
  if (ev[ev.size() - 1] < -psd_tol * std::max(scale, 1e-300)) {
    throw numerical_error("k - k_hat is not positive semi-definite within tolerance");
  }
  return avg_distance_from_residual(K0, view);
}

ErrorReport error_bounds(const ResidualDecomposition& r, const SplitView& view) {
  if (r.k0.rows() != view.parent().size()) {
    throw dimension_error("residual does not cover the split's parent set");
  }
  ErrorReport rep;
  rep.s = r.s;
  rep.spec_radius_k0 = r.k0_norm2;
  rep.vol_X = total_volume(view.parent());
  rep.vol_Z = view.test_volume();

  const Eigen::VectorXd& mu = view.parent().weights();
  double tr = 0.0;
  for (Index i = 0; i < r.k0.rows(); ++i) tr += r.k0(i, i) * mu[i];
  rep.trace_k0 = std::max(tr, 0.0);

  rep.avg_distance = avg_distance_from_residual(r.k0.values(), view);
  rep.trace_bound = std::sqrt(2.0 * rep.vol_Z) / rep.vol_X * std::sqrt(rep.trace_k0);
  rep.spectral_bound = std::sqrt(2.0 * static_cast<double>(rep.s) * rep.vol_Z) / rep.vol_X *
                       std::sqrt(rep.spec_radius_k0);
  rep.chain_ok = rep.avg_distance <= rep.trace_bound + 1e-10 &&
                 rep.trace_bound <= rep.spectral_bound + 1e-10;
  return rep;
}

SpectrumComparison spectrum_comparison(const SpectralModel& full_spectra,
                                       const ExtendedEmbedding& e, const ExtensionModel& model,
                                       const SplitView& view, double tol) {
  const MeasuredSet& X = view.parent();
  const Index d = model.rank();
  if (e.features.rows() != X.size() || full_spectra.base().size() != X.size()) {
    throw dimension_error("spectrum comparison inputs do not share a point set");
  }

  const Eigen::VectorXd lambda = full_spectra.eigenvalues();
  const Eigen::VectorXd sigma = model.spectra.eigenvalues();
  const double lambda1 = lambda[0];

  // spectrum of k_hat on the full set
  Eigen::VectorXd gamma = weighted_eigenvalues(e.extended_kernel.values(), X.weights());
  Index gd = 0;
  while (gd < gamma.size() && gamma[gd] > full_spectra.rank_tol() * lambda1) ++gd;
  gamma.conservativeResize(gd);

  // J = sum over test points of Vhat(z) Vhat(z)^T mu(z), Vhat = Sigma^{-1/2} Psi_hat
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(d, d);
  const Eigen::VectorXd inv_root_sigma = sigma.cwiseSqrt().cwiseInverse();
  for (Index z : view.test_indices()) {
    const Eigen::VectorXd vhat = e.features.row(z).transpose().cwiseProduct(inv_root_sigma);
    J.noalias() += X.weights()[z] * vhat * vhat.transpose();
  }

  // t = Psi^T J Psi on the training set; l = train kernel + t
  const Eigen::MatrixXd& psi = model.features.values();
  RowMatrixXd T = psi * J * psi.transpose();
  T = 0.5 * (T + T.transpose()).eval();
  SpectrumComparison out{lambda,
                         gamma,
                         sigma,
                         std::move(J),
                         KernelMatrix(T),
                         KernelMatrix(RowMatrixXd(model.train_kernel.values() + T)),
                         0.0,
                         0.0,
                         0.0};

  const Eigen::VectorXd t_spec = weighted_eigenvalues(T, model.train.weights());
  out.t_norm2 = std::max(t_spec[0], 0.0);

  // |k0|_2 from the reconstructed full kernel (tail dropped by rank_tol is
  // negligible against tol * lambda1)
  const FeatureMap full_features(full_spectra);
  const RowMatrixXd K0 =
      reconstruct_kernel(full_features).values() - e.extended_kernel.values();
  const Eigen::VectorXd k0_spec = weighted_eigenvalues(K0, X.weights());
  out.k0_norm2 = std::max(k0_spec[0], 0.0);

  // spectrum identity: spec(l on train) = spec(k_hat on X)
  const Eigen::VectorXd l_spec = weighted_eigenvalues(out.l_kernel.values(),
                                                      model.train.weights());
  const Index cmp = std::max(l_spec.size(), out.gamma.size());
  for (Index i = 0; i < cmp; ++i) {
    out.spectrum_identity_error = std::max(
        out.spectrum_identity_error, std::abs(padded(l_spec, i) - padded(out.gamma, i)));
  }
  const double slack = tol * lambda1;
  if (out.spectrum_identity_error > slack) {
    throw numerical_error("spectrum of train kernel + t deviates from the extended kernel's "
                          "spectrum by " +
                          std::to_string(out.spectrum_identity_error));
  }

  // monotonicity gaps
  const Index m = out.lambda.size();
  for (Index j = 0; j < m; ++j) {
    const double lam = out.lambda[j];
    if (j < d) {
      const double gap_lg = lam - padded(out.gamma, j);
      if (gap_lg < -slack || gap_lg > out.k0_norm2 + slack) {
        throw numerical_error("eigenvalue gap lambda - gamma out of bounds at index " +
                              std::to_string(j));
      }
      const double gap_gs = padded(out.gamma, j) - out.sigma[j];
      if (gap_gs < -slack || gap_gs > out.t_norm2 + slack) {
        throw numerical_error("eigenvalue gap gamma - sigma out of bounds at index " +
                              std::to_string(j));
      }
    } else if (lam < -slack || lam > out.k0_norm2 + slack) {
      throw numerical_error("tail eigenvalue exceeds the residual norm at index " +
                            std::to_string(j));
    }
  }
  return out;
}

PerturbationEstimate perturbation_estimate(const SpectralModel& full_spectra,
                                           const Eigen::MatrixXd& M, double gap_tol) {
  const Index m = full_spectra.rank();
  if (M.rows() != m || M.cols() != m) {
    throw dimension_error("projector shape does not match the spectrum");
  }
  const Eigen::VectorXd& lam = full_spectra.eigenvalues();
  const Eigen::MatrixXd& V = full_spectra.eigenfunctions();
  const double lambda1 = lam[0];

  PerturbationEstimate out;
  out.M = M;
  out.gamma_hat.resize(m);
  out.g_hat = V;
  for (Index i = 0; i < m; ++i) {
    out.gamma_hat[i] = lam[i] * (1.0 - M(i, i));
    double min_gap = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < m; ++j) {
      if (j != i) min_gap = std::min(min_gap, std::abs(lam[i] - lam[j]));
    }
    if (m > 1 && min_gap < gap_tol * lambda1) {
      out.degenerate.push_back(i);  // eigenfunction row left at zeroth order
      continue;
    }
    for (Index j = 0; j < m; ++j) {
      if (j == i) continue;
      const double coeff = M(i, j) * std::sqrt(lam[i] * lam[j]) / (lam[i] - lam[j]);
      out.g_hat.col(i) -= coeff * V.col(j);
    }
  }
  return out;
}

PerturbationScaling perturbation_scaling(const ExtendedEmbedding& e,
                                         const ResidualDecomposition& r, double rank_tol) {
  const MeasuredSet& X = e.full.parent();
  const Eigen::VectorXd& mu = X.weights();

  // reference spectrum of k_hat
  Eigen::VectorXd gamma = weighted_eigenvalues(e.extended_kernel.values(), mu);
  for (Index i = 0; i < gamma.size(); ++i) gamma[i] = std::max(gamma[i], 0.0);

  PerturbationScaling out;
  for (std::size_t si = 0; si < out.scales.size(); ++si) {
    const double t = out.scales[si];
    KernelMatrix kt(RowMatrixXd(e.extended_kernel.values() + t * r.k0.values()));
    validate_mercer(kt);
    if (!kt.certificate()->certified) {
      throw numerical_error("scaled kernel failed Mercer validation");
    }
    const SpectralModel spectra_t = spectral_decompose(kt, X, rank_tol);
    const Eigen::MatrixXd A =
        e.features.transpose() * mu.asDiagonal() * spectra_t.eigenfunctions();
    const Eigen::MatrixXd C =
        A * spectra_t.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();
    const Index mt = spectra_t.rank();
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(mt, mt) - C.transpose() * C;

    double err = 0.0;
    for (Index i = 0; i < mt; ++i) {
      const double gh = spectra_t.eigenvalues()[i] * (1.0 - M(i, i));
      err = std::max(err, std::abs(padded(gamma, i) - gh));
    }
    out.max_error[si] = err;
  }
  out.ratios[0] = out.max_error[0] / std::max(out.max_error[1], 1e-300);
  out.ratios[1] = out.max_error[1] / std::max(out.max_error[2], 1e-300);
  out.order = 0.5 * (std::log2(out.ratios[0]) + std::log2(out.ratios[1]));
  return out;
}

}  // namespace kex
