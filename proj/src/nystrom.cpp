#include "kex/nystrom.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "kex/rng.hpp"
#include "kex/simd.hpp"

namespace kex {

ExtensionModel fit(const MeasuredSet& train, const KernelSpec& spec, double rank_tol) {
  KernelMatrix k = build_kernel(spec, train, train);
  const MercerCertificate cert = validate_mercer(k);
  if (!cert.certified) {
    throw numerical_error("training kernel failed Mercer validation (min eigenvalue " +
                          std::to_string(cert.min_eigenvalue) + ", symmetry defect " +
                          std::to_string(cert.symmetry_defect) + ")");
  }
  SpectralModel spectra = spectral_decompose(k, train, rank_tol);
  FeatureMap features(spectra);
  return ExtensionModel{train, spec, std::move(k), std::move(spectra), std::move(features)};
}

namespace {

ExtendedEmbedding extend_from_cross(const ExtensionModel& model, const SplitView& full,
                                    const RowMatrixXd& cross) {
  const Index n = full.parent().size();
  const Index nt = model.train.size();
  const Index d = model.rank();
  const Eigen::VectorXd& mu = model.train.weights();
  const Eigen::MatrixXd& psi = model.features.values();
  const Eigen::VectorXd& sigma = model.spectra.eigenvalues();

  Eigen::MatrixXd feats(n, d);
  for (Index i = 0; i < n; ++i) {
    const double* row = cross.row(i).data();
    for (Index j = 0; j < d; ++j) {
      feats(i, j) =
          simd::dot3(row, psi.col(j).data(), mu.data(), static_cast<std::size_t>(nt)) /
          sigma[j];
    }
  }
  KernelMatrix k_hat(RowMatrixXd(feats * feats.transpose()));
  validate_mercer(k_hat);
  return ExtendedEmbedding{full, std::move(feats), std::move(k_hat)};
}

}  // namespace

ExtendedEmbedding extend(const ExtensionModel& model, const SplitView& full) {
  if (!full.train_set().same_data(model.train)) {
    throw dimension_error("split's training side differs from the fitted training set");
  }
  if (!model.spec.evaluable()) {
    throw config_error(
        "a precomputed kernel cannot be evaluated at unseen points; use extend_with_kernel");
  }
  const RowMatrixXd cross = build_kernel(model.spec, full.parent(), model.train).values();
  return extend_from_cross(model, full, cross);
}

ExtendedEmbedding extend_with_kernel(const ExtensionModel& model, const SplitView& full,
                                     const KernelMatrix& full_kernel) {
  if (!full.train_set().same_data(model.train)) {
    throw dimension_error("split's training side differs from the fitted training set");
  }
  if (!full_kernel.square() || full_kernel.rows() != full.parent().size()) {
    throw dimension_error("full kernel does not cover the split's parent set");
  }
  const auto& tr = full.train_indices();
  RowMatrixXd cross(full.parent().size(), static_cast<Index>(tr.size()));
  for (Index i = 0; i < cross.rows(); ++i) {
    for (std::size_t j = 0; j < tr.size(); ++j) {
      cross(i, static_cast<Index>(j)) = full_kernel(i, tr[j]);
    }
  }
  // consistency: the supplied kernel must restrict to the fitted one
  double max_dev = 0.0;
  for (std::size_t a = 0; a < tr.size(); ++a) {
    for (std::size_t b = 0; b < tr.size(); ++b) {
      max_dev = std::max(max_dev, std::abs(cross(tr[a], static_cast<Index>(b)) -
                                           model.train_kernel(static_cast<Index>(a),
                                                              static_cast<Index>(b))));
    }
  }
  if (max_dev > kDefaultSymTol * std::max(1.0, model.train_kernel.certificate()
                                                   ? model.train_kernel.certificate()->max_abs_entry
                                                   : 1.0)) {
    throw dimension_error("full kernel disagrees with the fitted training kernel");
  }
  return extend_from_cross(model, full, cross);
}

const KernelMatrix& extended_kernel(const ExtendedEmbedding& e) { return e.extended_kernel; }

ResidualDecomposition residual(const KernelMatrix& full_kernel, const ExtendedEmbedding& e,
                               const SpectralModel& full_spectra, double psd_tol) {
  const MeasuredSet& X = full_spectra.base();
  const Index n = X.size();
  if (!full_kernel.square() || full_kernel.rows() != n || e.features.rows() != n) {
    throw dimension_error("residual inputs do not share a common point set");
  }
  const double lambda1 = full_spectra.eigenvalues()[0];

  RowMatrixXd K0 = full_kernel.values() - e.extended_kernel.values();
  K0 = 0.5 * (K0 + K0.transpose()).eval();

  const Eigen::VectorXd root_mu = X.weights().cwiseSqrt();
  const Eigen::MatrixXd B0 = root_mu.asDiagonal() * K0 * root_mu.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B0);
  if (es.info() != Eigen::Success) {
    throw numerical_error("residual eigenvalue decomposition failed");
  }
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -psd_tol * lambda1) {
    throw numerical_error("residual kernel is not positive semi-definite within tolerance "
                          "(min weighted eigenvalue " +
                          std::to_string(min_eig) + ")");
  }

  ResidualDecomposition out{KernelMatrix(std::move(K0)), lambda1, 0.0, 0, std::nullopt,
                            Eigen::MatrixXd(), Eigen::MatrixXd()};
  out.k0_norm2 = std::max(es.eigenvalues().maxCoeff(), 0.0);

  MercerCertificate cert;
  cert.min_eigenvalue = min_eig;
  cert.max_eigenvalue = out.k0_norm2;
  cert.psd_tol = psd_tol;
  cert.symmetry_defect = 0.0;  // symmetrized above
  cert.max_abs_entry = out.k0.values().cwiseAbs().maxCoeff();
  cert.certified = true;
  out.k0.set_certificate(cert);

  // residual spectrum; negatives within tolerance were clipped by the cut
  const double cut = full_spectra.rank_tol() * lambda1;
  Index s = 0;
  for (Index i = 0; i < n; ++i) {
    if (es.eigenvalues()[i] > cut) ++s;
  }
  out.s = s;
  if (s > 0) {
    Eigen::VectorXd etas(s);
    Eigen::MatrixXd alphas(n, s);
    Index col = 0;
    for (Index i = n - 1; i >= 0; --i) {
      const double eta = es.eigenvalues()[i];
      if (!(eta > cut)) continue;
      etas[col] = eta;
      alphas.col(col) = es.eigenvectors().col(i).cwiseQuotient(root_mu);
      // sign convention as in spectral_decompose
      const double scale = alphas.col(col).cwiseAbs().maxCoeff();
      for (Index r = 0; r < n; ++r) {
        if (std::abs(alphas(r, col)) > 1e-12 * scale) {
          if (alphas(r, col) < 0.0) alphas.col(col) = -alphas.col(col);
          break;
        }
      }
      ++col;
    }
    out.residual_spectra.emplace(X, std::move(etas), std::move(alphas),
                                 full_spectra.rank_tol());
  }

  // transfer matrix in the L^2 eigenbasis: a_ij = <psi_hat_i, v_j>_mu,
  // c_ij = a_ij / sqrt(lambda_j)
  const Eigen::MatrixXd A = e.features.transpose() * X.weights().asDiagonal() *
                            full_spectra.eigenfunctions();
  out.transfer = A * full_spectra.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();
  const Index m = full_spectra.rank();
  out.projector = Eigen::MatrixXd::Identity(m, m) - out.transfer.transpose() * out.transfer;
  return out;
}

ExactnessReport exactness_check(const ResidualDecomposition& r, double tol) {
  ExactnessReport rep;
  rep.s = r.s;
  rep.k0_norm2 = r.k0_norm2;
  rep.tol_used = tol * r.lambda1;
  rep.exact = r.k0_norm2 <= rep.tol_used;
  return rep;
}

MinimalNormReport minimal_norm_check(const ExtendedEmbedding& e,
                                     const ResidualDecomposition& r,
                                     const SpectralModel& full_spectra, int trials,
                                     std::uint64_t seed) {
  MinimalNormReport rep;
  if (r.s == 0) return rep;  // vacuous without a residual space

  const Index d = e.features.cols();
  const Index s = r.s;
  const FeatureMap xi(*r.residual_spectra);  // xi_j = sqrt(eta_j) alpha_j

  Rng rng(seed);
  rep.min_norm_gap = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd c(d), h(s);
    for (Index j = 0; j < d; ++j) c[j] = rng.normal();
    for (Index j = 0; j < s; ++j) h[j] = rng.normal();
    const Eigen::VectorXd tf = e.features * c;   // T(f) sampled on the full set
    const Eigen::VectorXd g = xi.values() * h;   // element of the residual space
    const double tf2 = rkhs_inner(full_spectra, tf, tf);
    const double g2 = rkhs_inner(full_spectra, g, g);
    const double sum2 = rkhs_inner(full_spectra, tf + g, tf + g);
    rep.max_identity_violation =
        std::max(rep.max_identity_violation, std::abs(sum2 - tf2 - g2));
    rep.min_norm_gap = std::min(rep.min_norm_gap, sum2 - tf2);
    ++rep.trials;
  }
  return rep;
}

}  // namespace kex
