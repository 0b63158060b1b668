#include "kex/diffusion.hpp"

#include <cmath>

#include "kex/simd.hpp"

namespace kex {

namespace {

constexpr double kEigenvalueClamp = 1e-10;  // eigenvalues in (1, 1 + clamp] snap to 1

Eigen::VectorXd density_of(const RowMatrixXd& W, const Eigen::VectorXd& mu) {
  Eigen::VectorXd S(W.rows());
  for (Index i = 0; i < W.rows(); ++i) {
    S[i] = simd::dot(W.row(i).data(), mu.data(), static_cast<std::size_t>(mu.size()));
  }
  return S;
}

}  // namespace

DiffusionModel diffusion_fit(const MeasuredSet& train, double epsilon, double eta,
                             double rank_tol) {
  const KernelSpec spec = GaussianSpec{epsilon, eta};
  KernelMatrix W = build_kernel(spec, train, train);

  Eigen::VectorXd S = density_of(W.values(), train.weights());
  for (Index i = 0; i < S.size(); ++i) {
    if (!(S[i] > 0.0)) {
      throw isolated_point_error("training point " + std::to_string(i) +
                                 " has zero density after thresholding");
    }
  }
  const double total_mass = integrate(S, train);

  const Eigen::VectorXd inv_root_S = S.cwiseSqrt().cwiseInverse();
  KernelMatrix K(RowMatrixXd(inv_root_S.asDiagonal() * W.values() * inv_root_S.asDiagonal()));
  const MercerCertificate cert = validate_mercer(K);
  if (!cert.certified) {
    throw numerical_error("diffusion kernel failed Mercer validation (min eigenvalue " +
                          std::to_string(cert.min_eigenvalue) + ")");
  }
  SpectralModel raw = spectral_decompose(K, train, rank_tol);

  // all eigenvalues lie in (0, 1]; clamp harmless overshoot
  Eigen::VectorXd lambdas = raw.eigenvalues();
  for (Index j = 0; j < lambdas.size(); ++j) {
    if (lambdas[j] > 1.0) {
      if (lambdas[j] > 1.0 + kEigenvalueClamp) {
        throw numerical_error("diffusion eigenvalue " + std::to_string(lambdas[j]) +
                              " exceeds 1 beyond tolerance");
      }
      lambdas[j] = 1.0;
    }
  }
  SpectralModel spectra(train, std::move(lambdas), raw.eigenfunctions(), rank_tol);

  // the density carries the trivial eigenpair: k maps sqrt(S/S_total) to itself
  Eigen::VectorXd phi0 = (S / total_mass).cwiseSqrt();
  double trivial_residual = 0.0;
  double trivial_match = 0.0;
  {
    const Eigen::VectorXd image =
        K.values() * train.weights().cwiseProduct(phi0);
    trivial_residual = (image - phi0).cwiseAbs().maxCoeff();
    trivial_match = (spectra.eigenfunctions().col(0) - phi0).cwiseAbs().maxCoeff();
    if (trivial_residual > 1e-6) {
      throw numerical_error("density eigenfunction fails the eigen-equation (residual " +
                            std::to_string(trivial_residual) + ")");
    }
  }

  // embedding variants drop the trivial coordinate
  const Index r = spectra.rank() - 1;
  Eigen::MatrixXd standard_dr(train.size(), r);
  Eigen::MatrixXd weighted_dr(train.size(), r);
  Eigen::MatrixXd normalized_dr(train.size(), r);
  const Eigen::VectorXd root_S = S.cwiseSqrt();
  for (Index j = 0; j < r; ++j) {
    standard_dr.col(j) =
        std::sqrt(spectra.eigenvalues()[j + 1]) * spectra.eigenfunctions().col(j + 1);
    weighted_dr.col(j) = standard_dr.col(j).cwiseProduct(root_S);
    normalized_dr.col(j) = standard_dr.col(j).cwiseQuotient(root_S);
  }

  return DiffusionModel{train,
                        epsilon,
                        eta,
                        std::move(W),
                        std::move(S),
                        total_mass,
                        std::move(spectra),
                        std::move(standard_dr),
                        std::move(weighted_dr),
                        std::move(normalized_dr),
                        trivial_residual,
                        trivial_match};
}

KernelMatrix random_walk_kernel(const DiffusionModel& m) {
  RowMatrixXd walk = m.weight.values();
  for (Index i = 0; i < walk.rows(); ++i) walk.row(i) /= m.densities[i];
  return KernelMatrix(std::move(walk));
}

DiffusionExtension diffusion_extend(const DiffusionModel& model, const MeasuredSet& test) {
  if (test.dim() != model.train.dim()) {
    throw dimension_error("test points have ambient dimension " + std::to_string(test.dim()) +
                          ", model expects " + std::to_string(model.train.dim()));
  }
  const KernelSpec spec = GaussianSpec{model.epsilon, model.eta};
  const RowMatrixXd cross = build_kernel(spec, test, model.train).values();  // M x N
  const RowMatrixXd among = build_kernel(spec, test, test).values();        // M x M

  const Index m_test = test.size();
  const Index n = model.train.size();
  const Index r = model.embedding_dim();
  const Eigen::VectorXd& mu = model.train.weights();

  DiffusionExtension out;
  out.weighted.resize(m_test, r);
  out.updated_densities.resize(m_test);

  for (Index z = 0; z < m_test; ++z) {
    const double* row = cross.row(z).data();
    const double train_density = simd::dot(row, mu.data(), static_cast<std::size_t>(n));
    if (!(train_density > 0.0)) {
      throw isolated_point_error("test point " + std::to_string(z) +
                                 " has zero cross-density: every training affinity fell "
                                 "below the threshold");
    }
    for (Index j = 0; j < r; ++j) {
      out.weighted(z, j) =
          simd::dot3(row, model.normalized_dr.col(j).data(), mu.data(),
                     static_cast<std::size_t>(n)) /
          model.spectra.eigenvalues()[j + 1];
    }
    // density of z over the combined set: training part plus test block
    out.updated_densities[z] =
        train_density + simd::dot(among.row(z).data(), test.weights().data(),
                                  static_cast<std::size_t>(m_test));
  }

  out.standard = out.weighted.array().colwise() /
                 out.updated_densities.array().sqrt();
  out.normalized = out.weighted.array().colwise() / out.updated_densities.array();
  return out;
}

Eigen::VectorXd multiplier(const Eigen::Ref<const Eigen::VectorXd>& values,
                           const Eigen::Ref<const Eigen::VectorXd>& densities,
                           MultiplierDirection direction) {
  if (values.size() != densities.size()) {
    throw dimension_error("multiplier needs one density per value");
  }
  for (Index i = 0; i < densities.size(); ++i) {
    if (!(densities[i] > 0.0)) {
      throw isolated_point_error("density " + std::to_string(i) + " is not positive");
    }
  }
  switch (direction) {
    case MultiplierDirection::forward:
      return values.cwiseProduct(densities.cwiseSqrt());
    case MultiplierDirection::inverse:
      return values.cwiseQuotient(densities.cwiseSqrt());
    case MultiplierDirection::squared:
      return values.cwiseProduct(densities);
  }
  throw config_error("unknown multiplier direction");
}

ExchangeIdentityReport exchange_identity_check(const DiffusionModel& m) {
  const Index n = m.train.size();
  const Eigen::VectorXd& mu = m.train.weights();
  const RowMatrixXd& W = m.weight.values();

  // a(x, y) = w(x, y) / (S(x) S(y))
  RowMatrixXd A = W;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) A(i, j) /= m.densities[i] * m.densities[j];
  }

  ExchangeIdentityReport rep;
  const Eigen::VectorXd root_S = m.densities.cwiseSqrt();
  for (Index l = 0; l < m.spectra.rank(); ++l) {
    const double lambda = m.spectra.eigenvalues()[l];
    const Eigen::VectorXd tilde_psi =
        std::sqrt(lambda) * m.spectra.eigenfunctions().col(l);
    const Eigen::VectorXd u = tilde_psi.cwiseProduct(root_S);
    const Eigen::VectorXd v = tilde_psi.cwiseQuotient(root_S);

    const Eigen::VectorXd u_from_v = W * mu.cwiseProduct(v) / lambda;
    const Eigen::VectorXd v_from_u = A * mu.cwiseProduct(u) / lambda;
    rep.max_forward_error =
        std::max(rep.max_forward_error, (u_from_v - u).cwiseAbs().maxCoeff());
    rep.max_backward_error =
        std::max(rep.max_backward_error, (v_from_u - v).cwiseAbs().maxCoeff());
  }
  return rep;
}

}  // namespace kex
