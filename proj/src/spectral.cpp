#include "kex/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "kex/simd.hpp"

namespace kex {

SpectralModel::SpectralModel(MeasuredSet base, Eigen::VectorXd eigenvalues,
                             Eigen::MatrixXd eigenfunctions, double rank_tol)
    : base_(std::move(base)),
      eigenvalues_(std::move(eigenvalues)),
      eigenfunctions_(std::move(eigenfunctions)),
      rank_tol_(rank_tol) {
  if (eigenvalues_.size() == 0) {
    throw numerical_error("spectral model has an empty spectrum");
  }
  if (eigenfunctions_.rows() != base_.size() ||
      eigenfunctions_.cols() != eigenvalues_.size()) {
    throw dimension_error("eigenfunction matrix shape does not match the spectrum");
  }
  for (Index j = 0; j < eigenvalues_.size(); ++j) {
    if (!(eigenvalues_[j] > 0.0)) {
      throw numerical_error("eigenvalues must be strictly positive");
    }
    if (j > 0 && eigenvalues_[j] > eigenvalues_[j - 1]) {
      throw numerical_error("eigenvalues must be sorted decreasingly");
    }
  }
}

namespace {

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12 * scale) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

SpectralModel spectral_decompose(const KernelMatrix& k, const MeasuredSet& s, double rank_tol) {
  if (!k.square() || k.rows() != s.size()) {
    throw dimension_error("kernel block does not match the point set");
  }
  const auto& cert = k.certificate();
  if (!cert || !cert->certified) {
    throw numerical_error("spectral decomposition requires a Mercer-certified kernel");
  }
  const Index n = s.size();
  const Eigen::VectorXd root_mu = s.weights().cwiseSqrt();
  const Eigen::MatrixXd sym = 0.5 * (k.values() + k.values().transpose());
  const Eigen::MatrixXd B =
      root_mu.asDiagonal() * sym * root_mu.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success) {
    throw numerical_error("eigenvalue decomposition failed");
  }
  const double lambda_max = es.eigenvalues().maxCoeff();
  if (!(lambda_max > 0.0)) {
    throw numerical_error("kernel has no positive spectrum");
  }
  const double cut = rank_tol * lambda_max;

  Index kept = 0;
  for (Index i = 0; i < n; ++i) {
    if (es.eigenvalues()[i] > cut && es.eigenvalues()[i] > 0.0) ++kept;
  }
  Eigen::VectorXd lambdas(kept);
  Eigen::MatrixXd funcs(n, kept);
  // Eigen sorts ascending; emit decreasing
  Index out = 0;
  for (Index i = n - 1; i >= 0; --i) {
    const double lam = es.eigenvalues()[i];
    if (!(lam > cut && lam > 0.0)) continue;
    lambdas[out] = lam;
    funcs.col(out) = es.eigenvectors().col(i).cwiseQuotient(root_mu);
    fix_sign(funcs.col(out));
    ++out;
  }
  return SpectralModel(s, std::move(lambdas), std::move(funcs), rank_tol);
}

FeatureMap::FeatureMap(const SpectralModel& m) {
  values_ = m.eigenfunctions() * m.eigenvalues().cwiseSqrt().asDiagonal();
}

FeatureMap feature_map(const SpectralModel& m) { return FeatureMap(m); }

namespace {

Eigen::VectorXd span_coefficients(const SpectralModel& m,
                                  const Eigen::Ref<const Eigen::VectorXd>& f,
                                  double span_tol) {
  const MeasuredSet& base = m.base();
  if (f.size() != base.size()) {
    throw dimension_error("function values do not match the model's base set");
  }
  Eigen::VectorXd c(m.rank());
  for (Index j = 0; j < m.rank(); ++j) {
    c[j] = l2_inner(f, m.eigenfunctions().col(j), base);
  }
  const Eigen::VectorXd residual = f - m.eigenfunctions() * c;
  const double rnorm = std::sqrt(std::max(l2_inner(residual, residual, base), 0.0));
  const double fnorm = std::sqrt(std::max(l2_inner(f, f, base), 0.0));
  if (rnorm > span_tol * fnorm) {
    throw numerical_error("function lies outside the kernel's eigenfunction span (residual " +
                          std::to_string(rnorm) + ")");
  }
  return c;
}

}  // namespace

double rkhs_inner(const SpectralModel& m, const Eigen::Ref<const Eigen::VectorXd>& f,
                  const Eigen::Ref<const Eigen::VectorXd>& g, double span_tol) {
  const Eigen::VectorXd c = span_coefficients(m, f, span_tol);
  const Eigen::VectorXd d = span_coefficients(m, g, span_tol);
  double acc = 0.0;
  for (Index j = 0; j < m.rank(); ++j) acc += c[j] * d[j] / m.eigenvalues()[j];
  return acc;
}

KernelMatrix reconstruct_kernel(const FeatureMap& fm) {
  RowMatrixXd K = fm.values() * fm.values().transpose();
  return KernelMatrix(std::move(K));
}

}  // namespace kex
