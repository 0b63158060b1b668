#include "kex/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "kex/simd.hpp"

namespace kex {

KernelSpec::KernelSpec(GaussianSpec g) : value_(g) {
  if (!std::isfinite(g.epsilon) || g.epsilon <= 0.0) {
    throw config_error("gaussian bandwidth epsilon must be positive");
  }
  if (!std::isfinite(g.eta) || g.eta < 0.0 || g.eta >= 1.0) {
    throw config_error("gaussian threshold eta must lie in [0, 1)");
  }
}

KernelSpec::KernelSpec(LinearSpec l) : value_(l) {}

KernelSpec::KernelSpec(PrecomputedSpec p) : value_(std::move(p)) {
  auto& m = std::get<PrecomputedSpec>(value_).matrix;
  if (m.rows() == 0 || m.cols() == 0) {
    throw config_error("precomputed kernel matrix is empty");
  }
  if (m.rows() == m.cols()) {
    double defect = 0.0;
    double max_abs = 0.0;
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        defect = std::max(defect, std::abs(m(i, j) - m(j, i)));
        max_abs = std::max(max_abs, std::abs(m(i, j)));
      }
    }
    if (defect > kDefaultSymTol * std::max(max_abs, 1.0)) {
      throw numerical_error("precomputed kernel is not symmetric (defect " +
                            std::to_string(defect) + ")");
    }
    m = (0.5 * (m + m.transpose())).eval();
  }
}

std::string KernelSpec::kind_name() const {
  if (is_gaussian()) return "gaussian";
  if (is_linear()) return "linear";
  return "precomputed";
}

KernelMatrix build_kernel(const KernelSpec& spec, const MeasuredSet& a, const MeasuredSet& b) {
  if (a.dim() != b.dim()) {
    throw dimension_error("point sets have different ambient dimensions (" +
                          std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
  const Index n = a.size();
  const Index m = b.size();
  const auto dim = static_cast<std::size_t>(a.dim());
  RowMatrixXd K(n, m);

  if (spec.is_gaussian()) {
    const GaussianSpec& g = spec.gaussian();
    const double inv_eps = 1.0 / g.epsilon;
    for (Index i = 0; i < n; ++i) {
      const double* pa = a.point(i);
      double* row = K.row(i).data();
      for (Index j = 0; j < m; ++j) {
        const double d2 = simd::squared_distance(pa, b.point(j), dim);
        double v = std::exp(-d2 * inv_eps);
        if (v < g.eta) v = 0.0;
        row[j] = v;
      }
    }
  } else if (spec.is_linear()) {
    for (Index i = 0; i < n; ++i) {
      const double* pa = a.point(i);
      double* row = K.row(i).data();
      for (Index j = 0; j < m; ++j) {
        row[j] = simd::dot(pa, b.point(j), dim);
      }
    }
  } else {
    const RowMatrixXd& P = spec.precomputed().matrix;
    if (P.rows() != n || P.cols() != m) {
      throw dimension_error("precomputed kernel has shape " + std::to_string(P.rows()) + "x" +
                            std::to_string(P.cols()) + ", expected " + std::to_string(n) + "x" +
                            std::to_string(m));
    }
    K = P;
  }
  return KernelMatrix(std::move(K));
}

MercerCertificate validate_mercer(KernelMatrix& k, double tol_psd) {
  if (!k.square()) {
    throw dimension_error("Mercer validation needs a square kernel block");
  }
  const RowMatrixXd& K = k.values();
  MercerCertificate cert;
  cert.psd_tol = tol_psd;
  for (Index i = 0; i < K.rows(); ++i) {
    for (Index j = 0; j < K.cols(); ++j) {
      cert.symmetry_defect = std::max(cert.symmetry_defect, std::abs(K(i, j) - K(j, i)));
      cert.max_abs_entry = std::max(cert.max_abs_entry, std::abs(K(i, j)));
    }
  }
  const Eigen::MatrixXd sym = 0.5 * (K + K.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw numerical_error("eigenvalue computation failed during Mercer validation");
  }
  cert.min_eigenvalue = es.eigenvalues().minCoeff();
  cert.max_eigenvalue = es.eigenvalues().maxCoeff();
  const bool symmetric =
      cert.symmetry_defect <= kDefaultSymTol * std::max(cert.max_abs_entry, 1.0);
  const bool psd = cert.min_eigenvalue >= -tol_psd * std::max(cert.max_eigenvalue, 1.0);
  cert.certified = symmetric && psd && std::isfinite(cert.max_abs_entry);
  k.set_certificate(cert);
  return cert;
}

double kernel_distance(const KernelMatrix& k, Index i, Index j) {
  if (!k.square()) throw dimension_error("kernel distance needs a square block");
  if (i < 0 || i >= k.rows() || j < 0 || j >= k.rows()) {
    throw dimension_error("kernel distance index out of range");
  }
  const auto& cert = k.certificate();
  if (!cert || !cert->certified) {
    throw numerical_error("kernel distance requires a Mercer-certified block");
  }
  const double rad = k(i, i) + k(j, j) - 2.0 * k(i, j);
  const double tol = cert->psd_tol * std::max(k(i, i) + k(j, j), 1.0);
  if (rad < -tol) {
    throw numerical_error("negative squared kernel distance beyond tolerance: " +
                          std::to_string(rad));
  }
  return std::sqrt(std::max(rad, 0.0));
}

namespace {

KernelMatrix take_block(const KernelMatrix& k, const std::vector<Index>& ri,
                        const std::vector<Index>& ci) {
  RowMatrixXd out(static_cast<Index>(ri.size()), static_cast<Index>(ci.size()));
  for (std::size_t r = 0; r < ri.size(); ++r) {
    for (std::size_t c = 0; c < ci.size(); ++c) {
      out(static_cast<Index>(r), static_cast<Index>(c)) = k(ri[r], ci[c]);
    }
  }
  return KernelMatrix(std::move(out));
}

}  // namespace

KernelMatrix restrict(const KernelMatrix& k, const SplitView& view, BlockPart part) {
  if (!k.square() || k.rows() != view.parent().size()) {
    throw dimension_error("kernel block does not cover the split's parent set");
  }
  const auto& tr = view.train_indices();
  const auto& te = view.test_indices();
  KernelMatrix out = part == BlockPart::train   ? take_block(k, tr, tr)
                     : part == BlockPart::test  ? take_block(k, te, te)
                                                : take_block(k, tr, te);
  if (part != BlockPart::cross && k.certificate() && k.certificate()->certified &&
      out.rows() > 0) {
    // principal sub-block: eigenvalues interlace, so the parent's range and
    // PSD status remain valid bounds
    MercerCertificate cert = *k.certificate();
    double max_abs = 0.0;
    for (Index i = 0; i < out.rows(); ++i) {
      for (Index j = 0; j < out.cols(); ++j) max_abs = std::max(max_abs, std::abs(out(i, j)));
    }
    cert.max_abs_entry = max_abs;
    out.set_certificate(cert);
  }
  return out;
}

KernelMatrix kernel_sum(const KernelMatrix& k1, const KernelMatrix& k2) {
  if (k1.rows() != k2.rows() || k1.cols() != k2.cols()) {
    throw dimension_error("kernel sum needs blocks of identical shape");
  }
  return KernelMatrix(k1.values() + k2.values());
}

KernelMatrix kernel_diff(const KernelMatrix& k1, const KernelMatrix& k2) {
  if (k1.rows() != k2.rows() || k1.cols() != k2.cols()) {
    throw dimension_error("kernel difference needs blocks of identical shape");
  }
  return KernelMatrix(k1.values() - k2.values());
}

}  // namespace kex
