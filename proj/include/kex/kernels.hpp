#pragma once

#include <optional>
#include <string>
#include <variant>

#include "kex/measured_set.hpp"

namespace kex {

// symmetry defect tolerance, relative to max |entry|
inline constexpr double kDefaultSymTol = 1e-12;
// PSD tolerance, relative to the largest eigenvalue
inline constexpr double kDefaultPsdTol = 1e-10;

struct GaussianSpec {
  double epsilon = 1.0;  // bandwidth, > 0
  double eta = 0.0;      // sparsity threshold in [0, 1); entries below it become 0
};

struct LinearSpec {};

struct PrecomputedSpec {
  RowMatrixXd matrix;
};

// Validated kernel description. Gaussian entries are exp(-|x-y|^2 / epsilon);
// precomputed square matrices are symmetrized when the defect is within
// kDefaultSymTol and rejected otherwise.
class KernelSpec {
 public:
  KernelSpec(GaussianSpec g);     // NOLINT(google-explicit-constructor)
  KernelSpec(LinearSpec l);       // NOLINT(google-explicit-constructor)
  KernelSpec(PrecomputedSpec p);  // NOLINT(google-explicit-constructor)

  const std::variant<GaussianSpec, LinearSpec, PrecomputedSpec>& value() const {
    return value_;
  }
  bool is_gaussian() const { return std::holds_alternative<GaussianSpec>(value_); }
  bool is_linear() const { return std::holds_alternative<LinearSpec>(value_); }
  bool is_precomputed() const { return std::holds_alternative<PrecomputedSpec>(value_); }
  const GaussianSpec& gaussian() const { return std::get<GaussianSpec>(value_); }
  const PrecomputedSpec& precomputed() const { return std::get<PrecomputedSpec>(value_); }

  // true when entries can be evaluated at arbitrary points (not precomputed)
  bool evaluable() const { return !is_precomputed(); }

  std::string kind_name() const;

 private:
  std::variant<GaussianSpec, LinearSpec, PrecomputedSpec> value_;
};

struct MercerCertificate {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double symmetry_defect = 0.0;
  double max_abs_entry = 0.0;
  double psd_tol = kDefaultPsdTol;  // relative tolerance the check ran with
  bool certified = false;
};

// Dense kernel block between two point sets. Square blocks can carry a
// Mercer certificate from validate_mercer.
class KernelMatrix {
 public:
  explicit KernelMatrix(RowMatrixXd values) : values_(std::move(values)) {}

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  bool square() const { return rows() == cols(); }
  double operator()(Index i, Index j) const { return values_(i, j); }
  const RowMatrixXd& values() const { return values_; }

  const std::optional<MercerCertificate>& certificate() const { return certificate_; }
  void set_certificate(MercerCertificate c) { certificate_ = c; }

 private:
  RowMatrixXd values_;
  std::optional<MercerCertificate> certificate_;
};

// Entry (i, j) = kernel(a_i, b_j). The diagonal of a square gaussian block is
// exactly 1; entries below eta are zeroed after exponentiation.
KernelMatrix build_kernel(const KernelSpec& spec, const MeasuredSet& a, const MeasuredSet& b);

// Checks symmetry, positive semi-definiteness and boundedness of a square
// block; stores and returns the certificate. Certification requires
// min eigenvalue >= -tol_psd * max(largest eigenvalue, 1) and a symmetry
// defect within kDefaultSymTol relative to max |entry|.
MercerCertificate validate_mercer(KernelMatrix& k, double tol_psd = kDefaultPsdTol);

// sqrt(k(i,i) + k(j,j) - 2 k(i,j)); tiny negative radicands within the
// certificate tolerance are clamped to zero.
double kernel_distance(const KernelMatrix& k, Index i, Index j);

enum class BlockPart { train, test, cross };

// Sub-block of a kernel on the view's parent set. Principal sub-blocks
// (train, test) inherit the parent certificate: interlacing bounds keep the
// recorded eigenvalue range valid.
KernelMatrix restrict(const KernelMatrix& k, const SplitView& view, BlockPart part);

KernelMatrix kernel_sum(const KernelMatrix& k1, const KernelMatrix& k2);
KernelMatrix kernel_diff(const KernelMatrix& k1, const KernelMatrix& k2);

}  // namespace kex
