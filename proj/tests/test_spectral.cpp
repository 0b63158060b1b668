#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kex/spectral.hpp"
#include "test_util.hpp"

using namespace kex;
using testutil::random_set;

namespace {

SpectralModel decompose_gaussian(Rng& rng, const MeasuredSet& s, double rank_tol = 1e-10) {
  KernelMatrix k = build_kernel(GaussianSpec{testutil::natural_epsilon(rng, s), 0.0}, s, s);
  validate_mercer(k);
  return spectral_decompose(k, s, rank_tol);
}

}  // namespace

TEST_CASE("identity kernel decomposes to unit eigenvalues") {
  const MeasuredSet s = MeasuredSet::with_uniform_weights(RowMatrixXd::Identity(2, 2));
  KernelMatrix k(RowMatrixXd(RowMatrixXd::Identity(2, 2)));
  validate_mercer(k);
  const SpectralModel m = spectral_decompose(k, s, 1e-12);
  CHECK(m.rank() == 2);
  CHECK(m.eigenvalues()[0] == doctest::Approx(1.0));
  CHECK(m.eigenvalues()[1] == doctest::Approx(1.0));
}

TEST_CASE("all-ones kernel has the single pair (2, 1/sqrt(2))") {
  const MeasuredSet s = MeasuredSet::with_uniform_weights(RowMatrixXd::Zero(2, 1));
  KernelMatrix k(RowMatrixXd(RowMatrixXd::Ones(2, 2)));
  validate_mercer(k);
  const SpectralModel m = spectral_decompose(k, s, 1e-12);
  CHECK(m.rank() == 1);
  CHECK(m.eigenvalues()[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.eigenfunctions()(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(m.eigenfunctions()(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  // feature map reconstructs the kernel exactly: phi = (1, 1)
  const FeatureMap fm = feature_map(m);
  CHECK(fm.values()(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  const KernelMatrix rk = reconstruct_kernel(fm);
  CHECK((rk.values() - k.values()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("zero eigenvalues are dropped") {
  const MeasuredSet s = MeasuredSet::with_uniform_weights(RowMatrixXd::Zero(2, 1));
  RowMatrixXd d(2, 2);
  d << 3, 0, 0, 0;
  KernelMatrix k(d);
  validate_mercer(k);
  const SpectralModel m = spectral_decompose(k, s, 1e-12);
  CHECK(m.rank() == 1);
  CHECK(m.eigenvalues()[0] == doctest::Approx(3.0));
}

TEST_CASE("zero kernel is an error") {
  const MeasuredSet s = MeasuredSet::with_uniform_weights(RowMatrixXd::Zero(2, 1));
  KernelMatrix k(RowMatrixXd(RowMatrixXd::Zero(2, 2)));
  validate_mercer(k);
  CHECK_THROWS_AS(spectral_decompose(k, s, 1e-12), numerical_error);
}

TEST_CASE("uncertified kernels are rejected") {
  const MeasuredSet s = MeasuredSet::with_uniform_weights(RowMatrixXd::Zero(2, 1));
  KernelMatrix k(RowMatrixXd(RowMatrixXd::Identity(2, 2)));
  CHECK_THROWS_AS(spectral_decompose(k, s, 1e-12), numerical_error);
}

TEST_CASE("measure-orthonormality and the eigen-equation") {
  Rng rng(101);
  for (int t = 0; t < 40; ++t) {
    const Index n = 3 + static_cast<Index>(rng.integer(12));
    const MeasuredSet s = random_set(rng, n, 2);
    KernelMatrix k = build_kernel(GaussianSpec{testutil::natural_epsilon(rng, s), 0.0}, s, s);
    validate_mercer(k);
    const SpectralModel m = spectral_decompose(k, s, 1e-10);
    const double lambda1 = m.eigenvalues()[0];

    for (Index i = 0; i < m.rank(); ++i) {
      for (Index j = 0; j < m.rank(); ++j) {
        const double want = i == j ? 1.0 : 0.0;
        CHECK(std::abs(l2_inner(m.eigenfunctions().col(i), m.eigenfunctions().col(j), s) -
                       want) <= 1e-8);
      }
      // sum_y k(x, y) v_j(y) mu(y) = lambda_j v_j(x)
      const Eigen::VectorXd image =
          k.values() * s.weights().cwiseProduct(m.eigenfunctions().col(i));
      const Eigen::VectorXd want_img = m.eigenvalues()[i] * m.eigenfunctions().col(i);
      CHECK((image - want_img).cwiseAbs().maxCoeff() <= 1e-8 * lambda1);
    }
  }
}

TEST_CASE("decompose-reconstruct round trip") {
  Rng rng(103);
  for (int t = 0; t < 40; ++t) {
    const Index n = 2 + static_cast<Index>(rng.integer(12));
    const MeasuredSet s = random_set(rng, n, 3);
    KernelMatrix k = build_kernel(GaussianSpec{testutil::natural_epsilon(rng, s), 0.0}, s, s);
    validate_mercer(k);
    const SpectralModel m = spectral_decompose(k, s, kDefaultRankTol);
    const KernelMatrix rk = reconstruct_kernel(feature_map(m));
    const double err = (rk.values() - k.values()).cwiseAbs().maxCoeff();
    CHECK(err <= 1e-8 * m.eigenvalues()[0]);
  }
}

TEST_CASE("feature map preserves kernel distances") {
  Rng rng(107);
  for (int t = 0; t < 30; ++t) {
    const MeasuredSet s = random_set(rng, 8, 3);
    KernelMatrix k = build_kernel(GaussianSpec{testutil::natural_epsilon(rng, s), 0.0}, s, s);
    validate_mercer(k);
    const SpectralModel m = spectral_decompose(k, s, 1e-10);
    const FeatureMap fm = feature_map(m);
    for (Index i = 0; i < s.size(); ++i) {
      for (Index j = 0; j < s.size(); ++j) {
        const double dk = kernel_distance(k, i, j);
        const double d2 = (fm.values().row(i) - fm.values().row(j)).norm();
        CHECK(std::abs(dk - d2) <= 1e-8 * std::max(1.0, dk));
      }
    }
  }
}

TEST_CASE("trace identity") {
  Rng rng(109);
  for (int t = 0; t < 30; ++t) {
    const Index n = 2 + static_cast<Index>(rng.integer(15));
    const MeasuredSet s = random_set(rng, n, 2);
    KernelMatrix k = build_kernel(GaussianSpec{testutil::natural_epsilon(rng, s), 0.0}, s, s);
    validate_mercer(k);
    const SpectralModel m = spectral_decompose(k, s, kDefaultRankTol);
    double weighted_trace = 0.0;
    for (Index i = 0; i < n; ++i) weighted_trace += k(i, i) * s.weights()[i];
    CHECK(std::abs(m.eigenvalues().sum() - weighted_trace) <= 1e-8 * m.eigenvalues()[0]);
  }
}

TEST_CASE("rkhs inner product") {
  Rng rng(113);
  const MeasuredSet s = random_set(rng, 7, 2);
  KernelMatrix k = build_kernel(GaussianSpec{testutil::natural_epsilon(rng, s), 0.0}, s, s);
  validate_mercer(k);
  const SpectralModel m = spectral_decompose(k, s, 1e-8);
  const FeatureMap fm = feature_map(m);

  const Eigen::VectorXd phi1 = fm.values().col(0);
  const Eigen::VectorXd phi2 = fm.values().col(1);
  CHECK(rkhs_inner(m, phi1, phi1) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(rkhs_inner(m, phi1, phi2) == doctest::Approx(0.0).epsilon(1e-8));
  // <2 phi1 + phi2, phi1 - phi2>_H = 2 - 1
  CHECK(rkhs_inner(m, 2.0 * phi1 + phi2, phi1 - phi2) == doctest::Approx(1.0).epsilon(1e-8));

  // functions outside the span are rejected: rank-deficient model, residual direction
  RowMatrixXd ones = RowMatrixXd::Ones(2, 2);
  const MeasuredSet s2 = MeasuredSet::with_uniform_weights(RowMatrixXd::Zero(2, 1));
  KernelMatrix k2(ones);
  validate_mercer(k2);
  const SpectralModel m2 = spectral_decompose(k2, s2, 1e-12);
  Eigen::VectorXd outside(2);
  outside << 1.0, -1.0;
  CHECK_THROWS_AS(rkhs_inner(m2, outside, outside), numerical_error);
}

TEST_CASE("feature H-gram is the identity when features are independent") {
  Rng rng(127);
  for (int t = 0; t < 15; ++t) {
    const MeasuredSet s = random_set(rng, 6, 2);
    KernelMatrix k = build_kernel(GaussianSpec{testutil::natural_epsilon(rng, s), 0.0}, s, s);
    validate_mercer(k);
    const SpectralModel m = spectral_decompose(k, s, 1e-8);
    const FeatureMap fm = feature_map(m);
    for (Index i = 0; i < m.rank(); ++i) {
      for (Index j = 0; j < m.rank(); ++j) {
        const double want = i == j ? 1.0 : 0.0;
        CHECK(std::abs(rkhs_inner(m, fm.values().col(i), fm.values().col(j)) - want) <= 1e-7);
      }
    }
  }
}

TEST_CASE("l2 norm is controlled by the rkhs norm") {
  Rng rng(131);
  for (int t = 0; t < 15; ++t) {
    const MeasuredSet s = random_set(rng, 6, 2);
    KernelMatrix k = build_kernel(GaussianSpec{testutil::natural_epsilon(rng, s), 0.0}, s, s);
    validate_mercer(k);
    const SpectralModel m = spectral_decompose(k, s, 1e-8);
    Eigen::VectorXd coef(m.rank());
    for (Index i = 0; i < m.rank(); ++i) coef[i] = rng.normal();
    const Eigen::VectorXd f = m.eigenfunctions() * coef;
    const double l2 = l2_inner(f, f, s);
    const double h = rkhs_inner(m, f, f);
    CHECK(l2 <= m.eigenvalues()[0] * h * (1.0 + 1e-10) + 1e-12);
  }
}

TEST_CASE("eigenvalues come out sorted, positive, and sign-fixed") {
  Rng rng(137);
  for (int t = 0; t < 20; ++t) {
    const MeasuredSet s = random_set(rng, 9, 2);
    const SpectralModel m = decompose_gaussian(rng, s);
    for (Index j = 0; j < m.rank(); ++j) {
      CHECK(m.eigenvalues()[j] > 0.0);
      if (j > 0) CHECK(m.eigenvalues()[j] <= m.eigenvalues()[j - 1]);
      // sign convention: first non-negligible component positive
      const auto& col = m.eigenfunctions().col(j);
      const double scale = col.cwiseAbs().maxCoeff();
      for (Index i = 0; i < col.size(); ++i) {
        if (std::abs(col[i]) > 1e-12 * scale) {
          CHECK(col[i] > 0.0);
          break;
        }
      }
    }
  }
}
