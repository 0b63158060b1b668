#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kex/kernels.hpp"
#include "test_util.hpp"

using namespace kex;
using testutil::random_set;

namespace {

MeasuredSet points_1d(std::initializer_list<double> xs) {
  RowMatrixXd pts(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) pts(i++, 0) = x;
  return MeasuredSet::with_uniform_weights(std::move(pts));
}

}  // namespace

TEST_CASE("gaussian kernel entries") {
  const MeasuredSet s = points_1d({0.0, 1.0});
  KernelMatrix k = build_kernel(GaussianSpec{1.0, 0.0}, s, s);
  CHECK(k(0, 0) == 1.0);  // exp(0), exactly
  CHECK(k(1, 1) == 1.0);
  CHECK(k(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  // |x-y|^2 = 2, epsilon = 2
  const MeasuredSet t = points_1d({0.0, std::sqrt(2.0)});
  KernelMatrix k2 = build_kernel(GaussianSpec{2.0, 0.0}, t, t);
  CHECK(k2(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("gaussian threshold zeroes small entries") {
  const MeasuredSet s = points_1d({0.0, 10.0});
  KernelMatrix k = build_kernel(GaussianSpec{1.0, 1e-4}, s, s);
  CHECK(k(0, 1) == 0.0);
  CHECK(k(0, 0) == 1.0);  // diagonal always survives: eta < 1
}

TEST_CASE("linear kernel is the gramian") {
  RowMatrixXd pts(2, 2);
  pts << 1, 2, 3, 4;
  const MeasuredSet s = MeasuredSet::with_uniform_weights(pts);
  KernelMatrix k = build_kernel(LinearSpec{}, s, s);
  CHECK(k(0, 1) == 11.0);
  CHECK(k(0, 0) == 5.0);
}

TEST_CASE("kernel spec validation") {
  CHECK_THROWS_AS(KernelSpec(GaussianSpec{0.0, 0.0}), config_error);
  CHECK_THROWS_AS(KernelSpec(GaussianSpec{-1.0, 0.0}), config_error);
  CHECK_THROWS_AS(KernelSpec(GaussianSpec{1.0, 1.0}), config_error);
  RowMatrixXd bad(2, 2);
  bad << 1, 2, 0, 1;  // asymmetric beyond tolerance
  CHECK_THROWS_AS(KernelSpec(PrecomputedSpec{bad}), numerical_error);
}

TEST_CASE("dimension mismatches are rejected") {
  Rng rng(3);
  const MeasuredSet a = random_set(rng, 3, 2);
  const MeasuredSet b = random_set(rng, 3, 3);
  CHECK_THROWS_AS(build_kernel(GaussianSpec{1.0, 0.0}, a, b), dimension_error);
  RowMatrixXd wrong = RowMatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(build_kernel(PrecomputedSpec{wrong}, a, a), dimension_error);
}

TEST_CASE("validate_mercer certifies the identity and rejects an indefinite block") {
  KernelMatrix id(RowMatrixXd(RowMatrixXd::Identity(3, 3)));
  const MercerCertificate c1 = validate_mercer(id);
  CHECK(c1.certified);
  CHECK(c1.min_eigenvalue == doctest::Approx(1.0));

  RowMatrixXd m(2, 2);
  m << 1, 2, 2, 1;  // eigenvalues 3, -1
  KernelMatrix indef(m);
  const MercerCertificate c2 = validate_mercer(indef);
  CHECK_FALSE(c2.certified);
  CHECK(c2.min_eigenvalue == doctest::Approx(-1.0));
  CHECK(c2.max_eigenvalue == doctest::Approx(3.0));

  KernelMatrix rect(RowMatrixXd(RowMatrixXd::Zero(2, 3)));
  CHECK_THROWS_AS(validate_mercer(rect), dimension_error);
}

TEST_CASE("random gaussian kernels certify") {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const Index n = 2 + static_cast<Index>(rng.integer(49));
    const Index dim = 1 + static_cast<Index>(rng.integer(10));
    const MeasuredSet s = random_set(rng, n, dim);
    KernelMatrix k = build_kernel(GaussianSpec{testutil::natural_epsilon(rng, s), 0.0}, s, s);
    const MercerCertificate cert = validate_mercer(k);
    CHECK(cert.certified);
    CHECK(cert.min_eigenvalue >= -1e-10 * cert.max_eigenvalue);
    CHECK(cert.max_abs_entry <= 1.0);
  }
}

TEST_CASE("kernel distance basics") {
  const MeasuredSet s = points_1d({0.0, 1.0, 2.5});
  KernelMatrix k = build_kernel(GaussianSpec{1.0, 0.0}, s, s);
  validate_mercer(k);
  CHECK(kernel_distance(k, 1, 1) == 0.0);
  // |x-y|^2 = 1: sqrt(2 - 2 e^{-1})
  CHECK(kernel_distance(k, 0, 1) ==
        doctest::Approx(std::sqrt(2.0 - 2.0 * std::exp(-1.0))).epsilon(1e-12));
  CHECK_THROWS_AS(kernel_distance(k, 0, 5), dimension_error);

  KernelMatrix unchecked = build_kernel(GaussianSpec{1.0, 0.0}, s, s);
  CHECK_THROWS_AS(kernel_distance(unchecked, 0, 1), numerical_error);
}

TEST_CASE("linear kernel distance equals euclidean distance") {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    const MeasuredSet s = random_set(rng, 6, 3);
    KernelMatrix k = build_kernel(LinearSpec{}, s, s);
    validate_mercer(k);
    for (Index i = 0; i < s.size(); ++i) {
      for (Index j = 0; j < s.size(); ++j) {
        const double want = (s.points().row(i) - s.points().row(j)).norm();
        CHECK(kernel_distance(k, i, j) == doctest::Approx(want).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("kernel distance satisfies the triangle inequality") {
  Rng rng(29);
  for (int t = 0; t < 25; ++t) {
    const MeasuredSet s = random_set(rng, 8, 2);
    KernelMatrix k = build_kernel(GaussianSpec{testutil::natural_epsilon(rng, s), 0.0}, s, s);
    validate_mercer(k);
    for (Index a = 0; a < s.size(); ++a) {
      for (Index b = 0; b < s.size(); ++b) {
        for (Index c = 0; c < s.size(); ++c) {
          CHECK(kernel_distance(k, a, c) <=
                kernel_distance(k, a, b) + kernel_distance(k, b, c) + 1e-10);
        }
      }
    }
  }
}

TEST_CASE("restrict slices blocks and keeps certification") {
  Rng rng(37);
  const MeasuredSet s = random_set(rng, 6, 2);
  KernelMatrix k = build_kernel(GaussianSpec{1.5, 0.0}, s, s);
  validate_mercer(k);
  const SplitView view = split(s, {0, 3});

  const KernelMatrix full = restrict(k, split(s, std::vector<Index>{}), BlockPart::train);
  CHECK(full.values() == k.values());

  const KernelMatrix train = restrict(k, view, BlockPart::train);
  CHECK(train.rows() == 4);
  CHECK(train.certificate().has_value());
  CHECK(train.certificate()->certified);
  // re-validating the principal sub-block confirms the inherited certificate
  KernelMatrix train_copy = train;
  CHECK(validate_mercer(train_copy).certified);

  const KernelMatrix cross = restrict(k, view, BlockPart::cross);
  CHECK(cross.rows() == 4);
  CHECK(cross.cols() == 2);
  CHECK_FALSE(cross.certificate().has_value());
  CHECK(cross(0, 0) == k(1, 0));  // train index 1 vs test index 0

  const KernelMatrix test = restrict(k, view, BlockPart::test);
  CHECK(test(1, 1) == k(3, 3));
}

TEST_CASE("restriction composes") {
  Rng rng(41);
  const MeasuredSet s = random_set(rng, 8, 2);
  KernelMatrix k = build_kernel(GaussianSpec{1.0, 0.0}, s, s);
  // restrict to {0..5} then to the first three of those = restrict to {0,1,2}
  const SplitView outer = split(s, {6, 7});
  const KernelMatrix k6 = restrict(k, outer, BlockPart::train);
  const MeasuredSet s6 = outer.train_set();
  const SplitView inner = split(s6, {3, 4, 5});
  const KernelMatrix k3 = restrict(k6, inner, BlockPart::train);
  const SplitView direct = split(s, {3, 4, 5, 6, 7});
  const KernelMatrix k3b = restrict(k, direct, BlockPart::train);
  CHECK(k3.values() == k3b.values());
}

TEST_CASE("kernel sum and difference") {
  Rng rng(43);
  const MeasuredSet s = random_set(rng, 5, 2);
  KernelMatrix k = build_kernel(GaussianSpec{1.0, 0.0}, s, s);
  KernelMatrix zero = kernel_diff(k, k);
  CHECK(zero.values().cwiseAbs().maxCoeff() == 0.0);
  CHECK(validate_mercer(zero).certified);

  KernelMatrix zeros(RowMatrixXd(RowMatrixXd::Zero(5, 5)));
  KernelMatrix same = kernel_sum(k, zeros);
  CHECK(same.values() == k.values());

  KernelMatrix small(RowMatrixXd(RowMatrixXd::Zero(4, 4)));
  CHECK_THROWS_AS(kernel_sum(k, small), dimension_error);
}
