#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "kex/errors.hpp"
#include "kex/rng.hpp"
#include "kex/simd.hpp"

using namespace kex;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

// tolerance for comparing differently-ordered reductions
double reduction_tol(std::size_t n, double magnitude) {
  return 1e-14 * (static_cast<double>(n) + 1.0) * std::max(magnitude, 1.0);
}

}  // namespace

TEST_CASE("scalar reference values") {
  const double a[] = {1.0, 2.0, 3.0};
  const double b[] = {4.0, 5.0, 6.0};
  const double c[] = {1.0, 0.5, 2.0};
  CHECK(simd::scalar::dot(a, b, 3) == 32.0);
  CHECK(simd::scalar::dot3(a, b, c, 3) == 4.0 + 5.0 + 36.0);
  CHECK(simd::scalar::squared_distance(a, b, 3) == 27.0);
  CHECK(simd::scalar::dot(a, b, 0) == 0.0);
}

TEST_CASE("dispatched variants match the scalar reference") {
  Rng rng(2024);
  // sizes straddle the vector width and exercise every tail length
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 257u}) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);
    const auto c = random_vec(rng, n);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    const double tol = reduction_tol(n, mag);

    CHECK(std::abs(simd::dot(a.data(), b.data(), n) -
                   simd::scalar::dot(a.data(), b.data(), n)) <= tol);
    CHECK(std::abs(simd::dot3(a.data(), b.data(), c.data(), n) -
                   simd::scalar::dot3(a.data(), b.data(), c.data(), n)) <= 2.0 * tol);
    CHECK(std::abs(simd::squared_distance(a.data(), b.data(), n) -
                   simd::scalar::squared_distance(a.data(), b.data(), n)) <= 2.0 * tol);
  }
}

TEST_CASE("dispatch is deterministic") {
  Rng rng(7);
  const auto a = random_vec(rng, 123);
  const auto b = random_vec(rng, 123);
  const double first = simd::dot(a.data(), b.data(), a.size());
  for (int i = 0; i < 5; ++i) {
    CHECK(simd::dot(a.data(), b.data(), a.size()) == first);
  }
}

TEST_CASE("forcing the scalar isa routes to the reference bitwise") {
  Rng rng(99);
  const auto a = random_vec(rng, 57);
  const auto b = random_vec(rng, 57);
  const simd::Isa before = simd::active_isa();
  simd::force_isa(simd::Isa::scalar);
  CHECK(simd::active_isa() == simd::Isa::scalar);
  CHECK(simd::dot(a.data(), b.data(), a.size()) ==
        simd::scalar::dot(a.data(), b.data(), a.size()));
  CHECK(simd::squared_distance(a.data(), b.data(), a.size()) ==
        simd::scalar::squared_distance(a.data(), b.data(), a.size()));
  simd::reset_isa();
  CHECK(simd::active_isa() == before);
}

TEST_CASE("every available isa agrees on random inputs") {
  Rng rng(31);
  const auto a = random_vec(rng, 200, 3.0);
  const auto b = random_vec(rng, 200, 3.0);
  const double ref = simd::scalar::dot(a.data(), b.data(), a.size());
  for (simd::Isa isa : {simd::Isa::scalar, simd::Isa::avx2, simd::Isa::neon}) {
    try {
      simd::force_isa(isa);
    } catch (const config_error&) {
      continue;  // not available on this machine
    }
    INFO("isa ", simd::isa_name(isa));
    CHECK(std::abs(simd::dot(a.data(), b.data(), a.size()) - ref) <=
          reduction_tol(a.size(), std::abs(ref)));
  }
  simd::reset_isa();
}
