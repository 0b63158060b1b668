#pragma once

#include <cstddef>

// Internal declarations for the per-ISA translation units. Definitions exist
// only when the matching TU is compiled in (see CMakeLists).

namespace kex::simd::detail {

#if KEX_HAVE_AVX2
double dot_avx2(const double* a, const double* b, std::size_t n);
double dot3_avx2(const double* a, const double* b, const double* c, std::size_t n);
double squared_distance_avx2(const double* a, const double* b, std::size_t n);
#endif

#if KEX_HAVE_NEON
double dot_neon(const double* a, const double* b, std::size_t n);
double dot3_neon(const double* a, const double* b, const double* c, std::size_t n);
double squared_distance_neon(const double* a, const double* b, std::size_t n);
#endif

}  // namespace kex::simd::detail
