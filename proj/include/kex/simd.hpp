#pragma once

#include <cstddef>
#include <string_view>

// Vectorized inner loops used by the kernel builders and the extension
// quadratures. Every operation exists twice: a scalar reference version with
// strict left-to-right accumulation, and dispatched variants (AVX2 on x86,
// NEON on aarch64) selected once at runtime. The dispatched variants reduce
// in a fixed lane-blocked order, so results are deterministic for a given
// ISA, but may differ from the scalar reference by roundoff.

namespace kex::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

// ISA the dispatched entry points currently route to.
Isa active_isa();

// Test hook: pin a specific implementation. Throws config_error when the
// requested ISA is not available on this CPU/build.
void force_isa(Isa isa);
void reset_isa();

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// sum_i a[i] * b[i] * c[i]  (quadratures: kernel row x eigenfunction x measure)
double dot3(const double* a, const double* b, const double* c, std::size_t n);

// sum_i (a[i] - b[i])^2
double squared_distance(const double* a, const double* b, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace scalar

}  // namespace kex::simd
