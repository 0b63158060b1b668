#include <atomic>
#include <cstdlib>
#include <string>

#include "kex/errors.hpp"
#include "kex/simd.hpp"
#include "simd_impl.hpp"

namespace kex::simd {

namespace {

struct OpsTable {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t);
  double (*dot3)(const double*, const double*, const double*, std::size_t);
  double (*squared_distance)(const double*, const double*, std::size_t);
};

constexpr OpsTable kScalarTable{Isa::scalar, &scalar::dot, &scalar::dot3,
                                &scalar::squared_distance};

#if KEX_HAVE_AVX2
constexpr OpsTable kAvx2Table{Isa::avx2, &detail::dot_avx2, &detail::dot3_avx2,
                              &detail::squared_distance_avx2};

bool avx2_usable() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

#if KEX_HAVE_NEON
constexpr OpsTable kNeonTable{Isa::neon, &detail::dot_neon, &detail::dot3_neon,
                              &detail::squared_distance_neon};
#endif

const OpsTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &kScalarTable;
    case Isa::avx2:
#if KEX_HAVE_AVX2
      if (avx2_usable()) return &kAvx2Table;
#endif
      return nullptr;
    case Isa::neon:
#if KEX_HAVE_NEON
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const OpsTable* detect() {
  if (const char* env = std::getenv("KEX_SIMD")) {
    const std::string want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == isa_name(isa)) {
        if (const OpsTable* t = table_for(isa)) return t;
        throw config_error("KEX_SIMD requests '" + want + "' but it is not available");
      }
    }
    throw config_error("unknown KEX_SIMD value '" + want + "'");
  }
#if KEX_HAVE_NEON
  return &kNeonTable;
#endif
#if KEX_HAVE_AVX2
  if (avx2_usable()) return &kAvx2Table;
#endif
  return &kScalarTable;
}

std::atomic<const OpsTable*> g_table{nullptr};

const OpsTable& table() {
  const OpsTable* t = g_table.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = detect();
    g_table.store(t, std::memory_order_release);
  }
  return *t;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

Isa active_isa() { return table().isa; }

void force_isa(Isa isa) {
  const OpsTable* t = table_for(isa);
  if (t == nullptr) {
    throw config_error(std::string("simd isa '") + std::string(isa_name(isa)) +
                       "' is not available on this machine");
  }
  g_table.store(t, std::memory_order_release);
}

void reset_isa() { g_table.store(detect(), std::memory_order_release); }

double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  return table().dot3(a, b, c, n);
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  return table().squared_distance(a, b, n);
}

}  // namespace kex::simd
