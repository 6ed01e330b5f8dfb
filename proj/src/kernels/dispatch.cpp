#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "ftfc/kernels.hpp"

namespace ftfc::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("FTFC_ISA"); env != nullptr && std::string_view(env) == "scalar") {
    return Isa::kScalar;
  }
  return avx2_available() ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

bool avx2_available() {
#if defined(FTFC_HAVE_AVX2_TU)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

Isa force_isa(Isa isa) {
  if (isa == Isa::kAvx2 && !avx2_available()) {
    throw std::runtime_error("AVX2 kernels requested but not available on this CPU");
  }
  return current().exchange(isa);
}

const KernelTable& table(Isa isa) {
#if defined(FTFC_HAVE_AVX2_TU)
  if (isa == Isa::kAvx2) return detail::kAvx2Table;
#endif
  (void)isa;
  return detail::kScalarTable;
}

}  // namespace ftfc::kernels
