#pragma once

#include <cstddef>
#include <string_view>

namespace ftfc::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view to_string(Isa isa);

/// True when the CPU supports AVX2 and FMA and the AVX2 code was compiled in.
bool avx2_available();

/// The instruction set used by the dispatching entry points below. Chosen at
/// first use from CPU features; FTFC_ISA=scalar in the environment forces the
/// reference path.
Isa active_isa();

/// Overrides the dispatch target (tests and benchmarks). Requesting kAvx2 on
/// a machine without it throws. Returns the previous setting.
Isa force_isa(Isa isa);

struct AdamWParams {
  float lr = 1e-4f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  float weight_decay = 0.0f;
  float bias_correction1 = 1.0f;  ///< 1 - beta1^t
  float bias_correction2 = 1.0f;  ///< 1 - beta2^t
};

/// Function table for one instruction set. All matrices are row-major.
struct KernelTable {
  /// C[m x n] = alpha * op(A) op(B) + beta * C, where op(A) is m x k and
  /// op(B) is k x n. beta == 0 overwrites C without reading it. Each output
  /// element is reduced in an order fixed by (m, n, k) alone, so rows of C
  /// never depend on other rows of op(A).
  void (*sgemm)(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a,
                int lda, const float* b, int ldb, float beta, float* c, int ldc);
  void (*vexp)(const float* x, float* y, std::size_t n);
  /// Tanh-approximation GELU.
  void (*gelu)(const float* x, float* y, std::size_t n);
  /// dx = dy * gelu'(x).
  void (*gelu_backward)(const float* x, const float* dy, float* dx, std::size_t n);
  /// Decoupled-weight-decay Adam update of n parameters in place.
  void (*adamw)(float* param, const float* grad, float* m, float* v, std::size_t n,
                const AdamWParams& p);
};

const KernelTable& table(Isa isa);
inline const KernelTable& active() { return table(active_isa()); }

inline void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a,
                  int lda, const float* b, int ldb, float beta, float* c, int ldc) {
  active().sgemm(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}
inline void vexp(const float* x, float* y, std::size_t n) { active().vexp(x, y, n); }
inline void gelu(const float* x, float* y, std::size_t n) { active().gelu(x, y, n); }
inline void gelu_backward(const float* x, const float* dy, float* dx, std::size_t n) {
  active().gelu_backward(x, dy, dx, n);
}
inline void adamw(float* param, const float* grad, float* m, float* v, std::size_t n,
                  const AdamWParams& p) {
  active().adamw(param, grad, m, v, n, p);
}

namespace detail {
extern const KernelTable kScalarTable;
#if defined(FTFC_HAVE_AVX2_TU)
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

}  // namespace ftfc::kernels
