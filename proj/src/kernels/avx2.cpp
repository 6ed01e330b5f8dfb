// Compiled with -mavx2 -mfma; only reached through dispatch after a CPU check.
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ftfc/kernels.hpp"

namespace ftfc::kernels {

namespace {

constexpr int kMR = 6;
constexpr int kNR = 16;
constexpr int kKC = 256;
constexpr int kMC = 96;
constexpr int kNC = 3072;

inline float op_a(const float* a, int lda, bool ta, int i, int p) {
  return ta ? a[static_cast<std::ptrdiff_t>(p) * lda + i] : a[static_cast<std::ptrdiff_t>(i) * lda + p];
}

inline float op_b(const float* b, int ldb, bool tb, int p, int j) {
  return tb ? b[static_cast<std::ptrdiff_t>(j) * ldb + p] : b[static_cast<std::ptrdiff_t>(p) * ldb + j];
}

// MR-row strips, k-major inside a strip, zero-padded past m.
void pack_a(const float* a, int lda, bool ta, int i0, int mc, int p0, int kc, float* out) {
  for (int s = 0; s < mc; s += kMR) {
    const int rows = std::min(kMR, mc - s);
    if (!ta && rows == kMR) {
      const float* base = a + static_cast<std::ptrdiff_t>(i0 + s) * lda + p0;
      for (int kk = 0; kk < kc; ++kk) {
        for (int r = 0; r < kMR; ++r) out[kk * kMR + r] = base[static_cast<std::ptrdiff_t>(r) * lda + kk];
      }
    } else {
      for (int kk = 0; kk < kc; ++kk) {
        for (int r = 0; r < kMR; ++r) {
          out[kk * kMR + r] = r < rows ? op_a(a, lda, ta, i0 + s + r, p0 + kk) : 0.0f;
        }
      }
    }
    out += static_cast<std::ptrdiff_t>(kc) * kMR;
  }
}

// NR-column strips, k-major inside a strip, zero-padded past n.
void pack_b(const float* b, int ldb, bool tb, int p0, int kc, int j0, int nc, float* out) {
  for (int t = 0; t < nc; t += kNR) {
    const int cols = std::min(kNR, nc - t);
    if (!tb && cols == kNR) {
      for (int kk = 0; kk < kc; ++kk) {
        const float* src = b + static_cast<std::ptrdiff_t>(p0 + kk) * ldb + j0 + t;
        _mm256_storeu_ps(out + kk * kNR, _mm256_loadu_ps(src));
        _mm256_storeu_ps(out + kk * kNR + 8, _mm256_loadu_ps(src + 8));
      }
    } else {
      for (int kk = 0; kk < kc; ++kk) {
        for (int c = 0; c < kNR; ++c) {
          out[kk * kNR + c] = c < cols ? op_b(b, ldb, tb, p0 + kk, j0 + t + c) : 0.0f;
        }
      }
    }
    out += static_cast<std::ptrdiff_t>(kc) * kNR;
  }
}

// acc = Ap(6 x kc) * Bp(kc x 16); then C(rows x cols) += alpha * acc.
void micro_kernel(int kc, const float* ap, const float* bp, float alpha, float* c, int ldc,
                  int rows, int cols) {
  __m256 c00 = _mm256_setzero_ps(), c01 = _mm256_setzero_ps();
  __m256 c10 = _mm256_setzero_ps(), c11 = _mm256_setzero_ps();
  __m256 c20 = _mm256_setzero_ps(), c21 = _mm256_setzero_ps();
  __m256 c30 = _mm256_setzero_ps(), c31 = _mm256_setzero_ps();
  __m256 c40 = _mm256_setzero_ps(), c41 = _mm256_setzero_ps();
  __m256 c50 = _mm256_setzero_ps(), c51 = _mm256_setzero_ps();
  for (int kk = 0; kk < kc; ++kk) {
    const __m256 b0 = _mm256_loadu_ps(bp);
    const __m256 b1 = _mm256_loadu_ps(bp + 8);
    __m256 a = _mm256_broadcast_ss(ap + 0);
    c00 = _mm256_fmadd_ps(a, b0, c00);
    c01 = _mm256_fmadd_ps(a, b1, c01);
    a = _mm256_broadcast_ss(ap + 1);
    c10 = _mm256_fmadd_ps(a, b0, c10);
    c11 = _mm256_fmadd_ps(a, b1, c11);
    a = _mm256_broadcast_ss(ap + 2);
    c20 = _mm256_fmadd_ps(a, b0, c20);
    c21 = _mm256_fmadd_ps(a, b1, c21);
    a = _mm256_broadcast_ss(ap + 3);
    c30 = _mm256_fmadd_ps(a, b0, c30);
    c31 = _mm256_fmadd_ps(a, b1, c31);
    a = _mm256_broadcast_ss(ap + 4);
    c40 = _mm256_fmadd_ps(a, b0, c40);
    c41 = _mm256_fmadd_ps(a, b1, c41);
    a = _mm256_broadcast_ss(ap + 5);
    c50 = _mm256_fmadd_ps(a, b0, c50);
    c51 = _mm256_fmadd_ps(a, b1, c51);
    ap += kMR;
    bp += kNR;
  }
  alignas(32) float acc[kMR][kNR];
  _mm256_store_ps(acc[0], c00);
  _mm256_store_ps(acc[0] + 8, c01);
  _mm256_store_ps(acc[1], c10);
  _mm256_store_ps(acc[1] + 8, c11);
  _mm256_store_ps(acc[2], c20);
  _mm256_store_ps(acc[2] + 8, c21);
  _mm256_store_ps(acc[3], c30);
  _mm256_store_ps(acc[3] + 8, c31);
  _mm256_store_ps(acc[4], c40);
  _mm256_store_ps(acc[4] + 8, c41);
  _mm256_store_ps(acc[5], c50);
  _mm256_store_ps(acc[5] + 8, c51);
  const __m256 va = _mm256_set1_ps(alpha);
  for (int r = 0; r < rows; ++r) {
    float* crow = c + static_cast<std::ptrdiff_t>(r) * ldc;
    if (cols == kNR) {
      _mm256_storeu_ps(crow, _mm256_fmadd_ps(va, _mm256_load_ps(acc[r]), _mm256_loadu_ps(crow)));
      _mm256_storeu_ps(crow + 8,
                       _mm256_fmadd_ps(va, _mm256_load_ps(acc[r] + 8), _mm256_loadu_ps(crow + 8)));
    } else {
      for (int j = 0; j < cols; ++j) crow[j] = std::fma(alpha, acc[r][j], crow[j]);
    }
  }
}

void sgemm_avx2(bool ta, bool tb, int m, int n, int k, float alpha, const float* a, int lda,
                const float* b, int ldb, float beta, float* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    float* crow = c + static_cast<std::ptrdiff_t>(i) * ldc;
    if (beta == 0.0f) {
      std::fill(crow, crow + n, 0.0f);
    } else if (beta != 1.0f) {
      for (int j = 0; j < n; ++j) crow[j] *= beta;
    }
  }
  if (k == 0 || alpha == 0.0f || m == 0 || n == 0) return;

  thread_local std::vector<float> apack;
  thread_local std::vector<float> bpack;
  const int nc_max = std::min(kNC, n);
  bpack.resize(static_cast<std::size_t>(kKC) * ((nc_max + kNR - 1) / kNR) * kNR);
  apack.resize(static_cast<std::size_t>(kKC) * ((std::min(kMC, m) + kMR - 1) / kMR) * kMR);

  for (int jc = 0; jc < n; jc += kNC) {
    const int nc = std::min(kNC, n - jc);
    for (int pc = 0; pc < k; pc += kKC) {
      const int kc = std::min(kKC, k - pc);
      pack_b(b, ldb, tb, pc, kc, jc, nc, bpack.data());
      for (int ic = 0; ic < m; ic += kMC) {
        const int mc = std::min(kMC, m - ic);
        pack_a(a, lda, ta, ic, mc, pc, kc, apack.data());
        for (int jr = 0; jr < nc; jr += kNR) {
          const float* bp = bpack.data() + static_cast<std::ptrdiff_t>(jr / kNR) * kc * kNR;
          const int cols = std::min(kNR, nc - jr);
          for (int ir = 0; ir < mc; ir += kMR) {
            const float* ap = apack.data() + static_cast<std::ptrdiff_t>(ir / kMR) * kc * kMR;
            const int rows = std::min(kMR, mc - ir);
            micro_kernel(kc, ap, bp, alpha,
                         c + static_cast<std::ptrdiff_t>(ic + ir) * ldc + jc + jr, ldc, rows, cols);
          }
        }
      }
    }
  }
}

// Cephes-style single-precision exp: range reduction by ln2 and a degree-5
// polynomial, ~1 ulp on the clamped domain.
inline __m256 exp256(__m256 x) {
  const __m256 hi = _mm256_set1_ps(88.3762626647949f);
  const __m256 lo = _mm256_set1_ps(-87.3365478515625f);
  x = _mm256_min_ps(_mm256_max_ps(x, lo), hi);
  __m256 fx = _mm256_mul_ps(x, _mm256_set1_ps(1.44269504088896341f));
  fx = _mm256_round_ps(fx, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  x = _mm256_fnmadd_ps(fx, _mm256_set1_ps(0.693359375f), x);
  x = _mm256_fnmadd_ps(fx, _mm256_set1_ps(-2.12194440e-4f), x);
  __m256 y = _mm256_set1_ps(1.9875691500e-4f);
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.3981999507e-3f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(8.3334519073e-3f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(4.1665795894e-2f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.6666665459e-1f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(5.0000001201e-1f));
  const __m256 x2 = _mm256_mul_ps(x, x);
  y = _mm256_fmadd_ps(y, x2, _mm256_add_ps(x, _mm256_set1_ps(1.0f)));
  __m256i e = _mm256_cvtps_epi32(fx);
  e = _mm256_slli_epi32(_mm256_add_epi32(e, _mm256_set1_epi32(127)), 23);
  return _mm256_mul_ps(y, _mm256_castsi256_ps(e));
}

inline __m256 tanh256(__m256 z) {
  const __m256 sign = _mm256_and_ps(z, _mm256_set1_ps(-0.0f));
  const __m256 az = _mm256_andnot_ps(_mm256_set1_ps(-0.0f), z);
  const __m256 e = exp256(_mm256_mul_ps(az, _mm256_set1_ps(-2.0f)));
  const __m256 one = _mm256_set1_ps(1.0f);
  const __m256 t = _mm256_div_ps(_mm256_sub_ps(one, e), _mm256_add_ps(one, e));
  return _mm256_or_ps(t, sign);
}

constexpr float kGeluC = 0.7978845608028654f;
constexpr float kGeluA = 0.044715f;

void vexp_avx2(const float* x, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, exp256(_mm256_loadu_ps(x + i)));
  for (; i < n; ++i) y[i] = std::exp(x[i]);
}

void gelu_avx2(const float* x, float* y, std::size_t n) {
  const __m256 c = _mm256_set1_ps(kGeluC), a = _mm256_set1_ps(kGeluA);
  const __m256 half = _mm256_set1_ps(0.5f), one = _mm256_set1_ps(1.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    const __m256 v3 = _mm256_mul_ps(_mm256_mul_ps(v, v), v);
    const __m256 t = tanh256(_mm256_mul_ps(c, _mm256_fmadd_ps(a, v3, v)));
    _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_mul_ps(half, v), _mm256_add_ps(one, t)));
  }
  for (; i < n; ++i) {
    const float v = x[i];
    y[i] = 0.5f * v * (1.0f + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  }
}

void gelu_backward_avx2(const float* x, const float* dy, float* dx, std::size_t n) {
  const __m256 c = _mm256_set1_ps(kGeluC), a = _mm256_set1_ps(kGeluA);
  const __m256 a3 = _mm256_set1_ps(3.0f * kGeluA);
  const __m256 half = _mm256_set1_ps(0.5f), one = _mm256_set1_ps(1.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    const __m256 v2 = _mm256_mul_ps(v, v);
    const __m256 t = tanh256(_mm256_mul_ps(c, _mm256_fmadd_ps(a, _mm256_mul_ps(v2, v), v)));
    const __m256 sech2 = _mm256_fnmadd_ps(t, t, one);
    const __m256 dt = _mm256_mul_ps(_mm256_mul_ps(sech2, c), _mm256_fmadd_ps(a3, v2, one));
    const __m256 g = _mm256_fmadd_ps(_mm256_mul_ps(half, v), dt, _mm256_mul_ps(half, _mm256_add_ps(one, t)));
    _mm256_storeu_ps(dx + i, _mm256_mul_ps(_mm256_loadu_ps(dy + i), g));
  }
  for (; i < n; ++i) {
    const float v = x[i];
    const float t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
    const float dt = (1.0f - t * t) * kGeluC * (1.0f + 3.0f * kGeluA * v * v);
    dx[i] = dy[i] * (0.5f * (1.0f + t) + 0.5f * v * dt);
  }
}

void adamw_avx2(float* param, const float* grad, float* m, float* v, std::size_t n,
                const AdamWParams& p) {
  const __m256 b1 = _mm256_set1_ps(p.beta1), b2 = _mm256_set1_ps(p.beta2);
  const __m256 ib1 = _mm256_set1_ps(1.0f - p.beta1), ib2 = _mm256_set1_ps(1.0f - p.beta2);
  const __m256 rbc1 = _mm256_set1_ps(1.0f / p.bias_correction1);
  const __m256 rbc2 = _mm256_set1_ps(1.0f / p.bias_correction2);
  const __m256 eps = _mm256_set1_ps(p.eps), lr = _mm256_set1_ps(p.lr);
  const __m256 wd = _mm256_set1_ps(p.weight_decay);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 g = _mm256_loadu_ps(grad + i);
    const __m256 mi = _mm256_fmadd_ps(b1, _mm256_loadu_ps(m + i), _mm256_mul_ps(ib1, g));
    const __m256 vi = _mm256_fmadd_ps(b2, _mm256_loadu_ps(v + i), _mm256_mul_ps(_mm256_mul_ps(ib2, g), g));
    _mm256_storeu_ps(m + i, mi);
    _mm256_storeu_ps(v + i, vi);
    const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(_mm256_mul_ps(vi, rbc2)), eps);
    const __m256 pi = _mm256_loadu_ps(param + i);
    const __m256 step = _mm256_fmadd_ps(wd, pi, _mm256_div_ps(_mm256_mul_ps(mi, rbc1), denom));
    _mm256_storeu_ps(param + i, _mm256_fnmadd_ps(lr, step, pi));
  }
  for (; i < n; ++i) {
    const float g = grad[i];
    m[i] = p.beta1 * m[i] + (1.0f - p.beta1) * g;
    v[i] = p.beta2 * v[i] + (1.0f - p.beta2) * g * g;
    const float mhat = m[i] / p.bias_correction1;
    const float vhat = v[i] / p.bias_correction2;
    param[i] -= p.lr * (mhat / (std::sqrt(vhat) + p.eps) + p.weight_decay * param[i]);
  }
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table = {sgemm_avx2, vexp_avx2, gelu_avx2, gelu_backward_avx2, adamw_avx2};
}  // namespace detail

}  // namespace ftfc::kernels
