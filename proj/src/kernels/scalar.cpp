#include <cmath>
#include <vector>

#include "ftfc/kernels.hpp"

namespace ftfc::kernels {

namespace {

constexpr float kGeluC = 0.7978845608028654f;  // sqrt(2/pi)
constexpr float kGeluA = 0.044715f;

void sgemm_scalar(bool ta, bool tb, int m, int n, int k, float alpha, const float* a, int lda,
                  const float* b, int ldb, float beta, float* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    float* crow = c + static_cast<std::ptrdiff_t>(i) * ldc;
    if (beta == 0.0f) {
      for (int j = 0; j < n; ++j) crow[j] = 0.0f;
    } else if (beta != 1.0f) {
      for (int j = 0; j < n; ++j) crow[j] *= beta;
    }
  }
  if (k == 0 || alpha == 0.0f) return;
  // Accumulate each row in a separate buffer so the k-reduction order is the
  // plain sequential one regardless of the transposition flags.
  std::vector<float> acc(static_cast<std::size_t>(n));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) acc[j] = 0.0f;
    for (int p = 0; p < k; ++p) {
      const float aip = ta ? a[static_cast<std::ptrdiff_t>(p) * lda + i]
                           : a[static_cast<std::ptrdiff_t>(i) * lda + p];
      if (tb) {
        for (int j = 0; j < n; ++j) acc[j] += aip * b[static_cast<std::ptrdiff_t>(j) * ldb + p];
      } else {
        const float* brow = b + static_cast<std::ptrdiff_t>(p) * ldb;
        for (int j = 0; j < n; ++j) acc[j] += aip * brow[j];
      }
    }
    float* crow = c + static_cast<std::ptrdiff_t>(i) * ldc;
    for (int j = 0; j < n; ++j) crow[j] += alpha * acc[j];
  }
}

void vexp_scalar(const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}

void gelu_scalar(const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const float v = x[i];
    const float t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
    y[i] = 0.5f * v * (1.0f + t);
  }
}

void gelu_backward_scalar(const float* x, const float* dy, float* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const float v = x[i];
    const float t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
    const float dt = (1.0f - t * t) * kGeluC * (1.0f + 3.0f * kGeluA * v * v);
    dx[i] = dy[i] * (0.5f * (1.0f + t) + 0.5f * v * dt);
  }
}

void adamw_scalar(float* param, const float* grad, float* m, float* v, std::size_t n,
                  const AdamWParams& p) {
  for (std::size_t i = 0; i < n; ++i) {
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
const KernelTable kScalarTable = {sgemm_scalar, vexp_scalar, gelu_scalar, gelu_backward_scalar,
                                  adamw_scalar};
}  // namespace detail

}  // namespace ftfc::kernels
