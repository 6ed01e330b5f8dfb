#include "ftfc/dt/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ftfc/error.hpp"
#include "ftfc/kernels.hpp"

namespace ftfc::dt {

void DtConfig::validate() const {
  if (layers < 1 || heads < 1 || embed < 1 || ffn < 1 || context < 1 || obs_dim < 1 ||
      act_dim < 1 || max_timestep < 1) {
    fail(ErrorKind::kInvalidArgument, "transformer dimensions must be positive");
  }
  if (embed % heads != 0) fail(ErrorKind::kInvalidArgument, "embed dim must be divisible by heads");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail(ErrorKind::kInvalidArgument, "dropout must be in [0, 1)");
}

ParamLayout::ParamLayout(const DtConfig& c) {
  c.validate();
  const int d = c.embed;
  rtg_w = add("embed_rtg.w", 1, d, true);
  rtg_b = add("embed_rtg.b", 1, d, false);
  obs_w = add("embed_obs.w", c.obs_dim, d, true);
  obs_b = add("embed_obs.b", 1, d, false);
  act_w = add("embed_act.w", c.act_dim, d, true);
  act_b = add("embed_act.b", 1, d, false);
  time = add("embed_time", c.max_timestep, d, false);
  eln_g = add("embed_ln.g", 1, d, false);
  eln_b = add("embed_ln.b", 1, d, false);
  for (int l = 0; l < c.layers; ++l) {
    const std::string p = "block" + std::to_string(l) + ".";
    Block b{};
    b.ln1_g = add(p + "ln1.g", 1, d, false);
    b.ln1_b = add(p + "ln1.b", 1, d, false);
    b.qkv_w = add(p + "attn.qkv.w", d, 3 * d, true);
    b.qkv_b = add(p + "attn.qkv.b", 1, 3 * d, false);
    b.proj_w = add(p + "attn.proj.w", d, d, true);
    b.proj_b = add(p + "attn.proj.b", 1, d, false);
    b.ln2_g = add(p + "ln2.g", 1, d, false);
    b.ln2_b = add(p + "ln2.b", 1, d, false);
    b.w1 = add(p + "ffn.w1", d, c.ffn, true);
    b.b1 = add(p + "ffn.b1", 1, c.ffn, false);
    b.w2 = add(p + "ffn.w2", c.ffn, d, true);
    b.b2 = add(p + "ffn.b2", 1, d, false);
    blocks.push_back(b);
  }
  fln_g = add("final_ln.g", 1, d, false);
  fln_b = add("final_ln.b", 1, d, false);
  head_w = add("head.w", d, c.act_dim, true);
  head_b = add("head.b", 1, c.act_dim, false);
}

std::size_t ParamLayout::add(const std::string& name, int rows, int cols, bool decay) {
  tensors_.push_back({name, total_, rows, cols, decay});
  const std::size_t at = total_;
  total_ += static_cast<std::size_t>(rows) * cols;
  return at;
}

const TensorInfo& ParamLayout::at(const std::string& name) const {
  for (const TensorInfo& t : tensors_) {
    if (t.name == name) return t;
  }
  fail(ErrorKind::kInvalidArgument, "no tensor named '" + name + "'");
}

template <class T>
const T* Workspace<T>::attention(int layer, std::size_t window, int head) const {
  const std::size_t n = static_cast<std::size_t>(window_tokens(window));
  return prob[layer].data() + prob_offset[window] + static_cast<std::size_t>(head) * n * n;
}

std::array<float, 4> encode_action(const std::array<double, 4>& c) {
  return {static_cast<float>(c[0]), static_cast<float>(c[1]), static_cast<float>(c[2]),
          static_cast<float>(2.0 * c[3] - 1.0)};
}

std::array<double, 4> decode_action(std::span<const float> a) {
  return {a[0], a[1], a[2], 0.5 * (static_cast<double>(a[3]) + 1.0)};
}

namespace {

constexpr double kLnEps = 1e-5;

// ---- primitives: float goes to the dispatched kernels, double stays scalar

void gemm(bool ta, bool tb, int m, int n, int k, float alpha, const float* a, int lda,
          const float* b, int ldb, float beta, float* c, int ldc) {
  kernels::sgemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

void gemm(bool ta, bool tb, int m, int n, int k, double alpha, const double* a, int lda,
          const double* b, int ldb, double beta, double* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int p = 0; p < k; ++p) {
        const double x = ta ? a[static_cast<std::ptrdiff_t>(p) * lda + i] : a[static_cast<std::ptrdiff_t>(i) * lda + p];
        const double y = tb ? b[static_cast<std::ptrdiff_t>(j) * ldb + p] : b[static_cast<std::ptrdiff_t>(p) * ldb + j];
        s += x * y;
      }
      double& out = c[static_cast<std::ptrdiff_t>(i) * ldc + j];
      out = (beta == 0.0 ? 0.0 : beta * out) + alpha * s;
    }
  }
}

void gelu(const float* x, float* y, std::size_t n) { kernels::gelu(x, y, n); }
void gelu_backward(const float* x, const float* dy, float* dx, std::size_t n) {
  kernels::gelu_backward(x, dy, dx, n);
}

constexpr double kGeluC = 0.7978845608028654;
constexpr double kGeluA = 0.044715;

void gelu(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i];
    y[i] = 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  }
}

void gelu_backward(const double* x, const double* dy, double* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i];
    const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
    const double dt = (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
    dx[i] = dy[i] * (0.5 * (1.0 + t) + 0.5 * v * dt);
  }
}

void vexp(const float* x, float* y, std::size_t n) { kernels::vexp(x, y, n); }
void vexp(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}

template <class T>
void layernorm_forward(const T* x, const T* gamma, const T* beta, T* y, T* mean, T* rstd, int rows,
                       int d) {
  for (int r = 0; r < rows; ++r) {
    const T* xr = x + static_cast<std::ptrdiff_t>(r) * d;
    T* yr = y + static_cast<std::ptrdiff_t>(r) * d;
    T mu = 0;
    for (int i = 0; i < d; ++i) mu += xr[i];
    mu /= static_cast<T>(d);
    T var = 0;
    for (int i = 0; i < d; ++i) var += (xr[i] - mu) * (xr[i] - mu);
    var /= static_cast<T>(d);
    const T rs = static_cast<T>(1) / std::sqrt(var + static_cast<T>(kLnEps));
    for (int i = 0; i < d; ++i) yr[i] = (xr[i] - mu) * rs * gamma[i] + beta[i];
    mean[r] = mu;
    rstd[r] = rs;
  }
}

// dx (+)= LN'(x) dy; dgamma, dbeta accumulate.
template <class T>
void layernorm_backward(const T* x, const T* gamma, const T* mean, const T* rstd, const T* dy,
                        T* dx, bool accumulate, T* dgamma, T* dbeta, int rows, int d) {
  for (int r = 0; r < rows; ++r) {
    const T* xr = x + static_cast<std::ptrdiff_t>(r) * d;
    const T* dyr = dy + static_cast<std::ptrdiff_t>(r) * d;
    T* dxr = dx + static_cast<std::ptrdiff_t>(r) * d;
    const T mu = mean[r], rs = rstd[r];
    T sum_dxhat = 0, sum_dxhat_xhat = 0;
    for (int i = 0; i < d; ++i) {
      const T xhat = (xr[i] - mu) * rs;
      const T dxhat = dyr[i] * gamma[i];
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xhat;
      dgamma[i] += dyr[i] * xhat;
      dbeta[i] += dyr[i];
    }
    const T inv_d = static_cast<T>(1) / static_cast<T>(d);
    for (int i = 0; i < d; ++i) {
      const T xhat = (xr[i] - mu) * rs;
      const T v = rs * (dyr[i] * gamma[i] - inv_d * sum_dxhat - xhat * inv_d * sum_dxhat_xhat);
      dxr[i] = accumulate ? dxr[i] + v : v;
    }
  }
}

template <class T>
void add_bias(T* y, const T* bias, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    T* yr = y + static_cast<std::ptrdiff_t>(r) * cols;
    for (int c = 0; c < cols; ++c) yr[c] += bias[c];
  }
}

template <class T>
void bias_grad(const T* dy, T* db, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const T* dr = dy + static_cast<std::ptrdiff_t>(r) * cols;
    for (int c = 0; c < cols; ++c) db[c] += dr[c];
  }
}

template <class T>
void fill_dropout(std::vector<T>& mask, std::size_t n, double p, std::mt19937_64& rng) {
  mask.resize(n);
  std::bernoulli_distribution keep(1.0 - p);
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  for (std::size_t i = 0; i < n; ++i) mask[i] = keep(rng) ? scale : T(0);
}

}  // namespace

template <class T>
DecisionTransformer<T>::DecisionTransformer(DtConfig config) : config_(config), layout_(config) {}

template <class T>
std::vector<T> DecisionTransformer<T>::init_params(std::uint64_t seed) const {
  std::vector<T> p(layout_.total(), T(0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.02);
  const double residual_scale = 1.0 / std::sqrt(2.0 * config_.layers);
  for (const TensorInfo& t : layout_.tensors()) {
    const bool is_gain = t.name.ends_with(".g");
    const bool is_weight = t.decay || t.name == "embed_time";
    const bool residual = t.name.ends_with("attn.proj.w") || t.name.ends_with("ffn.w2");
    for (std::size_t i = 0; i < t.size(); ++i) {
      T v = T(0);
      if (is_gain) {
        v = T(1);
      } else if (is_weight) {
        v = static_cast<T>(normal(rng) * (residual ? residual_scale : 1.0));
      }
      p[t.offset + i] = v;
    }
  }
  return p;
}

template <class T>
void DecisionTransformer<T>::check(std::span<const T> params, std::span<const Window> windows) const {
  if (params.size() != layout_.total()) {
    fail(ErrorKind::kDimensionMismatch, "parameter vector has " + std::to_string(params.size()) +
                                            " entries, model needs " + std::to_string(layout_.total()));
  }
  if (windows.empty()) fail(ErrorKind::kDimensionMismatch, "no windows");
  for (const Window& w : windows) {
    if (w.length < 1 || w.length > config_.context) {
      fail(ErrorKind::kDimensionMismatch, "window length " + std::to_string(w.length) +
                                              " outside [1, " + std::to_string(config_.context) + "]");
    }
    if (w.left_pad < 0 || w.left_pad >= w.length) {
      fail(ErrorKind::kDimensionMismatch, "left padding must leave at least one real step");
    }
    if (!w.rtg || !w.obs || !w.act || !w.timestep) {
      fail(ErrorKind::kDimensionMismatch, "window has missing arrays");
    }
    for (int t = 0; t < w.length; ++t) {
      if (w.timestep[t] < 0 || w.timestep[t] >= config_.max_timestep) {
        fail(ErrorKind::kDimensionMismatch, "timestep outside the embedding table");
      }
    }
  }
}

template <class T>
void DecisionTransformer<T>::forward(std::span<const T> params, std::span<const Window> windows,
                                     Workspace<T>& ws, const ForwardOptions& opt) const {
  check(params, windows);
  const DtConfig& c = config_;
  const ParamLayout& L = layout_;
  const int d = c.embed, nh = c.heads, dh = c.head_dim(), f = c.ffn;
  const T* P = params.data();

  ws.token_offset.assign(1, 0);
  ws.step_offset.assign(1, 0);
  ws.prob_offset.assign(1, 0);
  for (const Window& w : windows) {
    const int n = 3 * w.length;
    ws.token_offset.push_back(ws.token_offset.back() + n);
    ws.step_offset.push_back(ws.step_offset.back() + w.length);
    ws.prob_offset.push_back(ws.prob_offset.back() + static_cast<std::size_t>(nh) * n * n);
  }
  const int N = ws.token_offset.back();
  const int S = ws.step_offset.back();
  ws.tokens = N;
  ws.steps = S;
  const std::size_t nd = static_cast<std::size_t>(N) * d;
  const bool drop = opt.training && c.dropout > 0.0;
  ws.dropout_active = drop;
  std::mt19937_64 drop_rng(opt.dropout_seed);

  // Embedding
  ws.xraw.assign(nd, T(0));
  for (std::size_t wi = 0; wi < windows.size(); ++wi) {
    const Window& w = windows[wi];
    for (int t = 0; t < w.length; ++t) {
      const int row = ws.token_offset[wi] + 3 * t;
      T* xr = ws.xraw.data() + static_cast<std::size_t>(row) * d;
      T* xo = xr + d;
      T* xa = xo + d;
      const T* te = P + L.time + static_cast<std::size_t>(w.timestep[t]) * d;
      const T rtg = static_cast<T>(w.rtg[t]);
      for (int i = 0; i < d; ++i) {
        xr[i] = rtg * P[L.rtg_w + i] + P[L.rtg_b + i] + te[i];
        xo[i] = P[L.obs_b + i] + te[i];
        xa[i] = P[L.act_b + i] + te[i];
      }
      for (int k = 0; k < c.obs_dim; ++k) {
        const T o = static_cast<T>(w.obs[static_cast<std::size_t>(t) * c.obs_dim + k]);
        const T* wr = P + L.obs_w + static_cast<std::size_t>(k) * d;
        for (int i = 0; i < d; ++i) xo[i] += o * wr[i];
      }
      for (int k = 0; k < c.act_dim; ++k) {
        const T a = static_cast<T>(w.act[static_cast<std::size_t>(t) * c.act_dim + k]);
        const T* wr = P + L.act_w + static_cast<std::size_t>(k) * d;
        for (int i = 0; i < d; ++i) xa[i] += a * wr[i];
      }
    }
  }
  const int nl = c.layers;
  auto sized = [&](std::vector<std::vector<T>>& v, std::size_t n) {
    v.resize(nl);
    for (auto& e : v) e.resize(n);
  };
  ws.x.resize(nl + 1);
  for (auto& e : ws.x) e.resize(nd);
  sized(ws.xmid, nd);
  sized(ws.h1, nd);
  sized(ws.h2, nd);
  sized(ws.att, nd);
  sized(ws.qkv, nd * 3);
  sized(ws.u, static_cast<std::size_t>(N) * f);
  sized(ws.g, static_cast<std::size_t>(N) * f);
  sized(ws.ln1_mean, N);
  sized(ws.ln1_rstd, N);
  sized(ws.ln2_mean, N);
  sized(ws.ln2_rstd, N);
  sized(ws.prob, ws.prob_offset.back());
  ws.eln_mean.resize(N);
  ws.eln_rstd.resize(N);

  layernorm_forward(ws.xraw.data(), P + L.eln_g, P + L.eln_b, ws.x[0].data(), ws.eln_mean.data(),
                    ws.eln_rstd.data(), N, d);
  if (drop) {
    fill_dropout(ws.drop_embed, nd, c.dropout, drop_rng);
    for (std::size_t i = 0; i < nd; ++i) ws.x[0][i] *= ws.drop_embed[i];
  }
  if (drop) {
    sized(ws.drop_attn, nd);
    sized(ws.drop_ffn, nd);
  }

  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
  for (int l = 0; l < nl; ++l) {
    const ParamLayout::Block& B = L.blocks[l];
    const T* xin = ws.x[l].data();
    layernorm_forward(xin, P + B.ln1_g, P + B.ln1_b, ws.h1[l].data(), ws.ln1_mean[l].data(),
                      ws.ln1_rstd[l].data(), N, d);
    gemm(false, false, N, 3 * d, d, T(1), ws.h1[l].data(), d, P + B.qkv_w, 3 * d, T(0),
         ws.qkv[l].data(), 3 * d);
    add_bias(ws.qkv[l].data(), P + B.qkv_b, N, 3 * d);

    // Causal attention, one window at a time.
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
      const int r0 = ws.token_offset[wi];
      const int n = ws.window_tokens(wi);
      const int pad = 3 * windows[wi].left_pad;
      const T* q0 = ws.qkv[l].data() + static_cast<std::size_t>(r0) * 3 * d;
      for (int h = 0; h < nh; ++h) {
        T* pr = ws.prob[l].data() + ws.prob_offset[wi] + static_cast<std::size_t>(h) * n * n;
        const T* q = q0 + h * dh;
        const T* k = q0 + d + h * dh;
        const T* v = q0 + 2 * d + h * dh;
        gemm(false, true, n, n, dh, scale, q, 3 * d, k, 3 * d, T(0), pr, n);
        for (int i = 0; i < n; ++i) {
          T* row = pr + static_cast<std::size_t>(i) * n;
          if (i < pad) {
            std::fill(row, row + n, T(0));
            continue;
          }
          T mx = row[pad];
          for (int j = pad + 1; j <= i; ++j) mx = std::max(mx, row[j]);
          for (int j = pad; j <= i; ++j) row[j] -= mx;
          vexp(row + pad, row + pad, static_cast<std::size_t>(i - pad + 1));
          T sum = 0;
          for (int j = pad; j <= i; ++j) sum += row[j];
          const T inv = T(1) / sum;
          for (int j = 0; j < pad; ++j) row[j] = T(0);
          for (int j = pad; j <= i; ++j) row[j] *= inv;
          for (int j = i + 1; j < n; ++j) row[j] = T(0);
        }
        gemm(false, false, n, dh, n, T(1), pr, n, v, 3 * d, T(0),
             ws.att[l].data() + static_cast<std::size_t>(r0) * d + h * dh, d);
      }
    }

    T* xmid = ws.xmid[l].data();
    gemm(false, false, N, d, d, T(1), ws.att[l].data(), d, P + B.proj_w, d, T(0), xmid, d);
    add_bias(xmid, P + B.proj_b, N, d);
    if (drop) {
      fill_dropout(ws.drop_attn[l], nd, c.dropout, drop_rng);
      for (std::size_t i = 0; i < nd; ++i) xmid[i] *= ws.drop_attn[l][i];
    }
    for (std::size_t i = 0; i < nd; ++i) xmid[i] += xin[i];

    layernorm_forward(xmid, P + B.ln2_g, P + B.ln2_b, ws.h2[l].data(), ws.ln2_mean[l].data(),
                      ws.ln2_rstd[l].data(), N, d);
    gemm(false, false, N, f, d, T(1), ws.h2[l].data(), d, P + B.w1, f, T(0), ws.u[l].data(), f);
    add_bias(ws.u[l].data(), P + B.b1, N, f);
    gelu(ws.u[l].data(), ws.g[l].data(), static_cast<std::size_t>(N) * f);
    T* xout = ws.x[l + 1].data();
    gemm(false, false, N, d, f, T(1), ws.g[l].data(), f, P + B.w2, d, T(0), xout, d);
    add_bias(xout, P + B.b2, N, d);
    if (drop) {
      fill_dropout(ws.drop_ffn[l], nd, c.dropout, drop_rng);
      for (std::size_t i = 0; i < nd; ++i) xout[i] *= ws.drop_ffn[l][i];
    }
    for (std::size_t i = 0; i < nd; ++i) xout[i] += xmid[i];
  }

  ws.hf.resize(nd);
  ws.fln_mean.resize(N);
  ws.fln_rstd.resize(N);
  layernorm_forward(ws.x[nl].data(), P + L.fln_g, P + L.fln_b, ws.hf.data(), ws.fln_mean.data(),
                    ws.fln_rstd.data(), N, d);

  // Action head at each observation token.
  const int na = c.act_dim;
  ws.pred.resize(static_cast<std::size_t>(S) * na);
  for (std::size_t wi = 0; wi < windows.size(); ++wi) {
    for (int t = 0; t < windows[wi].length; ++t) {
      const T* h = ws.hf.data() + static_cast<std::size_t>(ws.token_offset[wi] + 3 * t + 1) * d;
      T* out = ws.pred.data() + static_cast<std::size_t>(ws.step_offset[wi] + t) * na;
      for (int a = 0; a < na; ++a) {
        T s = P[L.head_b + a];
        for (int i = 0; i < d; ++i) s += h[i] * P[L.head_w + static_cast<std::size_t>(i) * na + a];
        out[a] = std::tanh(s);
      }
    }
  }
}

template <class T>
void DecisionTransformer<T>::backward(std::span<const T> params, std::span<const Window> windows,
                                      Workspace<T>& ws, std::span<const T> d_pred,
                                      std::span<T> grad) const {
  check(params, windows);
  const DtConfig& c = config_;
  const ParamLayout& L = layout_;
  const int d = c.embed, nh = c.heads, dh = c.head_dim(), f = c.ffn, na = c.act_dim;
  const int N = ws.tokens, S = ws.steps;
  if (ws.step_offset.size() != windows.size() + 1 || ws.step_offset.back() != S) {
    fail(ErrorKind::kDimensionMismatch, "backward() windows differ from the last forward()");
  }
  if (d_pred.size() != static_cast<std::size_t>(S) * na || grad.size() != layout_.total()) {
    fail(ErrorKind::kDimensionMismatch, "gradient buffers have the wrong size");
  }
  const T* P = params.data();
  T* G = grad.data();
  const std::size_t nd = static_cast<std::size_t>(N) * d;
  const bool drop = ws.dropout_active;

  // Head
  ws.dx.assign(nd, T(0));
  for (std::size_t wi = 0; wi < windows.size(); ++wi) {
    for (int t = 0; t < windows[wi].length; ++t) {
      const std::size_t row = static_cast<std::size_t>(ws.token_offset[wi] + 3 * t + 1);
      const std::size_t si = static_cast<std::size_t>(ws.step_offset[wi] + t);
      const T* h = ws.hf.data() + row * d;
      T* dh_row = ws.dx.data() + row * d;
      for (int a = 0; a < na; ++a) {
        const T y = ws.pred[si * na + a];
        const T ds = d_pred[si * na + a] * (T(1) - y * y);
        G[L.head_b + a] += ds;
        for (int i = 0; i < d; ++i) {
          G[L.head_w + static_cast<std::size_t>(i) * na + a] += h[i] * ds;
          dh_row[i] += ds * P[L.head_w + static_cast<std::size_t>(i) * na + a];
        }
      }
    }
  }
  // dx currently holds d(hf); push through the final LayerNorm.
  ws.tmp = ws.dx;
  layernorm_backward(ws.x[c.layers].data(), P + L.fln_g, ws.fln_mean.data(), ws.fln_rstd.data(),
                     ws.tmp.data(), ws.dx.data(), false, G + L.fln_g, G + L.fln_b, N, d);

  ws.dxmid.resize(nd);
  ws.dh.resize(nd);
  ws.datt.resize(nd);
  ws.dqkv.resize(nd * 3);
  ws.du.resize(static_cast<std::size_t>(N) * f);
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));

  for (int l = c.layers - 1; l >= 0; --l) {
    const ParamLayout::Block& B = L.blocks[l];
    // x[l+1] = xmid + drop(g W2 + b2)
    const T* dz = ws.dx.data();
    if (drop) {
      ws.tmp.resize(nd);
      for (std::size_t i = 0; i < nd; ++i) ws.tmp[i] = ws.dx[i] * ws.drop_ffn[l][i];
      dz = ws.tmp.data();
    }
    gemm(true, false, f, d, N, T(1), ws.g[l].data(), f, dz, d, T(1), G + B.w2, d);
    bias_grad(dz, G + B.b2, N, d);
    gemm(false, true, N, f, d, T(1), dz, d, P + B.w2, d, T(0), ws.du.data(), f);
    gelu_backward(ws.u[l].data(), ws.du.data(), ws.du.data(), static_cast<std::size_t>(N) * f);
    gemm(true, false, d, f, N, T(1), ws.h2[l].data(), d, ws.du.data(), f, T(1), G + B.w1, f);
    bias_grad(ws.du.data(), G + B.b1, N, f);
    gemm(false, true, N, d, f, T(1), ws.du.data(), f, P + B.w1, f, T(0), ws.dh.data(), d);
    std::copy(ws.dx.begin(), ws.dx.end(), ws.dxmid.begin());
    layernorm_backward(ws.xmid[l].data(), P + B.ln2_g, ws.ln2_mean[l].data(), ws.ln2_rstd[l].data(),
                       ws.dh.data(), ws.dxmid.data(), true, G + B.ln2_g, G + B.ln2_b, N, d);

    // xmid = x[l] + drop(att Wproj + bproj)
    const T* dy = ws.dxmid.data();
    if (drop) {
      ws.tmp.resize(nd);
      for (std::size_t i = 0; i < nd; ++i) ws.tmp[i] = ws.dxmid[i] * ws.drop_attn[l][i];
      dy = ws.tmp.data();
    }
    gemm(true, false, d, d, N, T(1), ws.att[l].data(), d, dy, d, T(1), G + B.proj_w, d);
    bias_grad(dy, G + B.proj_b, N, d);
    gemm(false, true, N, d, d, T(1), dy, d, P + B.proj_w, d, T(0), ws.datt.data(), d);

    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
      const int r0 = ws.token_offset[wi];
      const int n = ws.window_tokens(wi);
      const T* q0 = ws.qkv[l].data() + static_cast<std::size_t>(r0) * 3 * d;
      T* dq0 = ws.dqkv.data() + static_cast<std::size_t>(r0) * 3 * d;
      ws.dp.resize(static_cast<std::size_t>(n) * n);
      for (int h = 0; h < nh; ++h) {
        const T* pr = ws.prob[l].data() + ws.prob_offset[wi] + static_cast<std::size_t>(h) * n * n;
        const T* q = q0 + h * dh;
        const T* k = q0 + d + h * dh;
        const T* v = q0 + 2 * d + h * dh;
        const T* datt = ws.datt.data() + static_cast<std::size_t>(r0) * d + h * dh;
        T* dp = ws.dp.data();
        gemm(false, true, n, n, dh, T(1), datt, d, v, 3 * d, T(0), dp, n);
        for (int i = 0; i < n; ++i) {
          const T* prow = pr + static_cast<std::size_t>(i) * n;
          T* drow = dp + static_cast<std::size_t>(i) * n;
          T dot = 0;
          for (int j = 0; j <= i; ++j) dot += prow[j] * drow[j];
          for (int j = 0; j <= i; ++j) drow[j] = prow[j] * (drow[j] - dot) * scale;
          for (int j = i + 1; j < n; ++j) drow[j] = T(0);
        }
        gemm(false, false, n, dh, n, T(1), dp, n, k, 3 * d, T(0), dq0 + h * dh, 3 * d);
        gemm(true, false, n, dh, n, T(1), dp, n, q, 3 * d, T(0), dq0 + d + h * dh, 3 * d);
        gemm(true, false, n, dh, n, T(1), pr, n, datt, d, T(0), dq0 + 2 * d + h * dh, 3 * d);
      }
    }
    gemm(true, false, d, 3 * d, N, T(1), ws.h1[l].data(), d, ws.dqkv.data(), 3 * d, T(1), G + B.qkv_w,
         3 * d);
    bias_grad(ws.dqkv.data(), G + B.qkv_b, N, 3 * d);
    gemm(false, true, N, d, 3 * d, T(1), ws.dqkv.data(), 3 * d, P + B.qkv_w, 3 * d, T(0),
         ws.dh.data(), d);
    std::copy(ws.dxmid.begin(), ws.dxmid.end(), ws.dx.begin());
    layernorm_backward(ws.x[l].data(), P + B.ln1_g, ws.ln1_mean[l].data(), ws.ln1_rstd[l].data(),
                       ws.dh.data(), ws.dx.data(), true, G + B.ln1_g, G + B.ln1_b, N, d);
  }

  if (drop) {
    for (std::size_t i = 0; i < nd; ++i) ws.dx[i] *= ws.drop_embed[i];
  }
  ws.tmp.resize(nd);
  layernorm_backward(ws.xraw.data(), P + L.eln_g, ws.eln_mean.data(), ws.eln_rstd.data(),
                     ws.dx.data(), ws.tmp.data(), false, G + L.eln_g, G + L.eln_b, N, d);

  for (std::size_t wi = 0; wi < windows.size(); ++wi) {
    const Window& w = windows[wi];
    for (int t = 0; t < w.length; ++t) {
      const std::size_t row = static_cast<std::size_t>(ws.token_offset[wi] + 3 * t);
      const T* dr = ws.tmp.data() + row * d;
      const T* dobs = dr + d;
      const T* dact = dobs + d;
      T* gt = G + L.time + static_cast<std::size_t>(w.timestep[t]) * d;
      const T rtg = static_cast<T>(w.rtg[t]);
      for (int i = 0; i < d; ++i) {
        gt[i] += dr[i] + dobs[i] + dact[i];
        G[L.rtg_w + i] += rtg * dr[i];
        G[L.rtg_b + i] += dr[i];
        G[L.obs_b + i] += dobs[i];
        G[L.act_b + i] += dact[i];
      }
      for (int k = 0; k < c.obs_dim; ++k) {
        const T o = static_cast<T>(w.obs[static_cast<std::size_t>(t) * c.obs_dim + k]);
        T* gw = G + L.obs_w + static_cast<std::size_t>(k) * d;
        for (int i = 0; i < d; ++i) gw[i] += o * dobs[i];
      }
      for (int k = 0; k < c.act_dim; ++k) {
        const T a = static_cast<T>(w.act[static_cast<std::size_t>(t) * c.act_dim + k]);
        T* gw = G + L.act_w + static_cast<std::size_t>(k) * d;
        for (int i = 0; i < d; ++i) gw[i] += a * dact[i];
      }
    }
  }
}

template struct Workspace<float>;
template struct Workspace<double>;
template class DecisionTransformer<float>;
template class DecisionTransformer<double>;

}  // namespace ftfc::dt
