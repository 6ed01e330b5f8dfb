#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ftfc::dt {

struct DtConfig {
  int layers = 3;
  int heads = 4;
  int embed = 128;
  int ffn = 512;
  int context = 60;  ///< timesteps per window; three tokens each
  int obs_dim = 17;
  int act_dim = 4;
  int max_timestep = 1000;  ///< size of the learned timestep table
  double dropout = 0.0;

  void validate() const;
  int head_dim() const { return embed / heads; }
  bool operator==(const DtConfig&) const = default;
};

struct TensorInfo {
  std::string name;
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;
  bool decay = false;  ///< receives weight decay (matrix weights only)

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

/// Every tensor of the model as a slice of one flat parameter vector.
class ParamLayout {
 public:
  explicit ParamLayout(const DtConfig& config);

  std::size_t total() const { return total_; }
  std::span<const TensorInfo> tensors() const { return tensors_; }
  const TensorInfo& at(const std::string& name) const;

  // Offsets of the tensors the forward pass touches.
  struct Block {
    std::size_t ln1_g, ln1_b, qkv_w, qkv_b, proj_w, proj_b, ln2_g, ln2_b, w1, b1, w2, b2;
  };
  std::size_t rtg_w, rtg_b, obs_w, obs_b, act_w, act_b, time, eln_g, eln_b;
  std::vector<Block> blocks;
  std::size_t fln_g, fln_b, head_w, head_b;

 private:
  std::size_t add(const std::string& name, int rows, int cols, bool decay);
  std::vector<TensorInfo> tensors_;
  std::size_t total_ = 0;
};

/// One training or inference context: `length` consecutive timesteps. The
/// first `left_pad` of them are padding that no real token attends to.
/// Arrays are row-major: obs is length x obs_dim, act is length x act_dim.
struct Window {
  int length = 0;
  int left_pad = 0;
  const float* rtg = nullptr;
  const float* obs = nullptr;
  const float* act = nullptr;
  const int* timestep = nullptr;
};

/// Activations kept between forward and backward. Reused across calls.
template <class T>
struct Workspace {
  int tokens = 0;
  int steps = 0;
  std::vector<int> token_offset;  ///< first token row of each window
  std::vector<int> step_offset;   ///< first prediction row of each window
  std::vector<std::size_t> prob_offset;

  std::vector<T> xraw, eln_mean, eln_rstd;
  std::vector<std::vector<T>> x, xmid, h1, ln1_mean, ln1_rstd, qkv, prob, att, h2, ln2_mean,
      ln2_rstd, u, g;
  std::vector<T> hf, fln_mean, fln_rstd, pred;
  bool dropout_active = false;
  std::vector<T> drop_embed;
  std::vector<std::vector<T>> drop_attn, drop_ffn;

  // Backward scratch
  std::vector<T> dx, dxmid, dh, dqkv, datt, du, dp, tmp;

  /// Attention probabilities of one window and head (rows x rows, rows =
  /// 3 * window length).
  const T* attention(int layer, std::size_t window, int head) const;
  int window_tokens(std::size_t window) const {
    return token_offset[window + 1] - token_offset[window];
  }
};

struct ForwardOptions {
  bool training = false;
  std::uint64_t dropout_seed = 0;
};

/// Causal decision transformer over interleaved (return-to-go, observation,
/// action) tokens. Each token type has its own linear embedding; a learned
/// timestep embedding is added to all three tokens of a step, followed by a
/// LayerNorm. Pre-norm blocks, tanh-approximation GELU, final LayerNorm, and
/// a tanh action head read at each observation token.
template <class T>
class DecisionTransformer {
 public:
  explicit DecisionTransformer(DtConfig config);

  const DtConfig& config() const { return config_; }
  const ParamLayout& layout() const { return layout_; }
  std::size_t parameter_count() const { return layout_.total(); }

  std::vector<T> init_params(std::uint64_t seed) const;

  /// Fills ws.pred with one act_dim row per timestep of each window, in
  /// window order. Throws Error(kDimensionMismatch) for empty windows,
  /// windows longer than the context, or a wrong parameter count.
  void forward(std::span<const T> params, std::span<const Window> windows, Workspace<T>& ws,
               const ForwardOptions& options = {}) const;

  /// Accumulates dLoss/dparams into `grad` given dLoss/dpred, using the
  /// activations of the last forward() on the same windows.
  void backward(std::span<const T> params, std::span<const Window> windows, Workspace<T>& ws,
                std::span<const T> d_pred, std::span<T> grad) const;

 private:
  void check(std::span<const T> params, std::span<const Window> windows) const;

  DtConfig config_;
  ParamLayout layout_;
};

extern template class DecisionTransformer<float>;
extern template class DecisionTransformer<double>;

/// Actions live in [-1, 1] inside the model; throttle is mapped from [0, 1].
std::array<float, 4> encode_action(const std::array<double, 4>& controls);
std::array<double, 4> decode_action(std::span<const float> model_action);

/// Return-to-go scale: the episode horizon.
inline constexpr double kRtgScale = 1000.0;

}  // namespace ftfc::dt
