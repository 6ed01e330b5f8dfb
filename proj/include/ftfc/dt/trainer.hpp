#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "ftfc/dt/model.hpp"
#include "ftfc/kernels.hpp"

namespace ftfc::dt {

/// One episode in model units: normalized observations, encoded actions and
/// returns-to-go divided by kRtgScale.
struct TrainingSequence {
  std::vector<float> rtg;
  std::vector<float> obs;
  std::vector<float> act;
  std::vector<int> timestep;

  int length() const { return static_cast<int>(rtg.size()); }
};

struct TrainConfig {
  int batch_size = 256;
  double learning_rate = 1e-4;
  double weight_decay = 1e-4;
  int epochs = 1;
  /// When > 0, overrides epochs. One epoch is as many updates as it takes to
  /// sample every timestep once in expectation.
  int updates = 0;
  int warmup = 0;           ///< linear learning-rate warmup, updates
  double final_lr_fraction = 1.0;  ///< cosine decay to this fraction of the peak
  double grad_clip = 1.0;   ///< global-norm clip, <= 0 disables
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int micro_batch = 64;     ///< windows per forward/backward chunk
  /// Train on every non-overlapping window of every sequence each update
  /// instead of sampling.
  bool full_batch = false;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct TrainResult {
  std::vector<float> params;
  std::vector<double> loss_curve;
  int updates = 0;
};

/// Offline supervised trainer: mean-squared action error over K-step windows,
/// AdamW with decoupled weight decay on matrix weights.
class Trainer {
 public:
  Trainer(DtConfig model, TrainConfig config, std::span<const TrainingSequence> data,
          std::vector<float> initial_params = {});

  /// Runs one update and returns its loss. On a non-finite loss or gradient
  /// the parameters are left at their last good values and
  /// Error(kTrainingDivergence) is thrown.
  double step();
  int total_updates() const { return total_updates_; }
  int updates_done() const { return updates_; }

  const std::vector<float>& params() const { return params_; }
  const std::vector<double>& loss_curve() const { return losses_; }
  const DecisionTransformer<float>& model() const { return model_; }
  double learning_rate_at(int update) const;

 private:
  std::vector<Window> sample_batch();

  DecisionTransformer<float> model_;
  TrainConfig config_;
  std::span<const TrainingSequence> data_;
  std::vector<float> params_, grad_, m_, v_;
  std::vector<Window> all_windows_;
  std::discrete_distribution<std::size_t> pick_;
  std::mt19937_64 rng_;
  Workspace<float> ws_;
  std::vector<double> losses_;
  int updates_ = 0;
  int total_updates_ = 0;
};

using ProgressFn = std::function<void(int update, int total, double loss)>;

TrainResult train(std::span<const TrainingSequence> data, const DtConfig& model,
                  const TrainConfig& config, const ProgressFn& progress = {});

/// Non-overlapping windows of length <= context, starting at 0 in each sequence.
std::vector<Window> tile_windows(std::span<const TrainingSequence> data, int context);

/// Mean squared action error of `params` over every tiled window.
double action_mse(const DecisionTransformer<float>& model, std::span<const float> params,
                  std::span<const TrainingSequence> data);

}  // namespace ftfc::dt
