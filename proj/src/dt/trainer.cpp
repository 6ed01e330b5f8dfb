#include "ftfc/dt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ftfc/error.hpp"

namespace ftfc::dt {

void TrainConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::kInvalidArgument, "train config: " + what); };
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (micro_batch < 1) bad("micro_batch must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be > 0");
  if (weight_decay < 0.0) bad("weight_decay must be >= 0");
  if (epochs < 1 && updates < 1) bad("need epochs >= 1 or updates >= 1");
  if (warmup < 0) bad("warmup must be >= 0");
  if (final_lr_fraction < 0.0 || final_lr_fraction > 1.0) bad("final_lr_fraction must be in [0, 1]");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) bad("betas must be in [0, 1)");
  if (!(eps > 0.0)) bad("eps must be > 0");
}

std::vector<Window> tile_windows(std::span<const TrainingSequence> data, int context) {
  std::vector<Window> out;
  const int obs_dim = data.empty() ? 0 : static_cast<int>(data[0].obs.size() / std::max(1, data[0].length()));
  const int act_dim = data.empty() ? 0 : static_cast<int>(data[0].act.size() / std::max(1, data[0].length()));
  for (const auto& s : data) {
    for (int start = 0; start < s.length(); start += context) {
      Window w;
      w.length = std::min(context, s.length() - start);
      w.rtg = s.rtg.data() + start;
      w.obs = s.obs.data() + static_cast<std::size_t>(start) * obs_dim;
      w.act = s.act.data() + static_cast<std::size_t>(start) * act_dim;
      w.timestep = s.timestep.data() + start;
      out.push_back(w);
    }
  }
  return out;
}

namespace {

void check_data(std::span<const TrainingSequence> data, const DtConfig& model) {
  if (data.empty()) fail(ErrorKind::kEmptyDataset, "no training sequences");
  for (const auto& s : data) {
    const auto n = static_cast<std::size_t>(s.length());
    if (n == 0) fail(ErrorKind::kEmptyDataset, "training sequence with no steps");
    if (s.obs.size() != n * model.obs_dim || s.act.size() != n * model.act_dim ||
        s.timestep.size() != n) {
      fail(ErrorKind::kDimensionMismatch, "training sequence arrays do not match the model dimensions");
    }
    for (int t : s.timestep) {
      if (t < 0 || t >= model.max_timestep) {
        fail(ErrorKind::kDimensionMismatch, "timestep " + std::to_string(t) + " outside the embedding table");
      }
    }
  }
}

// Prediction rows cover every step of each window, padding included.
double squared_error(std::span<const Window> windows, const float* pred, int act_dim, float scale,
                     float* d_pred) {
  double sum = 0.0;
  std::size_t row = 0;
  for (const auto& w : windows) {
    for (int t = 0; t < w.length; ++t, ++row) {
      for (int a = 0; a < act_dim; ++a) {
        const std::size_t i = row * act_dim + a;
        if (t < w.left_pad) {
          if (d_pred != nullptr) d_pred[i] = 0.0f;
          continue;
        }
        const float diff = pred[i] - w.act[static_cast<std::size_t>(t) * act_dim + a];
        sum += static_cast<double>(diff) * diff;
        if (d_pred != nullptr) d_pred[i] = 2.0f * diff * scale;
      }
    }
  }
  return sum;
}

std::size_t predicted_steps(std::span<const Window> windows) {
  std::size_t n = 0;
  for (const auto& w : windows) n += static_cast<std::size_t>(w.length - w.left_pad);
  return n;
}

}  // namespace

Trainer::Trainer(DtConfig model, TrainConfig config, std::span<const TrainingSequence> data,
                 std::vector<float> initial_params)
    : model_(model), config_(config), data_(data), rng_(config.seed) {
  config_.validate();
  check_data(data_, model);
  params_ = initial_params.empty() ? model_.init_params(config_.seed) : std::move(initial_params);
  if (params_.size() != model_.parameter_count()) {
    fail(ErrorKind::kDimensionMismatch, "initial parameters do not match the model size");
  }
  grad_.assign(params_.size(), 0.0f);
  m_.assign(params_.size(), 0.0f);
  v_.assign(params_.size(), 0.0f);

  std::vector<double> weights;
  std::size_t steps = 0;
  for (const auto& s : data_) {
    weights.push_back(static_cast<double>(s.length()));
    steps += static_cast<std::size_t>(s.length());
  }
  pick_ = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
  if (config_.full_batch) all_windows_ = tile_windows(data_, model.context);

  if (config_.updates > 0) {
    total_updates_ = config_.updates;
  } else if (config_.full_batch) {
    total_updates_ = config_.epochs;
  } else {
    const std::size_t windows = (steps + model.context - 1) / model.context;
    const std::size_t per_epoch = (windows + config_.batch_size - 1) / config_.batch_size;
    total_updates_ = config_.epochs * static_cast<int>(std::max<std::size_t>(1, per_epoch));
  }
}

double Trainer::learning_rate_at(int update) const {
  const double peak = config_.learning_rate;
  if (update < config_.warmup) return peak * (update + 1) / config_.warmup;
  const int span = std::max(1, total_updates_ - config_.warmup);
  const double progress = std::min(1.0, static_cast<double>(update - config_.warmup) / span);
  const double floor = config_.final_lr_fraction;
  return peak * (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

std::vector<Window> Trainer::sample_batch() {
  if (config_.full_batch) return all_windows_;
  const int K = model_.config().context;
  const int obs_dim = model_.config().obs_dim;
  const int act_dim = model_.config().act_dim;
  std::vector<Window> batch(config_.batch_size);
  for (auto& w : batch) {
    const auto& s = data_[pick_(rng_)];
    const int last = std::max(0, s.length() - K);
    const int start = std::uniform_int_distribution<int>(0, last)(rng_);
    w.length = std::min(K, s.length());
    w.rtg = s.rtg.data() + start;
    w.obs = s.obs.data() + static_cast<std::size_t>(start) * obs_dim;
    w.act = s.act.data() + static_cast<std::size_t>(start) * act_dim;
    w.timestep = s.timestep.data() + start;
  }
  return batch;
}

double Trainer::step() {
  const auto batch = sample_batch();
  const int act_dim = model_.config().act_dim;
  const std::size_t total_steps = predicted_steps(batch);
  const float scale = 1.0f / static_cast<float>(total_steps * act_dim);
  const std::uint64_t dropout_seed = rng_();

  std::fill(grad_.begin(), grad_.end(), 0.0f);
  double sum = 0.0;
  std::vector<float> d_pred;
  const std::span<const Window> all(batch);
  for (std::size_t first = 0; first < batch.size(); first += config_.micro_batch) {
    const auto chunk = all.subspan(first, std::min<std::size_t>(config_.micro_batch, batch.size() - first));
    model_.forward(params_, chunk, ws_, {.training = true, .dropout_seed = dropout_seed + first});
    d_pred.resize(ws_.pred.size());
    sum += squared_error(chunk, ws_.pred.data(), act_dim, scale, d_pred.data());
    model_.backward(params_, chunk, ws_, d_pred, grad_);
  }
  const double loss = sum * scale;

  double norm2 = 0.0;
  for (float g : grad_) norm2 += static_cast<double>(g) * g;
  if (!std::isfinite(loss) || !std::isfinite(norm2)) {
    fail(ErrorKind::kTrainingDivergence,
         "non-finite loss or gradient at update " + std::to_string(updates_) +
             "; parameters kept at the last good update");
  }
  const double norm = std::sqrt(norm2);
  if (config_.grad_clip > 0.0 && norm > config_.grad_clip) {
    const float s = static_cast<float>(config_.grad_clip / norm);
    for (float& g : grad_) g *= s;
  }

  const int t = updates_ + 1;
  kernels::AdamWParams p;
  p.lr = static_cast<float>(learning_rate_at(updates_));
  p.beta1 = static_cast<float>(config_.beta1);
  p.beta2 = static_cast<float>(config_.beta2);
  p.eps = static_cast<float>(config_.eps);
  p.bias_correction1 = static_cast<float>(1.0 - std::pow(config_.beta1, t));
  p.bias_correction2 = static_cast<float>(1.0 - std::pow(config_.beta2, t));
  for (const auto& tensor : model_.layout().tensors()) {
    p.weight_decay = tensor.decay ? static_cast<float>(config_.weight_decay) : 0.0f;
    const std::size_t o = tensor.offset;
    kernels::adamw(params_.data() + o, grad_.data() + o, m_.data() + o, v_.data() + o, tensor.size(), p);
  }
  ++updates_;
  losses_.push_back(loss);
  return loss;
}

TrainResult train(std::span<const TrainingSequence> data, const DtConfig& model,
                  const TrainConfig& config, const ProgressFn& progress) {
  Trainer trainer(model, config, data);
  const int total = trainer.total_updates();
  for (int i = 0; i < total; ++i) {
    const double loss = trainer.step();
    if (progress) progress(i + 1, total, loss);
  }
  return {trainer.params(), trainer.loss_curve(), trainer.updates_done()};
}

double action_mse(const DecisionTransformer<float>& model, std::span<const float> params,
                  std::span<const TrainingSequence> data) {
  const auto windows = tile_windows(data, model.config().context);
  if (windows.empty()) fail(ErrorKind::kEmptyDataset, "no windows to evaluate");
  Workspace<float> ws;
  const int act_dim = model.config().act_dim;
  const std::span<const Window> all(windows);
  double sum = 0.0;
  for (std::size_t first = 0; first < windows.size(); first += 64) {
    const auto chunk = all.subspan(first, std::min<std::size_t>(64, windows.size() - first));
    model.forward(params, chunk, ws);
    sum += squared_error(chunk, ws.pred.data(), act_dim, 1.0f, nullptr);
  }
  return sum / static_cast<double>(predicted_steps(windows) * act_dim);
}

}  // namespace ftfc::dt
