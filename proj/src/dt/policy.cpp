#include "ftfc/dt/policy.hpp"

#include <algorithm>

#include "ftfc/error.hpp"

namespace ftfc::dt {

DtPolicy::DtPolicy(DtConfig config, std::shared_ptr<const std::vector<float>> params, double rtg_target)
    : model_(config), params_(std::move(params)), rtg_target_(rtg_target) {
  if (!params_ || params_->size() != model_.parameter_count()) {
    fail(ErrorKind::kDimensionMismatch, "policy parameters do not match the model size");
  }
  if (config.obs_dim != static_cast<int>(kObservationSize) ||
      config.act_dim != static_cast<int>(ControlInputs::kSize)) {
    fail(ErrorKind::kDimensionMismatch, "policy model dimensions do not match the environment");
  }
}

DtPolicy::DtPolicy(DtConfig config, std::vector<float> params, double rtg_target)
    : DtPolicy(config, std::make_shared<const std::vector<float>>(std::move(params)), rtg_target) {}

DtContext DtPolicy::new_context() const {
  DtContext c;
  c.rtg = rtg_target_;
  return c;
}

namespace {

template <class V>
void drop_front(V& v, std::size_t n) {
  v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
}

}  // namespace

std::vector<ControlInputs> DtPolicy::act(std::span<DtContext* const> contexts,
                                         std::span<const Observation> observations) {
  if (contexts.size() != observations.size()) {
    fail(ErrorKind::kDimensionMismatch, "one observation per context required");
  }
  const auto& cfg = model_.config();
  std::vector<Window> windows;
  windows.reserve(contexts.size());
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    DtContext& c = *contexts[i];
    const auto n = observations[i].normalized();
    c.rtg_tokens.push_back(static_cast<float>(c.rtg / kRtgScale));
    for (double x : n) c.obs.push_back(static_cast<float>(x));
    c.act.insert(c.act.end(), cfg.act_dim, 0.0f);
    c.timestep.push_back(std::min(c.steps, cfg.max_timestep - 1));
    if (c.length() > cfg.context) {
      drop_front(c.rtg_tokens, 1);
      drop_front(c.obs, cfg.obs_dim);
      drop_front(c.act, cfg.act_dim);
      drop_front(c.timestep, 1);
    }
    windows.push_back({c.length(), 0, c.rtg_tokens.data(), c.obs.data(), c.act.data(), c.timestep.data()});
  }

  std::vector<ControlInputs> out;
  out.reserve(contexts.size());
  if (contexts.empty()) return out;
  model_.forward(*params_, windows, ws_);
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    DtContext& c = *contexts[i];
    const std::size_t row = static_cast<std::size_t>(ws_.step_offset[i + 1] - 1);
    const std::span<const float> pred(ws_.pred.data() + row * cfg.act_dim, cfg.act_dim);
    std::copy(pred.begin(), pred.end(), c.act.end() - cfg.act_dim);
    out.push_back(ControlInputs::from_array(decode_action(pred)).clamped());
    ++c.steps;
  }
  return out;
}

ControlInputs DtPolicy::act(DtContext& context, const Observation& observation) {
  DtContext* ptr = &context;
  return act(std::span<DtContext* const>(&ptr, 1), std::span<const Observation>(&observation, 1))[0];
}

}  // namespace ftfc::dt
