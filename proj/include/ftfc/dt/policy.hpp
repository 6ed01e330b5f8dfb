#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ftfc/controls.hpp"
#include "ftfc/dt/model.hpp"
#include "ftfc/environment.hpp"

namespace ftfc::dt {

/// Rolling context of one episode: the last `context` steps in model units.
struct DtContext {
  double rtg = 0.0;  ///< remaining return to go, reward units
  int steps = 0;     ///< environment steps seen so far
  std::vector<float> rtg_tokens, obs, act;
  std::vector<int> timestep;

  int length() const { return static_cast<int>(rtg_tokens.size()); }
};

/// Closed-loop controller driven by a trained decision transformer. The
/// action at step t is read from the observation token of t, so the
/// placeholder action token stored for t is never attended to.
class DtPolicy {
 public:
  /// Parameters are immutable and may be shared by policies on other threads.
  DtPolicy(DtConfig config, std::shared_ptr<const std::vector<float>> params, double rtg_target);
  DtPolicy(DtConfig config, std::vector<float> params, double rtg_target);

  const DtConfig& config() const { return model_.config(); }
  double rtg_target() const { return rtg_target_; }
  void set_rtg_target(double target) { rtg_target_ = target; }

  DtContext new_context() const;

  /// One action per context, computed in a single batched forward pass.
  std::vector<ControlInputs> act(std::span<DtContext* const> contexts,
                                 std::span<const Observation> observations);
  ControlInputs act(DtContext& context, const Observation& observation);

  /// Subtracts the reward received after the last action from the context's
  /// return to go.
  static void observe_reward(DtContext& context, double reward) { context.rtg -= reward; }

 private:
  DecisionTransformer<float> model_;
  std::shared_ptr<const std::vector<float>> params_;
  double rtg_target_;
  Workspace<float> ws_;
};

}  // namespace ftfc::dt
