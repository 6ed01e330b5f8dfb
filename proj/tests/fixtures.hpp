#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ftfc/dt/trainer.hpp"
#include "ftfc/harness.hpp"

namespace fixture {

/// The first `length` steps of `count` expert episodes under mild
/// randomization, in model units.
inline std::vector<ftfc::dt::TrainingSequence> toy_sequences(int count, int length, std::uint64_t seed = 77) {
  ftfc::CollectOptions o;
  o.episodes = count;
  o.seed = seed;
  o.randomization = ftfc::RandomizationMode::kMild;
  const auto data = ftfc::collect({}, ftfc::default_airframe(), {}, o);
  auto sequences = ftfc::to_training_sequences(data);
  for (auto& s : sequences) {
    const auto n = static_cast<std::size_t>(std::min(length, s.length()));
    s.rtg.resize(n);
    s.timestep.resize(n);
    s.obs.resize(n * ftfc::kObservationSize);
    s.act.resize(n * ftfc::ControlInputs::kSize);
  }
  return sequences;
}

}  // namespace fixture
