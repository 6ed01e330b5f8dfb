#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "fixtures.hpp"
#include "ftfc/dt/trainer.hpp"
#include "ftfc/error.hpp"

using namespace ftfc;
using namespace ftfc::dt;

namespace {

DtConfig small_config() {
  DtConfig c;
  c.layers = 1;
  c.heads = 2;
  c.embed = 32;
  c.ffn = 64;
  c.context = 10;
  return c;
}

const std::vector<TrainingSequence>& toy() {
  static const auto data = fixture::toy_sequences(10, 40);
  return data;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kUsage;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("training is deterministic given the seed") {
  TrainConfig t;
  t.batch_size = 16;
  t.updates = 25;
  t.learning_rate = 1e-3;
  t.seed = 4;
  const auto a = train(toy(), small_config(), t);
  const auto b = train(toy(), small_config(), t);
  REQUIRE(a.loss_curve.size() == 25);
  CHECK(std::abs(a.loss_curve.back() - b.loss_curve.back()) <= 1e-10);
  CHECK(a.params == b.params);
  t.seed = 5;
  const auto c = train(toy(), small_config(), t);
  CHECK(c.params != a.params);
}

TEST_CASE("loss decreases monotonically over the first 50 updates") {
  // Default model and optimizer; full batches so the curve reflects the
  // optimizer rather than window sampling.
  std::vector<double> mean(50, 0.0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    TrainConfig t;
    t.full_batch = true;
    t.updates = 50;
    t.seed = seed;
    const auto r = train(toy(), DtConfig{}, t);
    for (int i = 0; i < 50; ++i) mean[i] += r.loss_curve[i] / 3.0;
  }
  MESSAGE("mean loss " << mean.front() << " -> " << mean.back());
  for (int i = 1; i < 50; ++i) {
    CAPTURE(i);
    CHECK(mean[i] < mean[i - 1]);
  }
}

TEST_CASE("a small model memorizes the toy data") {
  TrainConfig t;
  t.full_batch = true;
  t.updates = 400;
  t.learning_rate = 3e-3;
  t.weight_decay = 0.0;
  const auto r = train(toy(), small_config(), t);
  const DecisionTransformer<float> m{small_config()};
  const double mse = action_mse(m, r.params, toy());
  MESSAGE("toy action MSE " << mse << " (initial " << r.loss_curve.front() << ")");
  CHECK(mse < 0.1 * r.loss_curve.front());
}

TEST_CASE("non-finite data raises divergence and keeps the parameters") {
  auto data = toy();
  TrainConfig t;
  t.full_batch = true;
  t.updates = 5;
  Trainer good(small_config(), t, data);
  good.step();
  data[3].obs[5] = std::numeric_limits<float>::quiet_NaN();
  Trainer trainer(small_config(), t, data, good.params());
  const auto before = trainer.params();
  CHECK(kind_of([&] { trainer.step(); }) == ErrorKind::kTrainingDivergence);
  CHECK(trainer.params() == before);
  CHECK(trainer.updates_done() == 0);
}

TEST_CASE("learning-rate schedule") {
  TrainConfig t;
  t.learning_rate = 1e-3;
  t.updates = 110;
  t.warmup = 10;
  t.final_lr_fraction = 0.1;
  const Trainer trainer(small_config(), t, toy());
  CHECK(trainer.total_updates() == 110);
  CHECK(trainer.learning_rate_at(0) == doctest::Approx(1e-4));
  CHECK(trainer.learning_rate_at(9) == doctest::Approx(1e-3));
  CHECK(trainer.learning_rate_at(10) == doctest::Approx(1e-3));
  CHECK(trainer.learning_rate_at(60) == doctest::Approx(0.55e-3));
  CHECK(trainer.learning_rate_at(110) == doctest::Approx(1e-4));
  for (int i = 11; i <= 110; ++i) CHECK(trainer.learning_rate_at(i) < trainer.learning_rate_at(i - 1));

  TrainConfig constant;
  constant.epochs = 2;
  constant.batch_size = 8;
  const Trainer c(small_config(), constant, toy());
  // 10 sequences of 40 steps: 40 windows of 10, 5 batches per epoch.
  CHECK(c.total_updates() == 10);
  CHECK(c.learning_rate_at(7) == doctest::Approx(constant.learning_rate));
}

TEST_CASE("tiled windows cover every step once") {
  TrainingSequence s;
  for (int t = 0; t < 130; ++t) {
    s.rtg.push_back(static_cast<float>(t));
    s.obs.insert(s.obs.end(), 17, 0.0f);
    s.act.insert(s.act.end(), 4, 0.0f);
    s.timestep.push_back(t);
  }
  const std::vector<TrainingSequence> data{s, s};
  const auto w = tile_windows(data, 60);
  REQUIRE(w.size() == 6);
  CHECK(w[0].length == 60);
  CHECK(w[1].length == 60);
  CHECK(w[2].length == 10);
  CHECK(w[1].timestep[0] == 60);
  CHECK(w[2].rtg[0] == 120.0f);
  CHECK(w[2].obs == data[0].obs.data() + 120 * 17);
  CHECK(w[3].rtg == data[1].rtg.data());
}

TEST_CASE("action MSE matches a direct computation") {
  const DecisionTransformer<float> m{small_config()};
  const auto params = m.init_params(9);
  const auto& data = toy();
  Workspace<float> ws;
  double sum = 0.0;
  std::size_t n = 0;
  for (const Window& w : tile_windows(data, 10)) {
    m.forward(params, std::span(&w, 1), ws);
    for (int i = 0; i < w.length * 4; ++i) {
      const double d = static_cast<double>(ws.pred[i]) - w.act[i];
      sum += d * d;
      ++n;
    }
  }
  CHECK(action_mse(m, params, data) == doctest::Approx(sum / n).epsilon(1e-6));
}

TEST_CASE("invalid inputs are rejected") {
  TrainConfig t;
  CHECK(kind_of([&] { Trainer(small_config(), t, {}); }) == ErrorKind::kEmptyDataset);
  auto data = toy();
  data[0].act.pop_back();
  CHECK(kind_of([&] { Trainer(small_config(), t, data); }) == ErrorKind::kDimensionMismatch);
  data = toy();
  data[0].timestep[0] = 5000;
  CHECK(kind_of([&] { Trainer(small_config(), t, data); }) == ErrorKind::kDimensionMismatch);
  CHECK(kind_of([&] { Trainer(small_config(), t, toy(), std::vector<float>(3)); }) ==
        ErrorKind::kDimensionMismatch);
  t.learning_rate = 0.0;
  CHECK(kind_of([&] { t.validate(); }) == ErrorKind::kInvalidArgument);
  t = {};
  t.epochs = 0;
  CHECK(kind_of([&] { t.validate(); }) == ErrorKind::kInvalidArgument);
  t = {};
  t.beta2 = 1.0;
  CHECK(kind_of([&] { t.validate(); }) == ErrorKind::kInvalidArgument);
}

}  // TEST_SUITE
