#include "ftfc/dt/checkpoint.hpp"

#include <charconv>
#include <cmath>

namespace ftfc::dt {

Json to_json(const DtConfig& c) {
  return {{"layers", c.layers},   {"heads", c.heads},     {"embed", c.embed},
          {"ffn", c.ffn},         {"context", c.context}, {"obs_dim", c.obs_dim},
          {"act_dim", c.act_dim}, {"max_timestep", c.max_timestep}, {"dropout", c.dropout}};
}

DtConfig dt_config_from_json(const Json& j) {
  return guarded("model config", [&] {
    require_object(j, "model config");
    check_keys(j, {"layers", "heads", "embed", "ffn", "context", "obs_dim", "act_dim", "max_timestep", "dropout"},
               "model config");
    DtConfig c;
    read(j, "layers", c.layers);
    read(j, "heads", c.heads);
    read(j, "embed", c.embed);
    read(j, "ffn", c.ffn);
    read(j, "context", c.context);
    read(j, "obs_dim", c.obs_dim);
    read(j, "act_dim", c.act_dim);
    read(j, "max_timestep", c.max_timestep);
    read(j, "dropout", c.dropout);
    c.validate();
    return c;
  });
}

Json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"epochs", c.epochs},
          {"updates", c.updates},
          {"warmup", c.warmup},
          {"final_lr_fraction", c.final_lr_fraction},
          {"grad_clip", c.grad_clip},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps},
          {"micro_batch", c.micro_batch},
          {"full_batch", c.full_batch},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const Json& j) {
  return guarded("train config", [&] {
    require_object(j, "train config");
    check_keys(j,
               {"batch_size", "learning_rate", "weight_decay", "epochs", "updates", "warmup",
                "final_lr_fraction", "grad_clip", "beta1", "beta2", "eps", "micro_batch", "full_batch", "seed"},
               "train config");
    TrainConfig c;
    read(j, "batch_size", c.batch_size);
    read(j, "learning_rate", c.learning_rate);
    read(j, "weight_decay", c.weight_decay);
    read(j, "epochs", c.epochs);
    read(j, "updates", c.updates);
    read(j, "warmup", c.warmup);
    read(j, "final_lr_fraction", c.final_lr_fraction);
    read(j, "grad_clip", c.grad_clip);
    read(j, "beta1", c.beta1);
    read(j, "beta2", c.beta2);
    read(j, "eps", c.eps);
    read(j, "micro_batch", c.micro_batch);
    read(j, "full_batch", c.full_batch);
    read(j, "seed", c.seed);
    c.validate();
    return c;
  });
}

std::string serialize_checkpoint(const Checkpoint& ck) {
  Json head = {{"format", kCheckpointFormat},
               {"version", kCheckpointVersion},
               {"model", to_json(ck.model)},
               {"train", to_json(ck.train)},
               {"rtg_target", ck.rtg_target},
               {"dataset_hash", ck.dataset_hash},
               {"parameter_count", ck.params.size()},
               {"loss_curve", ck.loss_curve}};
  std::string out = dump(head, -1);
  out.pop_back();  // reopen the object to append the parameter array
  out += ",\"params\":[";
  char buf[32];
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    if (i > 0) out += ',';
    // "-0" would parse back as the integer 0 and lose the sign.
    if (ck.params[i] == 0.0f && std::signbit(ck.params[i])) {
      out += "-0.0";
      continue;
    }
    const auto r = std::to_chars(buf, buf + sizeof buf, ck.params[i]);
    out.append(buf, r.ptr);
  }
  out += "]}\n";
  return out;
}

Checkpoint parse_checkpoint(std::string_view text) {
  const Json j = guarded("checkpoint", [&] { return Json::parse(text); });
  return guarded("checkpoint", [&] {
    require_object(j, "checkpoint");
    check_keys(j, {"format", "version", "model", "train", "rtg_target", "dataset_hash", "parameter_count",
                   "loss_curve", "params"},
               "checkpoint");
    if (j.value("format", std::string()) != kCheckpointFormat) {
      fail(ErrorKind::kSchema, "not a decision-transformer checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      fail(ErrorKind::kSchema, "unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint ck;
    ck.model = dt_config_from_json(j.at("model"));
    ck.train = train_config_from_json(j.at("train"));
    read(j, "rtg_target", ck.rtg_target);
    read(j, "dataset_hash", ck.dataset_hash);
    read(j, "loss_curve", ck.loss_curve);
    const auto& p = j.at("params");
    ck.params.reserve(p.size());
    for (const auto& x : p) ck.params.push_back(static_cast<float>(x.get<double>()));
    const std::size_t expected = ParamLayout(ck.model).total();
    if (ck.params.size() != expected || j.at("parameter_count").get<std::size_t>() != expected) {
      fail(ErrorKind::kDimensionMismatch, "checkpoint holds " + std::to_string(ck.params.size()) +
                                              " parameters, model needs " + std::to_string(expected));
    }
    return ck;
  });
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_text_file(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_text_file(path)); }

}  // namespace ftfc::dt
