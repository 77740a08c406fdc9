#include "m2oie/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "m2oie/error.hpp"

namespace m2oie {
namespace {

using json = nlohmann::json;

void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(section) + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) throw ConfigError(std::string(section) + ": unknown key '" + it.key() + "'");
  }
}

template <class V>
void read(const json& j, const char* key, V& out, const char* section) {
  if (!j.contains(key)) return;
  try {
    if constexpr (std::is_unsigned_v<V>) {
      if (!j[key].is_number_unsigned()) throw ConfigError("not a non-negative integer");
    } else {
      if (!j[key].is_number()) throw ConfigError("not a number");
    }
    out = j[key].get<V>();
  } catch (const std::exception& e) {
    throw ConfigError(std::string(section) + "." + key + ": " + e.what());
  }
}

}  // namespace

void TrainConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("train.") + what + " must be positive");
  };
  positive(learning_rate, "learning_rate");
  positive(clip_norm, "clip_norm");
  positive(weight_decay, "weight_decay");
  positive(dropout, "dropout");
  if (dropout >= 1.0) throw ConfigError("train.dropout must be below 1");
  if (batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (epochs == 0) throw ConfigError("train.epochs must be positive");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw ConfigError("train.warmup_fraction must be in [0, 1)");
  }
}

void to_json(json& j, const EncoderConfig& c) {
  j = json{{"vocab_size", c.vocab_size}, {"hidden", c.hidden},   {"layers", c.layers},
           {"heads", c.heads},           {"max_length", c.max_length}, {"ffn_dim", c.ffn_dim},
           {"dropout", c.dropout}};
}

void from_json(const json& j, EncoderConfig& c) {
  check_keys(j, "encoder", {"vocab_size", "hidden", "layers", "heads", "max_length", "ffn_dim", "dropout"});
  read(j, "vocab_size", c.vocab_size, "encoder");
  read(j, "hidden", c.hidden, "encoder");
  read(j, "layers", c.layers, "encoder");
  read(j, "heads", c.heads, "encoder");
  read(j, "max_length", c.max_length, "encoder");
  read(j, "ffn_dim", c.ffn_dim, "encoder");
  read(j, "dropout", c.dropout, "encoder");
}

void to_json(json& j, const ArgumentConfig& c) {
  j = json{{"blocks", c.blocks},   {"heads", c.heads},     {"pos_dim", c.pos_dim},
           {"ffn_dim", c.ffn_dim}, {"dropout", c.dropout}};
}

void from_json(const json& j, ArgumentConfig& c) {
  check_keys(j, "argument", {"blocks", "heads", "pos_dim", "ffn_dim", "dropout"});
  read(j, "blocks", c.blocks, "argument");
  read(j, "heads", c.heads, "argument");
  read(j, "pos_dim", c.pos_dim, "argument");
  read(j, "ffn_dim", c.ffn_dim, "argument");
  read(j, "dropout", c.dropout, "argument");
}

void to_json(json& j, const ModelConfig& c) { j = json{{"encoder", c.encoder}, {"argument", c.argument}}; }

void from_json(const json& j, ModelConfig& c) {
  check_keys(j, "model", {"encoder", "argument"});
  if (j.contains("encoder")) from_json(j["encoder"], c.encoder);
  if (j.contains("argument")) from_json(j["argument"], c.argument);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
           {"epochs", c.epochs},               {"warmup_fraction", c.warmup_fraction},
           {"clip_norm", c.clip_norm},         {"weight_decay", c.weight_decay},
           {"dropout", c.dropout},             {"seed", c.seed}};
}

void from_json(const json& j, TrainConfig& c) {
  check_keys(j, "train",
             {"learning_rate", "batch_size", "epochs", "warmup_fraction", "clip_norm", "weight_decay", "dropout",
              "seed"});
  read(j, "learning_rate", c.learning_rate, "train");
  read(j, "batch_size", c.batch_size, "train");
  read(j, "epochs", c.epochs, "train");
  read(j, "warmup_fraction", c.warmup_fraction, "train");
  read(j, "clip_norm", c.clip_norm, "train");
  read(j, "weight_decay", c.weight_decay, "train");
  read(j, "dropout", c.dropout, "train");
  read(j, "seed", c.seed, "train");
}

void to_json(json& j, const RunConfig& c) { j = json{{"model", c.model}, {"train", c.train}}; }

void from_json(const json& j, RunConfig& c) {
  check_keys(j, "config", {"model", "train"});
  if (j.contains("model")) from_json(j["model"], c.model);
  if (j.contains("train")) from_json(j["train"], c.train);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  RunConfig c;
  from_json(j, c);
  return c;
}

}  // namespace m2oie
