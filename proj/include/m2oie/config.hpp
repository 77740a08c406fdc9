#pragma once

#include <cstdint>
#include <filesystem>

#include <nlohmann/json_fwd.hpp>

#include "m2oie/model.hpp"

namespace m2oie {

struct TrainConfig {
  double learning_rate = 5e-4;
  std::size_t batch_size = 16;
  std::size_t epochs = 100;
  double warmup_fraction = 0.1;
  double clip_norm = 1.0;
  double weight_decay = 0.01;
  // Dropout inside the argument extractor during training.
  double dropout = 0.2;
  std::uint64_t seed = 7;

  void validate() const;
};

// Both halves of a run configuration as stored in config files and checkpoints.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);
void to_json(nlohmann::json& j, const ArgumentConfig& c);
void from_json(const nlohmann::json& j, ArgumentConfig& c);
void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

// Reads {"model": {"encoder": {..}, "argument": {..}}, "train": {..}}.
// Missing keys keep their defaults; unknown keys are a ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace m2oie
