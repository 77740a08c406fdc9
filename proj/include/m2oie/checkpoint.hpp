#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "m2oie/config.hpp"
#include "m2oie/model.hpp"

namespace m2oie {

inline constexpr char kCheckpointMagic[] = "M2OIE1";
inline constexpr std::size_t kCheckpointMagicSize = 6;
inline constexpr char kCheckpointVersion[] = "m2oie-checkpoint/1";

struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<float> data;

  bool operator==(const NamedTensor&) const = default;
};

struct ModelCheckpoint {
  std::string version = kCheckpointVersion;
  RunConfig config;
  Vocabulary vocab;
  std::vector<NamedTensor> tensors;
};

ModelCheckpoint make_checkpoint(const Model<float>& model, const TrainConfig& train);

// Rebuilds the model. Throws ShapeError naming the first tensor whose name or
// shape disagrees with what the stored config implies.
Model<float> model_from_checkpoint(const ModelCheckpoint& ckpt);

// Layout: 6-byte magic, little-endian u64 header length, compact JSON header
// (version, config, vocab, tensor index with byte offsets, payload size),
// then every tensor as little-endian float32 in index order.
std::string serialize_checkpoint(const ModelCheckpoint& ckpt);

// Throws FormatError (bad magic / header), VersionError, TruncatedError, or
// ShapeError (declared shape disagrees with the stored byte length).
ModelCheckpoint parse_checkpoint(const std::string& bytes);

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace m2oie
