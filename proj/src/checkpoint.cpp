#include "m2oie/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "m2oie/error.hpp"

namespace m2oie {
namespace {

using json = nlohmann::json;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

void put_f32(std::string& out, float f) {
  const auto u = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

float get_f32(const std::string& in, std::size_t pos) {
  std::uint32_t u = 0;
  for (int i = 0; i < 4; ++i) u |= std::uint32_t(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return std::bit_cast<float>(u);
}

}  // namespace

ModelCheckpoint make_checkpoint(const Model<float>& model, const TrainConfig& train) {
  ModelCheckpoint c;
  c.config.model = model.config();
  c.config.train = train;
  c.vocab = model.vocab();
  for (const auto& p : model.params()) c.tensors.push_back({p.name, p.shape, p.value});
  return c;
}

Model<float> model_from_checkpoint(const ModelCheckpoint& ckpt) {
  Model<float> model(ckpt.config.model, ckpt.vocab);
  auto& store = model.params();
  if (store.size() != ckpt.tensors.size()) {
    const auto& missing = store.size() > ckpt.tensors.size() ? store[ckpt.tensors.size()].name
                                                               : ckpt.tensors[store.size()].name;
    throw ShapeError(missing, "checkpoint has " + std::to_string(ckpt.tensors.size()) +
                                  " tensors, config implies " + std::to_string(store.size()));
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& t = ckpt.tensors[i];
    auto& p = store[i];
    if (t.name != p.name) throw ShapeError(t.name, "expected tensor '" + p.name + "' at this position");
    if (t.shape != p.shape) {
      throw ShapeError(t.name, "shape " + shape_string(t.shape) + " but config implies " + shape_string(p.shape));
    }
    if (t.data.size() != p.size()) throw ShapeError(t.name, "data length does not match shape");
    p.value = t.data;
  }
  return model;
}

std::string serialize_checkpoint(const ModelCheckpoint& ckpt) {
  json index = json::array();
  std::uint64_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    if (t.data.size() != shape_numel(t.shape)) throw ShapeError(t.name, "data length does not match shape");
    index.push_back(json{{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    offset += 4 * t.data.size();
  }
  json header{{"version", ckpt.version},
              {"config", ckpt.config},
              {"vocab", ckpt.vocab.tokens()},
              {"tensors", index},
              {"payload_bytes", offset}};
  const std::string h = header.dump();

  std::string out(kCheckpointMagic, kCheckpointMagicSize);
  put_u64(out, h.size());
  out += h;
  out.reserve(out.size() + offset);
  for (const auto& t : ckpt.tensors)
    for (float f : t.data) put_f32(out, f);
  return out;
}

ModelCheckpoint parse_checkpoint(const std::string& bytes) {
  if (bytes.size() < kCheckpointMagicSize || bytes.compare(0, kCheckpointMagicSize, kCheckpointMagic) != 0) {
    throw FormatError("not a checkpoint: bad magic bytes");
  }
  const std::size_t prefix = kCheckpointMagicSize + 8;
  if (bytes.size() < prefix) throw TruncatedError("checkpoint ends inside the header length");
  const std::uint64_t hlen = get_u64(bytes, kCheckpointMagicSize);
  if (hlen > bytes.size() - prefix) throw TruncatedError("checkpoint ends inside the header");

  json header;
  try {
    header = json::parse(bytes.begin() + prefix, bytes.begin() + static_cast<std::ptrdiff_t>(prefix + hlen));
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("unreadable checkpoint header: ") + e.what());
  }

  ModelCheckpoint c;
  try {
    c.version = header.at("version").get<std::string>();
    if (c.version != kCheckpointVersion) {
      throw VersionError("checkpoint version '" + c.version + "', expected '" + kCheckpointVersion + "'");
    }
    c.config = header.at("config").get<RunConfig>();
    c.vocab = Vocabulary(header.at("vocab").get<std::vector<std::string>>());
    const auto payload_bytes = header.at("payload_bytes").get<std::uint64_t>();
    const std::size_t base = prefix + hlen;
    if (payload_bytes > bytes.size() - base) {
      throw TruncatedError("payload has " + std::to_string(bytes.size() - base) + " bytes, header declares " +
                           std::to_string(payload_bytes));
    }
    const auto& index = header.at("tensors");
    for (std::size_t i = 0; i < index.size(); ++i) {
      NamedTensor t;
      t.name = index[i].at("name").get<std::string>();
      t.shape = index[i].at("shape").get<Shape>();
      const auto offset = index[i].at("offset").get<std::uint64_t>();
      const auto end = i + 1 < index.size() ? index[i + 1].at("offset").get<std::uint64_t>() : payload_bytes;
      if (end < offset || end > payload_bytes) throw FormatError("tensor '" + t.name + "' has a bad offset");
      const std::uint64_t declared = 4 * static_cast<std::uint64_t>(shape_numel(t.shape));
      if (end - offset != declared) {
        throw ShapeError(t.name, "shape " + shape_string(t.shape) + " needs " + std::to_string(declared) +
                                     " bytes, stored " + std::to_string(end - offset));
      }
      t.data.resize(shape_numel(t.shape));
      for (std::size_t k = 0; k < t.data.size(); ++k) t.data[k] = get_f32(bytes, base + offset + 4 * k);
      c.tensors.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("malformed checkpoint config: ") + e.what());
  }
  return c;
}

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint '" + path.string() + "'");
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

}  // namespace m2oie
