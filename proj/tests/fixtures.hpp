#pragma once

#include <filesystem>
#include <string>

#include <unistd.h>

#include "m2oie/checkpoint.hpp"
#include "m2oie/corpus.hpp"
#include "m2oie/trainer.hpp"

namespace m2oie::testing {

// Desk model overfit on the worked example sentence; trained once per process.
inline const ModelCheckpoint& showcase_checkpoint() {
  static const ModelCheckpoint ckpt = [] {
    RunConfig cfg;
    cfg.train.epochs = 200;
    cfg.train.batch_size = 1;
    return train({showcase_sentence()}, cfg).checkpoint;
  }();
  return ckpt;
}

// Small untrained desk-shaped model over the given corpus vocabulary.
inline Model<float> fresh_model(const std::vector<AnnotatedSentence>& corpus, std::uint64_t seed = 7) {
  auto vocab = build_vocabulary(corpus);
  ModelConfig mc;
  mc.encoder.vocab_size = vocab.size();
  Model<float> m(mc, vocab);
  m.initialize(seed);
  return m;
}

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("m2oie_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace m2oie::testing
