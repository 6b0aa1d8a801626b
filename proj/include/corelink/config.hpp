#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "corelink/corpus.hpp"
#include "corelink/mlsa.hpp"

namespace corelink {

struct DataConfig {
  std::string kind = "synthetic";  // synthetic | files
  std::string path;                // corpus file or directory when kind=files
  bool singular_only = true;
  SyntheticSpec synthetic;
  std::uint64_t synthetic_seed = 1234;
};

struct EncoderConfig {
  std::string backend = "builtin";  // builtin | precomputed
  int dim = 32;
  int layers = 2;
  int heads = 4;
  int max_tokens = 32;          // segment cap, also the position-table size
  std::string artifact;         // required artifact path for "precomputed"
  double speaker_init_std = 0.02;
  std::string multi_speaker = "first";  // first | mean
};

struct HeadsConfig {
  int hidden_width = 64;
  bool use_mention_score = true;
};

struct LossConfig {
  bool normalize = false;  // divide per-document sums by the mention count
};

struct InventoryConfig {
  int min_mentions = 10;  // characters below this collapse into OTHER
};

struct OptimizerConfig {
  double lr = 0.0;  // 0 picks the backend default: 1e-3 builtin, 3e-5 precomputed
  double warmup_frac = 0.1;
  int epochs = 100;
  int patience = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::string select_split = "dev";  // dev | train: split driving early stop
};

struct ExperimentConfig {
  DataConfig data;
  EncoderConfig encoder;
  MlsaConfig mlsa;
  HeadsConfig heads;
  LossConfig loss;
  InventoryConfig inventory;
  OptimizerConfig optimizer;
  std::string task_mode = "joint";  // joint | coref_only | link_only
  std::uint64_t seed = 1;
  double init_std = 0.02;

  double effective_lr() const;
  void validate() const;
};

// Strict JSON parsing: unknown keys raise ConfigError naming the key.
ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config_file(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

// Loads the configured corpus (synthetic generation or files on disk).
Corpus load_data(const DataConfig& data);

}  // namespace corelink
