#include "corelink/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "corelink/errors.hpp"

namespace corelink {

using nlohmann::json;

double ExperimentConfig::effective_lr() const {
  if (optimizer.lr > 0.0) return optimizer.lr;
  return encoder.backend == "builtin" ? 1e-3 : 3e-5;
}

void ExperimentConfig::validate() const {
  if (data.kind != "synthetic" && data.kind != "files")
    throw ConfigError("data.kind must be synthetic or files");
  if (data.kind == "files" && data.path.empty())
    throw ConfigError("data.path is required when data.kind is files");
  if (encoder.backend != "builtin" && encoder.backend != "precomputed")
    throw ConfigError("encoder.backend must be builtin or precomputed");
  if (encoder.backend == "precomputed" && encoder.artifact.empty())
    throw ConfigError("encoder.artifact is required for the precomputed backend");
  if (encoder.dim <= 0) throw ConfigError("encoder.dim must be positive");
  if (encoder.max_tokens <= 0) throw ConfigError("encoder.max_tokens must be positive");
  if (encoder.multi_speaker != "first" && encoder.multi_speaker != "mean")
    throw ConfigError("encoder.multi_speaker must be first or mean");
  if (mlsa.layers < 0 || mlsa.layers > 5)
    throw ConfigError("mlsa.layers must lie in 0..5");
  if (heads.hidden_width <= 0) throw ConfigError("heads.hidden_width must be positive");
  if (task_mode != "joint" && task_mode != "coref_only" && task_mode != "link_only")
    throw ConfigError("task_mode must be joint, coref_only or link_only");
  if (optimizer.epochs <= 0) throw ConfigError("optimizer.epochs must be positive");
  if (optimizer.patience <= 0) throw ConfigError("optimizer.patience must be positive");
  if (optimizer.warmup_frac < 0.0 || optimizer.warmup_frac > 1.0)
    throw ConfigError("optimizer.warmup_frac must lie in [0, 1]");
  if (optimizer.select_split != "dev" && optimizer.select_split != "train")
    throw ConfigError("optimizer.select_split must be dev or train");
  if (inventory.min_mentions < 1)
    throw ConfigError("inventory.min_mentions must be >= 1");
}

namespace {

void check_keys(const json& j, const std::string& section,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(section + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw ConfigError("unknown config key: " + section + "." + key);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"data", "encoder", "mlsa", "heads", "loss", "inventory",
              "optimizer", "task_mode", "seed", "init_std"});

  ExperimentConfig cfg;
  if (j.contains("data")) {
    const json& d = j["data"];
    check_keys(d, "data", {"kind", "path", "singular_only", "synthetic",
                           "synthetic_seed"});
    read(d, "kind", cfg.data.kind);
    read(d, "path", cfg.data.path);
    read(d, "singular_only", cfg.data.singular_only);
    read(d, "synthetic_seed", cfg.data.synthetic_seed);
    if (d.contains("synthetic")) {
      const json& s = d["synthetic"];
      check_keys(s, "data.synthetic",
                 {"scenes", "characters", "utterances_per_scene", "pronoun_ratio",
                  "scenes_per_episode", "dev_fraction", "test_fraction"});
      read(s, "scenes", cfg.data.synthetic.scenes);
      read(s, "characters", cfg.data.synthetic.characters);
      read(s, "utterances_per_scene", cfg.data.synthetic.utterances_per_scene);
      read(s, "pronoun_ratio", cfg.data.synthetic.pronoun_ratio);
      read(s, "scenes_per_episode", cfg.data.synthetic.scenes_per_episode);
      read(s, "dev_fraction", cfg.data.synthetic.dev_fraction);
      read(s, "test_fraction", cfg.data.synthetic.test_fraction);
    }
  }
  if (j.contains("encoder")) {
    const json& e = j["encoder"];
    check_keys(e, "encoder",
               {"backend", "dim", "layers", "heads", "max_tokens", "artifact",
                "speaker_init_std", "multi_speaker"});
    read(e, "backend", cfg.encoder.backend);
    read(e, "dim", cfg.encoder.dim);
    read(e, "layers", cfg.encoder.layers);
    read(e, "heads", cfg.encoder.heads);
    read(e, "max_tokens", cfg.encoder.max_tokens);
    read(e, "artifact", cfg.encoder.artifact);
    read(e, "speaker_init_std", cfg.encoder.speaker_init_std);
    read(e, "multi_speaker", cfg.encoder.multi_speaker);
  }
  if (j.contains("mlsa")) {
    const json& m = j["mlsa"];
    check_keys(m, "mlsa", {"layers", "heads", "ff_width", "positional",
                           "max_mentions"});
    read(m, "layers", cfg.mlsa.layers);
    read(m, "heads", cfg.mlsa.heads);
    read(m, "ff_width", cfg.mlsa.ff_width);
    read(m, "positional", cfg.mlsa.positional);
    read(m, "max_mentions", cfg.mlsa.max_mentions);
  }
  if (j.contains("heads")) {
    const json& h = j["heads"];
    check_keys(h, "heads", {"hidden_width", "use_mention_score"});
    read(h, "hidden_width", cfg.heads.hidden_width);
    read(h, "use_mention_score", cfg.heads.use_mention_score);
  }
  if (j.contains("loss")) {
    check_keys(j["loss"], "loss", {"normalize"});
    read(j["loss"], "normalize", cfg.loss.normalize);
  }
  if (j.contains("inventory")) {
    check_keys(j["inventory"], "inventory", {"min_mentions"});
    read(j["inventory"], "min_mentions", cfg.inventory.min_mentions);
  }
  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    check_keys(o, "optimizer",
               {"lr", "warmup_frac", "epochs", "patience", "beta1", "beta2",
                "eps", "select_split"});
    read(o, "lr", cfg.optimizer.lr);
    read(o, "warmup_frac", cfg.optimizer.warmup_frac);
    read(o, "epochs", cfg.optimizer.epochs);
    read(o, "patience", cfg.optimizer.patience);
    read(o, "beta1", cfg.optimizer.beta1);
    read(o, "beta2", cfg.optimizer.beta2);
    read(o, "eps", cfg.optimizer.eps);
    read(o, "select_split", cfg.optimizer.select_split);
  }
  read(j, "task_mode", cfg.task_mode);
  read(j, "seed", cfg.seed);
  read(j, "init_std", cfg.init_std);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["data"] = {
      {"kind", cfg.data.kind},
      {"path", cfg.data.path},
      {"singular_only", cfg.data.singular_only},
      {"synthetic_seed", cfg.data.synthetic_seed},
      {"synthetic",
       {{"scenes", cfg.data.synthetic.scenes},
        {"characters", cfg.data.synthetic.characters},
        {"utterances_per_scene", cfg.data.synthetic.utterances_per_scene},
        {"pronoun_ratio", cfg.data.synthetic.pronoun_ratio},
        {"scenes_per_episode", cfg.data.synthetic.scenes_per_episode},
        {"dev_fraction", cfg.data.synthetic.dev_fraction},
        {"test_fraction", cfg.data.synthetic.test_fraction}}},
  };
  j["encoder"] = {{"backend", cfg.encoder.backend},
                  {"dim", cfg.encoder.dim},
                  {"layers", cfg.encoder.layers},
                  {"heads", cfg.encoder.heads},
                  {"max_tokens", cfg.encoder.max_tokens},
                  {"artifact", cfg.encoder.artifact},
                  {"speaker_init_std", cfg.encoder.speaker_init_std},
                  {"multi_speaker", cfg.encoder.multi_speaker}};
  j["mlsa"] = {{"layers", cfg.mlsa.layers},
               {"heads", cfg.mlsa.heads},
               {"ff_width", cfg.mlsa.ff_width},
               {"positional", cfg.mlsa.positional},
               {"max_mentions", cfg.mlsa.max_mentions}};
  j["heads"] = {{"hidden_width", cfg.heads.hidden_width},
                {"use_mention_score", cfg.heads.use_mention_score}};
  j["loss"] = {{"normalize", cfg.loss.normalize}};
  j["inventory"] = {{"min_mentions", cfg.inventory.min_mentions}};
  j["optimizer"] = {{"lr", cfg.optimizer.lr},
                    {"warmup_frac", cfg.optimizer.warmup_frac},
                    {"epochs", cfg.optimizer.epochs},
                    {"patience", cfg.optimizer.patience},
                    {"beta1", cfg.optimizer.beta1},
                    {"beta2", cfg.optimizer.beta2},
                    {"eps", cfg.optimizer.eps},
                    {"select_split", cfg.optimizer.select_split}};
  j["task_mode"] = cfg.task_mode;
  j["seed"] = cfg.seed;
  j["init_std"] = cfg.init_std;
  return j.dump(2) + "\n";
}

Corpus load_data(const DataConfig& data) {
  if (data.kind == "synthetic")
    return generate_synthetic_corpus(data.synthetic, data.synthetic_seed);
  return load_corpus(data.path, data.singular_only);
}

}  // namespace corelink
