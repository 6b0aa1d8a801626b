#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace corelink {

struct Utterance {
  std::vector<std::string> speaker_ids;
  std::vector<std::vector<std::string>> sentences;  // tokenized
  int utterance_index = 0;
};

// A gold mention span. Offsets are token-level, end inclusive, local to one
// sentence. labels holds every annotated referent; more than one marks a
// plural mention.
struct Mention {
  int mention_index = 0;
  int utterance_index = 0;
  int sentence_index = 0;
  int token_start = 0;
  int token_end = 0;
  std::string speaker_id;  // first listed speaker of the utterance
  std::vector<std::string> labels;

  bool is_singular() const { return labels.size() == 1; }
  const std::string& gold_character() const;
};

// One scene, the document unit for both tasks. Mentions are kept in document
// order: (utterance, sentence, token_start).
struct SceneDocument {
  std::string scene_id;
  std::vector<Utterance> utterances;
  std::vector<Mention> mentions;

  int num_tokens() const;
};

// Flat token positions for a document; segment encodings index into these.
struct TokenIndex {
  std::vector<std::vector<int>> offset;  // [utterance][sentence] -> flat start
  int total = 0;

  static TokenIndex build(const SceneDocument& doc);
  int flat(int utt, int sent, int tok) const { return offset[utt][sent] + tok; }
};

// A partition of a document's mention indices; singletons allowed.
struct Clustering {
  std::vector<std::vector<int>> clusters;

  static Clustering from_cluster_ids(const std::vector<int>& ids);
  // Inverse map; throws if the clusters do not partition [0, num_mentions).
  std::vector<int> mention_to_cluster(int num_mentions) const;
  int num_mentions() const;
  bool operator==(const Clustering&) const = default;
};

// Character label space for the linking head. Classes are ordered by training
// frequency (ties by name) with the reserved OTHER class last, so class 0 is
// the majority character.
struct CharacterInventory {
  static constexpr const char* kOtherLabel = "<OTHER>";

  std::vector<std::string> labels;  // class index -> label
  std::unordered_map<std::string, int> index;
  std::map<std::string, std::int64_t> training_counts;

  int size() const { return static_cast<int>(labels.size()); }
  int other_index() const { return size() - 1; }
  // Maps unseen or collapsed labels to OTHER.
  int class_of(const std::string& label) const;
};

// Speaker name table; UNK is index 0 and absorbs speakers unseen in training.
struct SpeakerInventory {
  static constexpr const char* kUnkLabel = "<UNK>";

  std::vector<std::string> names;  // index -> name
  std::unordered_map<std::string, int> index;

  int size() const { return static_cast<int>(names.size()); }
  int index_of(const std::string& name) const;
};

using Corpus = std::map<std::string, std::vector<SceneDocument>>;

// Loads a corpus from a file or a directory of .json files. Two layouts are
// accepted and normalized: the canonical per-split schema (top-level
// "documents", file stem names the split) and the released episode layout
// (top-level "episodes", splits derived from episode numbers, exclusive end
// offsets converted to inclusive). With singular_only, plural mentions are
// dropped and mention indices reassigned.
Corpus load_corpus(const std::filesystem::path& path, bool singular_only);

// Parses one canonical-schema JSON string (the content of a split file).
std::vector<SceneDocument> parse_canonical_json(const std::string& text,
                                                const std::string& source_name);

std::string to_canonical_json(const std::vector<SceneDocument>& docs);

// Groups mentions whose gold label sets are equal; clusters ordered by first
// mention. Throws if a mention has no label.
Clustering derive_gold_clusters(const SceneDocument& doc);

// Character classes from training counts (>= min_mentions keeps a class, the
// rest collapse into OTHER) plus the speaker table. Training split only.
std::pair<CharacterInventory, SpeakerInventory> build_inventories(
    const std::vector<SceneDocument>& train_docs, int min_mentions);

struct SplitStats {
  std::string split;
  std::int64_t episodes = 0;
  std::int64_t scenes = 0;
  std::int64_t utterances = 0;
  std::int64_t speakers = 0;
  std::int64_t mentions = 0;
  std::int64_t entities = 0;
};

struct CorpusStats {
  std::vector<SplitStats> rows;  // train, dev, test, then any others
  SplitStats total;              // speakers/entities deduplicated across splits
};

CorpusStats corpus_stats(const Corpus& corpus);
std::string render_stats_markdown(const CorpusStats& stats);
std::string stats_to_json(const CorpusStats& stats);

// Episode identifier derived from a scene id ("s01_e02_c03" -> "s01_e02").
std::string episode_of_scene(const std::string& scene_id);

struct SyntheticSpec {
  int scenes = 20;
  int characters = 5;
  int utterances_per_scene = 10;
  double pronoun_ratio = 0.7;
  int scenes_per_episode = 4;
  double dev_fraction = 0.15;
  double test_fraction = 0.15;
};

// Deterministic template-based corpus. Each scene introduces its characters
// by name alongside a scene-specific topic word, then refers back with
// pronouns whose sentences repeat the topic word; resolving those pronouns in
// an unseen scene requires aggregating evidence across co-referring mentions
// rather than memorizing local context.
Corpus generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace corelink
