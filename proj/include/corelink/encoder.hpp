#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "corelink/autodiff.hpp"
#include "corelink/corpus.hpp"
#include "corelink/matrix.hpp"
#include "corelink/nn.hpp"
#include "corelink/rng.hpp"

namespace corelink {

// A contiguous run of whole sentences from one document. Segments never split
// a sentence, so no mention straddles a segment boundary.
struct Segment {
  std::string scene_id;
  int index = 0;
  int doc_token_offset = 0;
  std::vector<std::string> tokens;

  int length() const { return static_cast<int>(tokens.size()); }
};

// Greedy packing of whole utterances up to max_tokens; an oversized utterance
// falls back to sentence-level packing. Throws when a single sentence exceeds
// the cap.
std::vector<Segment> segment_document(const SceneDocument& doc, int max_tokens);

// Per-token vectors for one segment plus the map back to flat document
// positions.
struct TokenEncoding {
  Matrix vectors;                  // length x d
  std::vector<int> doc_positions;  // injective into [0, doc tokens)
};

struct MentionLocation {
  int segment = 0;
  int local_start = 0;
  int local_end = 0;
};

// Maps each mention to its segment and segment-local token offsets.
std::vector<MentionLocation> locate_mentions(const SceneDocument& doc,
                                             const std::vector<Segment>& segments);

// Token vocabulary for the built-in encoder; <UNK> is index 0.
struct Vocabulary {
  static constexpr const char* kUnkToken = "<UNK>";

  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> index;

  static Vocabulary build(const std::vector<SceneDocument>& train_docs);
  int id_of(const std::string& token) const;
  int size() const { return static_cast<int>(tokens.size()); }
};

// Contract for contextual token encoders: a token sequence in, one vector per
// token out, at the configured dimension.
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual bool trainable() const = 0;
  virtual ad::Var encode(ad::Tape& t, const Segment& segment) const = 0;
  virtual Matrix encode_values(const Segment& segment) const = 0;

  TokenEncoding encode_tokens(const Segment& segment) const;
};

// Small trainable encoder: token + learned position embeddings through a
// transformer stack. Keeps the whole system trainable end to end without any
// external model artifacts.
class BuiltinEncoder : public EncoderBackend {
 public:
  BuiltinEncoder(ad::ParamStore& store, Vocabulary vocab, int d, int layers,
                 int heads, int max_positions, Rng& rng, double init_std);

  std::string name() const override { return "builtin"; }
  int dim() const override { return dim_; }
  bool trainable() const override { return true; }
  ad::Var encode(ad::Tape& t, const Segment& segment) const override;
  Matrix encode_values(const Segment& segment) const override;

  const Vocabulary& vocab() const { return vocab_; }

 private:
  std::vector<int> token_ids(const Segment& segment) const;

  Vocabulary vocab_;
  int dim_ = 0;
  int max_positions_ = 0;
  nn::Embedding token_emb_;
  nn::Embedding position_emb_;
  nn::TransformerStack stack_;
};

// Adapter for externally produced contextual vectors (e.g. from a pretrained
// model). The artifact is a JSON file declaring the dimension and per-scene
// token vectors; vectors are frozen.
class PrecomputedEncoder : public EncoderBackend {
 public:
  PrecomputedEncoder(const std::string& artifact_path, int expected_dim);

  std::string name() const override { return "precomputed"; }
  int dim() const override { return dim_; }
  bool trainable() const override { return false; }
  ad::Var encode(ad::Tape& t, const Segment& segment) const override;
  Matrix encode_values(const Segment& segment) const override;

 private:
  int dim_ = 0;
  std::map<std::string, Matrix> by_scene_;
};

// Trainable speaker embeddings over the speaker inventory, including UNK.
class SpeakerTable {
 public:
  SpeakerTable() = default;
  SpeakerTable(ad::ParamStore& store, const SpeakerInventory& inventory, int d,
               Rng& rng, double init_std);

  // Embedding row indices for a mention's utterance. Policy "first" uses the
  // first listed speaker; "mean" averages all listed speakers.
  std::vector<int> speaker_rows(const Utterance& utterance) const;
  int index_or_warn(const std::string& name) const;

  const SpeakerInventory& inventory() const { return inventory_; }
  const nn::Embedding& embedding() const { return emb_; }
  ad::Var mention_speaker_vectors(ad::Tape& t,
                                  const std::vector<std::vector<int>>& rows) const;
  Matrix mention_speaker_values(const std::vector<std::vector<int>>& rows) const;

  bool mean_policy = false;

 private:
  SpeakerInventory inventory_;
  nn::Embedding emb_;
  mutable std::set<std::string> warned_;
};

// g_i = t_start + t_end + e_speaker, the depth-0 mention representation.
// Inner-span tokens are ignored. Pure evaluation-path variant; the model
// builds the same composition on the tape.
Matrix initial_mention_reprs(const SceneDocument& doc,
                             const std::vector<Segment>& segments,
                             const std::vector<TokenEncoding>& encodings,
                             const SpeakerTable& speakers);

}  // namespace corelink
