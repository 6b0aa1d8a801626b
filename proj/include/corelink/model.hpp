#pragma once

#include <memory>
#include <vector>

#include "corelink/autodiff.hpp"
#include "corelink/config.hpp"
#include "corelink/corpus.hpp"
#include "corelink/decode.hpp"
#include "corelink/encoder.hpp"
#include "corelink/heads.hpp"
#include "corelink/mlsa.hpp"
#include "corelink/rng.hpp"

namespace corelink {

// The joint model: shared mention encoder (token encoder + speaker embeddings
// + MLSA refinement) feeding the antecedent-ranking head and the character
// classifier.
class JointModel {
 public:
  JointModel(const ExperimentConfig& cfg, Vocabulary vocab,
             CharacterInventory characters, SpeakerInventory speakers);

  struct DocLoss {
    ad::Var joint;       // scalar node to backprop
    LossReport values;   // plain loss values (disabled task terms are 0)
    int mentions = 0;
  };

  // Builds the loss graph for one document (one mini-batch: all its
  // segments). Requires singular gold labels.
  DocLoss loss(ad::Tape& t, const SceneDocument& doc) const;

  // Pure evaluation path.
  Matrix mention_reprs(const SceneDocument& doc) const;  // g^(n)
  PredictionBundle predict(const SceneDocument& doc) const;

  int gold_class(const Mention& m) const;
  std::vector<int> gold_classes(const SceneDocument& doc) const;

  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }
  const ExperimentConfig& config() const { return cfg_; }
  const CharacterInventory& characters() const { return characters_; }
  const SpeakerInventory& speakers() const { return speaker_table_.inventory(); }
  const Vocabulary& vocab() const { return vocab_; }
  const CorefHead& coref_head() const { return coref_; }
  const LinkHead& link_head() const { return link_; }
  const MlsaStack& mlsa() const { return mlsa_; }
  const EncoderBackend& encoder() const { return *backend_; }

 private:
  ad::Var mention_reprs_graph(ad::Tape& t, const SceneDocument& doc) const;
  std::vector<std::vector<int>> mention_speaker_rows(const SceneDocument& doc) const;

  ExperimentConfig cfg_;
  Vocabulary vocab_;
  CharacterInventory characters_;
  ad::ParamStore params_;
  std::unique_ptr<EncoderBackend> backend_;
  SpeakerTable speaker_table_;
  MlsaStack mlsa_;
  CorefHead coref_;
  LinkHead link_;
};

}  // namespace corelink
