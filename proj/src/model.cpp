#include "corelink/model.hpp"

#include <cmath>

#include "corelink/errors.hpp"
#include "corelink/kernels.hpp"

namespace corelink {

JointModel::JointModel(const ExperimentConfig& cfg, Vocabulary vocab,
                       CharacterInventory characters, SpeakerInventory speakers)
    : cfg_(cfg), vocab_(std::move(vocab)), characters_(std::move(characters)) {
  cfg_.validate();
  Rng rng(cfg_.seed);
  // Creation order fixes the initialization draws; keep it stable.
  if (cfg_.encoder.backend == "builtin") {
    backend_ = std::make_unique<BuiltinEncoder>(
        params_, vocab_, cfg_.encoder.dim, cfg_.encoder.layers,
        cfg_.encoder.heads, cfg_.encoder.max_tokens, rng, cfg_.init_std);
  } else {
    backend_ = std::make_unique<PrecomputedEncoder>(cfg_.encoder.artifact,
                                                    cfg_.encoder.dim);
  }
  speaker_table_ = SpeakerTable(params_, speakers, cfg_.encoder.dim, rng,
                                cfg_.encoder.speaker_init_std);
  speaker_table_.mean_policy = cfg_.encoder.multi_speaker == "mean";
  mlsa_ = MlsaStack(params_, cfg_.mlsa, cfg_.encoder.dim, rng, cfg_.init_std);
  coref_ = CorefHead::create(params_, cfg_.encoder.dim, cfg_.heads.hidden_width,
                             cfg_.heads.use_mention_score, rng, cfg_.init_std);
  link_ = LinkHead::create(params_, cfg_.encoder.dim, cfg_.heads.hidden_width,
                           characters_.size(), rng, cfg_.init_std);
}

int JointModel::gold_class(const Mention& m) const {
  return characters_.class_of(m.gold_character());
}

std::vector<int> JointModel::gold_classes(const SceneDocument& doc) const {
  std::vector<int> out(doc.mentions.size());
  for (std::size_t i = 0; i < doc.mentions.size(); ++i)
    out[i] = gold_class(doc.mentions[i]);
  return out;
}

std::vector<std::vector<int>> JointModel::mention_speaker_rows(
    const SceneDocument& doc) const {
  std::vector<std::vector<int>> rows;
  rows.reserve(doc.mentions.size());
  for (const Mention& m : doc.mentions)
    rows.push_back(speaker_table_.speaker_rows(doc.utterances[m.utterance_index]));
  return rows;
}

ad::Var JointModel::mention_reprs_graph(ad::Tape& t, const SceneDocument& doc) const {
  std::vector<Segment> segments = segment_document(doc, cfg_.encoder.max_tokens);
  std::vector<MentionLocation> locs = locate_mentions(doc, segments);
  std::vector<ad::Var> encoded;
  encoded.reserve(segments.size());
  for (const Segment& seg : segments) encoded.push_back(backend_->encode(t, seg));

  // Mentions are in document order and segments are contiguous, so gathering
  // per segment and concatenating keeps row i aligned with mention i.
  std::vector<ad::Var> parts;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    std::vector<int> starts, ends;
    for (std::size_t i = 0; i < locs.size(); ++i) {
      if (locs[i].segment != static_cast<int>(s)) continue;
      starts.push_back(locs[i].local_start);
      ends.push_back(locs[i].local_end);
    }
    if (starts.empty()) continue;
    parts.push_back(ad::add(ad::gather_rows(encoded[s], starts),
                            ad::gather_rows(encoded[s], ends)));
  }
  ad::Var span = parts.size() == 1 ? parts[0] : ad::concat_rows(parts);
  ad::Var speakers = speaker_table_.mention_speaker_vectors(t, mention_speaker_rows(doc));
  ad::Var g0 = ad::add(span, speakers);
  return mlsa_.refine(t, g0);
}

JointModel::DocLoss JointModel::loss(ad::Tape& t, const SceneDocument& doc) const {
  const int k = static_cast<int>(doc.mentions.size());
  if (k == 0) throw ValidationError("cannot build a loss for a document without mentions");
  ad::Var gn = mention_reprs_graph(t, doc);

  const bool want_coref = cfg_.task_mode != "link_only";
  const bool want_link = cfg_.task_mode != "coref_only";
  const double norm = cfg_.loss.normalize ? 1.0 / static_cast<double>(k) : 1.0;

  DocLoss out;
  out.mentions = k;
  ad::Var l_coref, l_link;

  if (want_coref) {
    std::optional<ad::Var> sm;
    if (coref_.use_mention_score) sm = coref_.ffnn_m.apply(t, gn);
    ad::Var sa;
    if (k > 1) {
      std::vector<int> later, earlier;
      later.reserve(k * (k - 1) / 2);
      earlier.reserve(k * (k - 1) / 2);
      for (int i = 1; i < k; ++i)
        for (int j = 0; j < i; ++j) {
          later.push_back(i);
          earlier.push_back(j);
        }
      ad::Var pair_in = ad::concat_cols(
          {ad::gather_rows(gn, later), ad::gather_rows(gn, earlier)});
      sa = coref_.ffnn_a.apply(t, pair_in);
    } else {
      sa = t.constant(Matrix(0, 1));
    }
    Clustering gold = derive_gold_clusters(doc);
    l_coref = ad::coref_nll(sm, sa, gold_antecedent_sets(gold, k), k);
    if (cfg_.loss.normalize) l_coref = ad::mul_scalar(l_coref, norm);
    out.values.coref = l_coref.scalar();
  }
  if (want_link) {
    ad::Var logits = link_.ffnn_l.apply(t, gn);
    l_link = ad::softmax_xent(logits, gold_classes(doc));
    if (cfg_.loss.normalize) l_link = ad::mul_scalar(l_link, norm);
    out.values.linking = l_link.scalar();
  }

  if (cfg_.task_mode == "joint") {
    out.joint = ad::mul_scalar(ad::add(l_coref, l_link), 0.5);
  } else if (cfg_.task_mode == "coref_only") {
    out.joint = l_coref;
  } else {
    out.joint = l_link;
  }
  out.values.joint = out.joint.scalar();
  return out;
}

Matrix JointModel::mention_reprs(const SceneDocument& doc) const {
  std::vector<Segment> segments = segment_document(doc, cfg_.encoder.max_tokens);
  std::vector<TokenEncoding> encodings;
  encodings.reserve(segments.size());
  for (const Segment& seg : segments)
    encodings.push_back(backend_->encode_tokens(seg));
  Matrix g0 = initial_mention_reprs(doc, segments, encodings, speaker_table_);
  if (g0.rows == 0) return g0;
  return mlsa_.refine_values(g0);
}

PredictionBundle JointModel::predict(const SceneDocument& doc) const {
  PredictionBundle bundle;
  bundle.scene_id = doc.scene_id;
  if (doc.mentions.empty()) return bundle;

  Matrix gn = mention_reprs(doc);
  AntecedentScores scores = score_antecedents(gn, coref_);
  bundle.antecedent_probs = antecedent_distribution(scores);
  auto [assign, clusters] = decode_clusters(scores);
  bundle.assignment = std::move(assign);
  bundle.clusters = std::move(clusters);
  bundle.linking_probs = linking_distribution(gn, link_);
  bundle.labels = decode_characters(bundle.linking_probs);
  bundle.consistency = consistency_report(bundle.clusters, bundle.labels);
  return bundle;
}

}  // namespace corelink
