#include "corelink/encoder.hpp"

#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "corelink/errors.hpp"
#include "corelink/kernels.hpp"

namespace corelink {

using nlohmann::json;

std::vector<Segment> segment_document(const SceneDocument& doc, int max_tokens) {
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");

  // Sentence units in document order.
  struct Unit {
    int utterance;
    int sentence;
    const std::vector<std::string>* tokens;
  };
  std::vector<Unit> units;
  for (const Utterance& u : doc.utterances)
    for (std::size_t s = 0; s < u.sentences.size(); ++s)
      units.push_back({u.utterance_index, static_cast<int>(s), &u.sentences[s]});

  for (const Unit& unit : units) {
    if (static_cast<int>(unit.tokens->size()) > max_tokens) {
      std::ostringstream os;
      os << "scene " << doc.scene_id << ": utterance " << unit.utterance
         << " sentence " << unit.sentence << " has " << unit.tokens->size()
         << " tokens, above the segment cap of " << max_tokens
         << "; increase encoder.max_tokens";
      throw ValidationError(os.str());
    }
  }

  // Utterance lengths for the utterance-boundary preference.
  std::vector<int> utt_len(doc.utterances.size(), 0);
  for (const Unit& unit : units)
    utt_len[unit.utterance] += static_cast<int>(unit.tokens->size());

  std::vector<Segment> segments;
  Segment cur;
  cur.scene_id = doc.scene_id;
  cur.doc_token_offset = 0;
  int flat = 0;

  auto close_segment = [&]() {
    if (!cur.tokens.empty()) {
      cur.index = static_cast<int>(segments.size());
      segments.push_back(std::move(cur));
      cur = Segment{};
      cur.scene_id = doc.scene_id;
    }
    cur.doc_token_offset = flat;
  };

  std::size_t i = 0;
  while (i < units.size()) {
    const int u = units[i].utterance;
    const int cur_len = static_cast<int>(cur.tokens.size());
    if (utt_len[u] <= max_tokens && cur_len + utt_len[u] > max_tokens) {
      // Whole utterance fits in a fresh segment; split at the utterance
      // boundary rather than inside it.
      close_segment();
    }
    // Append sentence by sentence; an oversized utterance spills at sentence
    // boundaries.
    while (i < units.size() && units[i].utterance == u) {
      const int len = static_cast<int>(units[i].tokens->size());
      if (static_cast<int>(cur.tokens.size()) + len > max_tokens) close_segment();
      cur.tokens.insert(cur.tokens.end(), units[i].tokens->begin(),
                        units[i].tokens->end());
      flat += len;
      ++i;
    }
  }
  close_segment();
  return segments;
}

std::vector<MentionLocation> locate_mentions(const SceneDocument& doc,
                                             const std::vector<Segment>& segments) {
  TokenIndex ix = TokenIndex::build(doc);
  std::vector<MentionLocation> out;
  out.reserve(doc.mentions.size());
  for (const Mention& m : doc.mentions) {
    const int fs = ix.flat(m.utterance_index, m.sentence_index, m.token_start);
    const int fe = ix.flat(m.utterance_index, m.sentence_index, m.token_end);
    int seg = -1;
    for (const Segment& s : segments) {
      if (fs >= s.doc_token_offset && fe < s.doc_token_offset + s.length()) {
        seg = s.index;
        break;
      }
    }
    if (seg < 0)
      throw ValidationError("scene " + doc.scene_id +
                            ": mention span not covered by any segment");
    out.push_back({seg, fs - segments[seg].doc_token_offset,
                   fe - segments[seg].doc_token_offset});
  }
  return out;
}

Vocabulary Vocabulary::build(const std::vector<SceneDocument>& train_docs) {
  std::set<std::string> seen;
  for (const SceneDocument& doc : train_docs)
    for (const Utterance& u : doc.utterances)
      for (const auto& sent : u.sentences)
        for (const std::string& tok : sent) seen.insert(tok);
  Vocabulary v;
  v.tokens.push_back(kUnkToken);
  v.index[kUnkToken] = 0;
  for (const std::string& tok : seen) {
    v.index[tok] = static_cast<int>(v.tokens.size());
    v.tokens.push_back(tok);
  }
  return v;
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? 0 : it->second;
}

TokenEncoding EncoderBackend::encode_tokens(const Segment& segment) const {
  TokenEncoding enc;
  enc.vectors = encode_values(segment);
  enc.doc_positions.resize(segment.tokens.size());
  std::iota(enc.doc_positions.begin(), enc.doc_positions.end(),
            segment.doc_token_offset);
  return enc;
}

BuiltinEncoder::BuiltinEncoder(ad::ParamStore& store, Vocabulary vocab, int d,
                               int layers, int heads, int max_positions,
                               Rng& rng, double init_std)
    : vocab_(std::move(vocab)), dim_(d), max_positions_(max_positions) {
  if (d % heads != 0)
    throw ConfigError("encoder dim must be divisible by the head count");
  token_emb_ = nn::Embedding::create(store, "encoder.token_emb", vocab_.size(), d,
                                     rng, init_std);
  position_emb_ = nn::Embedding::create(store, "encoder.position_emb",
                                        max_positions, d, rng, init_std);
  stack_ = nn::TransformerStack::create(store, "encoder.stack", layers, d, heads,
                                        4 * d, rng, init_std);
}

std::vector<int> BuiltinEncoder::token_ids(const Segment& segment) const {
  if (segment.length() > max_positions_)
    throw ConfigError("segment of " + std::to_string(segment.length()) +
                      " tokens exceeds the encoder position table (" +
                      std::to_string(max_positions_) + ")");
  std::vector<int> ids(segment.tokens.size());
  for (std::size_t i = 0; i < segment.tokens.size(); ++i)
    ids[i] = vocab_.id_of(segment.tokens[i]);
  return ids;
}

ad::Var BuiltinEncoder::encode(ad::Tape& t, const Segment& segment) const {
  std::vector<int> ids = token_ids(segment);
  std::vector<int> positions(ids.size());
  std::iota(positions.begin(), positions.end(), 0);
  ad::Var x = ad::add(token_emb_.apply(t, ids), position_emb_.apply(t, positions));
  return stack_.apply(t, x);
}

Matrix BuiltinEncoder::encode_values(const Segment& segment) const {
  std::vector<int> ids = token_ids(segment);
  std::vector<int> positions(ids.size());
  std::iota(positions.begin(), positions.end(), 0);
  Matrix x = kernels::add(token_emb_.forward(ids), position_emb_.forward(positions));
  return stack_.forward(x);
}

PrecomputedEncoder::PrecomputedEncoder(const std::string& artifact_path,
                                       int expected_dim) {
  std::ifstream in(artifact_path);
  if (!in)
    throw ConfigError("precomputed encoder artifact not found: " + artifact_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(artifact_path + ": " + e.what());
  }
  dim_ = j.at("dim").get<int>();
  if (expected_dim > 0 && dim_ != expected_dim)
    throw ConfigError("precomputed encoder artifact has dim " +
                      std::to_string(dim_) + " but the configuration asks for " +
                      std::to_string(expected_dim));
  for (const auto& [scene, rows] : j.at("documents").items()) {
    Matrix m(static_cast<int>(rows.size()), dim_);
    int r = 0;
    for (const json& row : rows) {
      if (static_cast<int>(row.size()) != dim_)
        throw ParseError(artifact_path + ": scene " + scene +
                         ": token vector of wrong dimension");
      for (int c = 0; c < dim_; ++c) m(r, c) = row[c].get<double>();
      ++r;
    }
    by_scene_.emplace(scene, std::move(m));
  }
}

Matrix PrecomputedEncoder::encode_values(const Segment& segment) const {
  auto it = by_scene_.find(segment.scene_id);
  if (it == by_scene_.end())
    throw Error("precomputed encoder has no vectors for scene " + segment.scene_id);
  const Matrix& all = it->second;
  if (segment.doc_token_offset + segment.length() > all.rows)
    throw ValidationError("precomputed vectors for scene " + segment.scene_id +
                          " cover fewer tokens than the document");
  Matrix out(segment.length(), dim_);
  for (int i = 0; i < segment.length(); ++i)
    std::copy(all.row_ptr(segment.doc_token_offset + i),
              all.row_ptr(segment.doc_token_offset + i) + dim_, out.row_ptr(i));
  return out;
}

ad::Var PrecomputedEncoder::encode(ad::Tape& t, const Segment& segment) const {
  return t.constant(encode_values(segment));
}

SpeakerTable::SpeakerTable(ad::ParamStore& store, const SpeakerInventory& inventory,
                           int d, Rng& rng, double init_std)
    : inventory_(inventory) {
  emb_ = nn::Embedding::create(store, "speaker_emb", inventory.size(), d, rng,
                               init_std);
}

int SpeakerTable::index_or_warn(const std::string& name) const {
  auto it = inventory_.index.find(name);
  if (it != inventory_.index.end()) return it->second;
  if (warned_.insert(name).second)
    std::cerr << "[corelink] speaker '" << name
              << "' not in the training inventory; using UNK\n";
  return 0;
}

std::vector<int> SpeakerTable::speaker_rows(const Utterance& utterance) const {
  std::vector<int> rows;
  if (utterance.speaker_ids.empty()) return {0};
  if (!mean_policy) return {index_or_warn(utterance.speaker_ids.front())};
  for (const std::string& s : utterance.speaker_ids)
    rows.push_back(index_or_warn(s));
  return rows;
}

ad::Var SpeakerTable::mention_speaker_vectors(
    ad::Tape& t, const std::vector<std::vector<int>>& rows) const {
  // One row per mention; multi-speaker utterances under the mean policy
  // average their speaker embeddings.
  bool all_single = true;
  for (const auto& r : rows) all_single = all_single && r.size() == 1;
  if (all_single) {
    std::vector<int> flat(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) flat[i] = rows[i][0];
    return emb_.apply(t, flat);
  }
  std::vector<ad::Var> parts;
  parts.reserve(rows.size());
  for (const auto& r : rows) {
    ad::Var v = emb_.apply(t, r);
    if (r.size() > 1) {
      Matrix ones(1, static_cast<int>(r.size()));
      ones.fill(1.0 / static_cast<double>(r.size()));
      v = ad::matmul(t.constant(ones), v);
    }
    parts.push_back(v);
  }
  return parts.size() == 1 ? parts[0] : ad::concat_rows(parts);
}

Matrix SpeakerTable::mention_speaker_values(
    const std::vector<std::vector<int>>& rows) const {
  Matrix out(static_cast<int>(rows.size()), emb_.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int r : rows[i]) {
      const double* src = emb_.table->value.row_ptr(r);
      for (int c = 0; c < emb_.dim(); ++c) out(static_cast<int>(i), c) += src[c];
    }
    const double inv = 1.0 / static_cast<double>(rows[i].size());
    for (int c = 0; c < emb_.dim(); ++c) out(static_cast<int>(i), c) *= inv;
  }
  return out;
}

Matrix initial_mention_reprs(const SceneDocument& doc,
                             const std::vector<Segment>& segments,
                             const std::vector<TokenEncoding>& encodings,
                             const SpeakerTable& speakers) {
  if (encodings.size() != segments.size())
    throw ValidationError("one token encoding per segment is required");
  std::vector<MentionLocation> locs = locate_mentions(doc, segments);
  const int d = speakers.embedding().dim();
  Matrix out(static_cast<int>(doc.mentions.size()), d);
  for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
    const MentionLocation& loc = locs[i];
    const Matrix& enc = encodings[loc.segment].vectors;
    if (enc.cols != d)
      throw ConfigError("token encoding dimension does not match the speaker table");
    std::vector<int> rows =
        speakers.speaker_rows(doc.utterances[doc.mentions[i].utterance_index]);
    Matrix sp = speakers.mention_speaker_values({rows});
    double* g = out.row_ptr(static_cast<int>(i));
    const double* ts = enc.row_ptr(loc.local_start);
    const double* te = enc.row_ptr(loc.local_end);
    for (int c = 0; c < d; ++c) g[c] = ts[c] + te[c] + sp(0, c);
  }
  return out;
}

}  // namespace corelink
