#include "corelink/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "corelink/errors.hpp"

namespace corelink {

using nlohmann::json;

const std::string& Mention::gold_character() const {
  if (labels.size() != 1)
    throw ValidationError("mention has no single gold character label");
  return labels[0];
}

int SceneDocument::num_tokens() const {
  int n = 0;
  for (const Utterance& u : utterances)
    for (const auto& s : u.sentences) n += static_cast<int>(s.size());
  return n;
}

TokenIndex TokenIndex::build(const SceneDocument& doc) {
  TokenIndex ix;
  ix.offset.resize(doc.utterances.size());
  int pos = 0;
  for (std::size_t u = 0; u < doc.utterances.size(); ++u) {
    ix.offset[u].resize(doc.utterances[u].sentences.size());
    for (std::size_t s = 0; s < doc.utterances[u].sentences.size(); ++s) {
      ix.offset[u][s] = pos;
      pos += static_cast<int>(doc.utterances[u].sentences[s].size());
    }
  }
  ix.total = pos;
  return ix;
}

Clustering Clustering::from_cluster_ids(const std::vector<int>& ids) {
  Clustering c;
  std::map<int, std::vector<int>> groups;
  for (std::size_t i = 0; i < ids.size(); ++i)
    groups[ids[i]].push_back(static_cast<int>(i));
  // Order clusters by first mention.
  std::vector<std::vector<int>> out(groups.size());
  std::size_t n = 0;
  for (auto& [id, members] : groups) out[n++] = std::move(members);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  c.clusters = std::move(out);
  return c;
}

std::vector<int> Clustering::mention_to_cluster(int num_mentions) const {
  std::vector<int> map(num_mentions, -1);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (clusters[c].empty()) throw ValidationError("empty cluster in partition");
    for (int m : clusters[c]) {
      if (m < 0 || m >= num_mentions)
        throw ValidationError("cluster member out of mention range");
      if (map[m] != -1) throw ValidationError("clusters are not disjoint");
      map[m] = static_cast<int>(c);
    }
  }
  for (int m = 0; m < num_mentions; ++m)
    if (map[m] == -1)
      throw ValidationError("clusters do not cover every mention");
  return map;
}

int Clustering::num_mentions() const {
  int n = 0;
  for (const auto& c : clusters) n += static_cast<int>(c.size());
  return n;
}

int CharacterInventory::class_of(const std::string& label) const {
  auto it = index.find(label);
  return it == index.end() ? other_index() : it->second;
}

int SpeakerInventory::index_of(const std::string& name) const {
  auto it = index.find(name);
  return it == index.end() ? 0 : it->second;
}

namespace {

void sort_and_index_mentions(SceneDocument& doc, const std::string& source) {
  for (Mention& m : doc.mentions) {
    if (m.utterance_index < 0 ||
        m.utterance_index >= static_cast<int>(doc.utterances.size()))
      throw ValidationError(source + ": scene " + doc.scene_id +
                            ": mention utterance index out of range");
    const Utterance& u = doc.utterances[m.utterance_index];
    if (m.sentence_index < 0 ||
        m.sentence_index >= static_cast<int>(u.sentences.size()))
      throw ValidationError(source + ": scene " + doc.scene_id +
                            ": mention sentence index out of range");
    const auto& sent = u.sentences[m.sentence_index];
    if (m.token_start < 0 || m.token_end < m.token_start ||
        m.token_end >= static_cast<int>(sent.size())) {
      std::ostringstream os;
      os << source << ": scene " << doc.scene_id << ": utterance "
         << m.utterance_index << " sentence " << m.sentence_index
         << ": mention span [" << m.token_start << ", " << m.token_end
         << "] outside sentence of " << sent.size() << " tokens";
      throw ValidationError(os.str());
    }
    if (m.labels.empty())
      throw ValidationError(source + ": scene " + doc.scene_id +
                            ": mention without a gold label");
    std::sort(m.labels.begin(), m.labels.end());
    if (u.speaker_ids.empty())
      throw ValidationError(source + ": scene " + doc.scene_id +
                            ": utterance without a speaker");
    m.speaker_id = u.speaker_ids.front();
  }
  std::sort(doc.mentions.begin(), doc.mentions.end(),
            [](const Mention& a, const Mention& b) {
              return std::tie(a.utterance_index, a.sentence_index, a.token_start,
                              a.token_end) <
                     std::tie(b.utterance_index, b.sentence_index, b.token_start,
                              b.token_end);
            });
  for (std::size_t i = 0; i < doc.mentions.size(); ++i)
    doc.mentions[i].mention_index = static_cast<int>(i);
}

void filter_singular(SceneDocument& doc) {
  std::vector<Mention> kept;
  kept.reserve(doc.mentions.size());
  for (Mention& m : doc.mentions)
    if (m.is_singular()) kept.push_back(std::move(m));
  doc.mentions = std::move(kept);
  for (std::size_t i = 0; i < doc.mentions.size(); ++i)
    doc.mentions[i].mention_index = static_cast<int>(i);
}

SceneDocument parse_canonical_document(const json& jd, const std::string& source) {
  SceneDocument doc;
  if (!jd.contains("scene_id") || !jd["scene_id"].is_string())
    throw ParseError(source + ": document without a string scene_id");
  doc.scene_id = jd["scene_id"].get<std::string>();
  if (!jd.contains("utterances") || !jd["utterances"].is_array())
    throw ParseError(source + ": scene " + doc.scene_id + ": missing utterances");
  int ui = 0;
  for (const json& ju : jd["utterances"]) {
    Utterance u;
    u.utterance_index = ui;
    if (!ju.contains("speakers") || !ju["speakers"].is_array())
      throw ParseError(source + ": scene " + doc.scene_id +
                       ": utterance without speakers");
    for (const json& s : ju["speakers"]) u.speaker_ids.push_back(s.get<std::string>());
    if (!ju.contains("sentences") || !ju["sentences"].is_array())
      throw ParseError(source + ": scene " + doc.scene_id +
                       ": utterance without sentences");
    for (const json& js : ju["sentences"]) {
      std::vector<std::string> sent;
      for (const json& tok : js) sent.push_back(tok.get<std::string>());
      u.sentences.push_back(std::move(sent));
    }
    if (ju.contains("mentions")) {
      for (const json& jm : ju["mentions"]) {
        Mention m;
        m.utterance_index = ui;
        m.sentence_index = jm.at("sentence").get<int>();
        m.token_start = jm.at("start").get<int>();
        m.token_end = jm.at("end").get<int>();
        for (const json& l : jm.at("labels")) m.labels.push_back(l.get<std::string>());
        doc.mentions.push_back(std::move(m));
      }
    }
    doc.utterances.push_back(std::move(u));
    ++ui;
  }
  sort_and_index_mentions(doc, source);
  return doc;
}

// Released character-identification layout: season -> episodes -> scenes ->
// utterances with per-sentence entity annotations [begin, end, label...] and
// exclusive end offsets.
void parse_released_file(const json& jroot, const std::string& source,
                         Corpus& corpus) {
  if (!jroot.contains("episodes") || !jroot["episodes"].is_array())
    throw ParseError(source + ": released layout without episodes array");
  for (const json& jep : jroot["episodes"]) {
    const std::string episode_id = jep.value("episode_id", std::string());
    // Episode ordinal from the trailing number of e.g. "s01_e07".
    int ep_num = -1;
    {
      std::size_t pos = episode_id.find_last_of('e');
      if (pos != std::string::npos) {
        try {
          ep_num = std::stoi(episode_id.substr(pos + 1));
        } catch (...) {
          ep_num = -1;
        }
      }
    }
    if (ep_num < 0)
      throw ParseError(source + ": cannot derive episode number from id '" +
                       episode_id + "'");
    const std::string split =
        ep_num <= 19 ? "train" : (ep_num <= 21 ? "dev" : "test");

    if (!jep.contains("scenes") || !jep["scenes"].is_array())
      throw ParseError(source + ": episode " + episode_id + " without scenes");
    for (const json& js : jep["scenes"]) {
      SceneDocument doc;
      doc.scene_id = js.value("scene_id", std::string());
      if (doc.scene_id.empty())
        throw ParseError(source + ": episode " + episode_id +
                         ": scene without scene_id");
      int ui = 0;
      for (const json& ju : js.at("utterances")) {
        Utterance u;
        u.utterance_index = ui;
        if (ju.contains("speakers"))
          for (const json& sp : ju["speakers"])
            u.speaker_ids.push_back(sp.get<std::string>());
        if (u.speaker_ids.empty()) u.speaker_ids.push_back("#UNKNOWN#");
        if (!ju.contains("tokens") || !ju["tokens"].is_array())
          throw ParseError(source + ": scene " + doc.scene_id +
                           ": utterance without tokens");
        for (const json& jt : ju["tokens"]) {
          std::vector<std::string> sent;
          for (const json& tok : jt) sent.push_back(tok.get<std::string>());
          u.sentences.push_back(std::move(sent));
        }
        if (ju.contains("character_entities")) {
          const json& ents = ju["character_entities"];
          if (!ents.is_array() ||
              (ents.size() != u.sentences.size() && !ents.empty()))
            throw ParseError(source + ": scene " + doc.scene_id +
                             ": character_entities shape mismatch");
          for (std::size_t si = 0; si < ents.size(); ++si) {
            for (const json& ann : ents[si]) {
              if (!ann.is_array() || ann.size() < 2)
                throw ParseError(source + ": scene " + doc.scene_id +
                                 ": malformed entity annotation");
              if (ann.size() == 2) continue;  // span without any label
              Mention m;
              m.utterance_index = ui;
              m.sentence_index = static_cast<int>(si);
              m.token_start = ann[0].get<int>();
              m.token_end = ann[1].get<int>() - 1;  // exclusive -> inclusive
              for (std::size_t li = 2; li < ann.size(); ++li)
                m.labels.push_back(ann[li].get<std::string>());
              doc.mentions.push_back(std::move(m));
            }
          }
        }
        doc.utterances.push_back(std::move(u));
        ++ui;
      }
      sort_and_index_mentions(doc, source);
      corpus[split].push_back(std::move(doc));
    }
  }
}

}  // namespace

std::vector<SceneDocument> parse_canonical_json(const std::string& text,
                                                const std::string& source_name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(source_name + ": " + e.what());
  }
  if (!j.contains("documents") || !j["documents"].is_array())
    throw ParseError(source_name + ": missing top-level documents array");
  std::vector<SceneDocument> docs;
  for (const json& jd : j["documents"])
    docs.push_back(parse_canonical_document(jd, source_name));
  return docs;
}

std::string to_canonical_json(const std::vector<SceneDocument>& docs) {
  json out;
  out["documents"] = json::array();
  for (const SceneDocument& doc : docs) {
    json jd;
    jd["scene_id"] = doc.scene_id;
    jd["utterances"] = json::array();
    for (const Utterance& u : doc.utterances) {
      json ju;
      ju["speakers"] = u.speaker_ids;
      ju["sentences"] = u.sentences;
      ju["mentions"] = json::array();
      jd["utterances"].push_back(std::move(ju));
    }
    for (const Mention& m : doc.mentions) {
      json jm;
      jm["sentence"] = m.sentence_index;
      jm["start"] = m.token_start;
      jm["end"] = m.token_end;
      jm["labels"] = m.labels;
      jd["utterances"][m.utterance_index]["mentions"].push_back(std::move(jm));
    }
    out["documents"].push_back(std::move(jd));
  }
  return out.dump(1);
}

Corpus load_corpus(const std::filesystem::path& path, bool singular_only) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw Error("corpus path does not exist: " + path.string());

  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw Error("no .json corpus files under " + path.string());
  } else {
    files.push_back(path);
  }

  Corpus corpus;
  for (const fs::path& file : files) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open corpus file " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    json j;
    try {
      j = json::parse(buf.str());
    } catch (const json::exception& e) {
      throw ParseError(file.string() + ": " + e.what());
    }
    if (j.contains("documents")) {
      const std::string split = file.stem().string();
      if (split != "train" && split != "dev" && split != "test")
        throw Error(file.string() + ": unknown split name '" + split +
                    "' (expected train, dev or test)");
      std::vector<SceneDocument> docs = parse_canonical_json(buf.str(), file.string());
      auto& dst = corpus[split];
      dst.insert(dst.end(), std::make_move_iterator(docs.begin()),
                 std::make_move_iterator(docs.end()));
    } else if (j.contains("episodes")) {
      parse_released_file(j, file.string(), corpus);
    } else {
      throw ParseError(file.string() +
                       ": unrecognized corpus layout (no documents/episodes key)");
    }
  }

  if (singular_only)
    for (auto& [split, docs] : corpus)
      for (SceneDocument& doc : docs) filter_singular(doc);
  return corpus;
}

Clustering derive_gold_clusters(const SceneDocument& doc) {
  std::map<std::vector<std::string>, int> label_to_cluster;
  std::vector<int> ids(doc.mentions.size());
  for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
    const Mention& m = doc.mentions[i];
    if (m.labels.empty())
      throw ValidationError("scene " + doc.scene_id + ": mention " +
                            std::to_string(i) + " lacks a gold label");
    auto [it, _] = label_to_cluster.try_emplace(
        m.labels, static_cast<int>(label_to_cluster.size()));
    ids[i] = it->second;
  }
  return Clustering::from_cluster_ids(ids);
}

std::pair<CharacterInventory, SpeakerInventory> build_inventories(
    const std::vector<SceneDocument>& train_docs, int min_mentions) {
  CharacterInventory chars;
  SpeakerInventory speakers;

  std::int64_t total_mentions = 0;
  std::set<std::string> speaker_names;
  for (const SceneDocument& doc : train_docs) {
    for (const Mention& m : doc.mentions) {
      for (const std::string& l : m.labels) ++chars.training_counts[l];
      ++total_mentions;
    }
    for (const Utterance& u : doc.utterances)
      for (const std::string& s : u.speaker_ids) speaker_names.insert(s);
  }
  if (total_mentions == 0)
    throw Error("cannot build inventories from an empty training set");

  // Frequent characters get classes, ordered by count desc then name; the
  // rest collapse into OTHER, which always sits at the last index.
  std::vector<std::pair<std::string, std::int64_t>> counted(
      chars.training_counts.begin(), chars.training_counts.end());
  std::sort(counted.begin(), counted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [label, count] : counted) {
    if (count >= min_mentions) {
      chars.index[label] = static_cast<int>(chars.labels.size());
      chars.labels.push_back(label);
    }
  }
  chars.index[CharacterInventory::kOtherLabel] =
      static_cast<int>(chars.labels.size());
  chars.labels.push_back(CharacterInventory::kOtherLabel);

  speakers.names.push_back(SpeakerInventory::kUnkLabel);
  speakers.index[SpeakerInventory::kUnkLabel] = 0;
  for (const std::string& name : speaker_names) {
    speakers.index[name] = static_cast<int>(speakers.names.size());
    speakers.names.push_back(name);
  }
  return {std::move(chars), std::move(speakers)};
}

std::string episode_of_scene(const std::string& scene_id) {
  // Strip a trailing "_c<digits>" scene suffix when present.
  std::size_t pos = scene_id.rfind("_c");
  if (pos == std::string::npos || pos + 2 >= scene_id.size()) return scene_id;
  for (std::size_t i = pos + 2; i < scene_id.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(scene_id[i]))) return scene_id;
  return scene_id.substr(0, pos);
}

namespace {

SplitStats stats_for_docs(const std::string& name,
                          const std::vector<SceneDocument>& docs,
                          std::set<std::string>* all_speakers,
                          std::set<std::string>* all_entities,
                          std::set<std::string>* all_episodes) {
  SplitStats s;
  s.split = name;
  std::set<std::string> speakers, entities, episodes;
  for (const SceneDocument& doc : docs) {
    ++s.scenes;
    episodes.insert(episode_of_scene(doc.scene_id));
    s.utterances += static_cast<std::int64_t>(doc.utterances.size());
    s.mentions += static_cast<std::int64_t>(doc.mentions.size());
    for (const Utterance& u : doc.utterances)
      for (const std::string& sp : u.speaker_ids) speakers.insert(sp);
    for (const Mention& m : doc.mentions)
      for (const std::string& l : m.labels) entities.insert(l);
  }
  s.episodes = static_cast<std::int64_t>(episodes.size());
  s.speakers = static_cast<std::int64_t>(speakers.size());
  s.entities = static_cast<std::int64_t>(entities.size());
  if (all_speakers) all_speakers->insert(speakers.begin(), speakers.end());
  if (all_entities) all_entities->insert(entities.begin(), entities.end());
  if (all_episodes) all_episodes->insert(episodes.begin(), episodes.end());
  return s;
}

}  // namespace

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats out;
  std::set<std::string> all_speakers, all_entities, all_episodes;
  std::vector<std::string> order;
  for (const char* k : {"train", "dev", "test"})
    if (corpus.count(k)) order.push_back(k);
  for (const auto& [k, _] : corpus)
    if (std::find(order.begin(), order.end(), k) == order.end())
      order.push_back(k);

  out.total.split = "total";
  for (const std::string& k : order) {
    SplitStats s = stats_for_docs(k, corpus.at(k), &all_speakers, &all_entities,
                                  &all_episodes);
    out.total.scenes += s.scenes;
    out.total.utterances += s.utterances;
    out.total.mentions += s.mentions;
    out.rows.push_back(std::move(s));
  }
  out.total.episodes = static_cast<std::int64_t>(all_episodes.size());
  out.total.speakers = static_cast<std::int64_t>(all_speakers.size());
  out.total.entities = static_cast<std::int64_t>(all_entities.size());
  return out;
}

std::string render_stats_markdown(const CorpusStats& stats) {
  std::ostringstream os;
  os << "| Dataset | Episodes | Scenes | Utterances | Speakers | Mentions | Entities |\n";
  os << "|---|---|---|---|---|---|---|\n";
  auto row = [&os](const SplitStats& s) {
    os << "| " << s.split << " | " << s.episodes << " | " << s.scenes << " | "
       << s.utterances << " | " << s.speakers << " | " << s.mentions << " | "
       << s.entities << " |\n";
  };
  for (const SplitStats& s : stats.rows) row(s);
  row(stats.total);
  return os.str();
}

std::string stats_to_json(const CorpusStats& stats) {
  json j;
  auto fill = [](const SplitStats& s) {
    json r;
    r["episodes"] = s.episodes;
    r["scenes"] = s.scenes;
    r["utterances"] = s.utterances;
    r["speakers"] = s.speakers;
    r["mentions"] = s.mentions;
    r["entities"] = s.entities;
    return r;
  };
  for (const SplitStats& s : stats.rows) j[s.split] = fill(s);
  j["total"] = fill(stats.total);
  return j.dump(2);
}

}  // namespace corelink
