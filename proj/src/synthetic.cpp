#include <algorithm>
#include <array>
#include <cmath>

#include "corelink/corpus.hpp"
#include "corelink/errors.hpp"
#include "corelink/rng.hpp"

namespace corelink {

namespace {

const std::array<const char*, 40> kNames = {
    "alice",  "bruno",  "carla",  "derek",  "elena",  "felix",  "gwen",
    "hugo",   "iris",   "jonas",  "kira",   "liam",   "mona",   "nils",
    "opal",   "pavel",  "quinn",  "rosa",   "stan",   "tessa",  "ugo",
    "vera",   "walt",   "xenia",  "yuri",   "zelda",  "amos",   "bella",
    "cyrus",  "dora",   "edgar",  "fiona",  "gil",    "hanna",  "ivan",
    "june",   "karl",   "lena",   "marek",  "nina"};

const std::array<const char*, 24> kTopics = {
    "guitar",  "coffee", "garden", "novel",   "engine",  "piano",
    "recipe",  "ladder", "camera", "violin",  "puzzle",  "kettle",
    "mirror",  "magnet", "lantern", "basket", "helmet",  "canoe",
    "marble",  "saddle", "trumpet", "wallet", "compass", "teapot"};

struct SceneSentence {
  std::vector<std::string> tokens;
  int mention_start = -1;  // -1 means no mention in this sentence
  int mention_end = -1;
  std::string label;
};

SceneSentence intro_sentence(Rng& rng, const std::string& name,
                             const std::string& topic) {
  SceneSentence s;
  switch (rng.uniform_int(0, 1)) {
    case 0: s.tokens = {name, "likes", topic, "."}; break;
    default: s.tokens = {name, "loves", topic, "very", "much", "."}; break;
  }
  s.mention_start = s.mention_end = 0;
  s.label = name;
  return s;
}

SceneSentence pronoun_sentence(Rng& rng, const std::string& pronoun,
                               const std::string& name, const std::string& topic) {
  SceneSentence s;
  switch (rng.uniform_int(0, 2)) {
    case 0: s.tokens = {pronoun, "keeps", "talking", "about", topic, "."}; break;
    case 1: s.tokens = {pronoun, "brought", "the", topic, "again", "."}; break;
    default: s.tokens = {pronoun, "will", "fix", "the", topic, "later", "."}; break;
  }
  s.mention_start = s.mention_end = 0;
  s.label = name;
  return s;
}

SceneSentence named_sentence(Rng& rng, const std::string& name,
                             const std::string& topic) {
  SceneSentence s;
  switch (rng.uniform_int(0, 1)) {
    case 0: s.tokens = {name, "asked", "about", "the", topic, "."}; break;
    default: s.tokens = {name, "wants", "more", topic, "."}; break;
  }
  s.mention_start = s.mention_end = 0;
  s.label = name;
  return s;
}

SceneSentence first_person_sentence(Rng& rng, const std::string& name,
                                    const std::string& topic) {
  SceneSentence s;
  switch (rng.uniform_int(0, 1)) {
    case 0: s.tokens = {"i", "saw", "the", topic, "yesterday", "."}; break;
    default: s.tokens = {"i", "really", "like", topic, "."}; break;
  }
  s.mention_start = s.mention_end = 0;
  s.label = name;
  return s;
}

std::vector<std::string> filler_sentence(Rng& rng) {
  switch (rng.uniform_int(0, 2)) {
    case 0: return {"well", "okay", "then", "."};
    case 1: return {"what", "a", "day", "."};
    default: return {"let", "us", "move", "on", "."};
  }
}

}  // namespace

Corpus generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.scenes <= 0 || spec.characters <= 0 || spec.utterances_per_scene <= 0)
    throw Error("synthetic corpus: scene, character and utterance counts must be positive");
  if (spec.pronoun_ratio < 0.0 || spec.pronoun_ratio > 1.0)
    throw Error("synthetic corpus: pronoun_ratio must lie in [0, 1]");
  if (spec.scenes_per_episode <= 0)
    throw Error("synthetic corpus: scenes_per_episode must be positive");

  std::vector<std::string> names(spec.characters);
  for (int i = 0; i < spec.characters; ++i) {
    names[i] = kNames[i % kNames.size()];
    if (i >= static_cast<int>(kNames.size()))
      names[i] += std::to_string(i / kNames.size());
  }
  auto pronoun_for = [](int character) { return character % 2 == 0 ? "she" : "he"; };

  Rng rng(seed);
  std::vector<SceneDocument> all_scenes;
  all_scenes.reserve(spec.scenes);

  for (int sc = 0; sc < spec.scenes; ++sc) {
    SceneDocument doc;
    {
      char buf[32];
      std::snprintf(buf, sizeof buf, "e%03d_c%02d", sc / spec.scenes_per_episode,
                    sc % spec.scenes_per_episode);
      doc.scene_id = buf;
    }

    // Characters present in this scene and their scene-local topic words.
    const int present_n = std::min(spec.characters, 2 + rng.uniform_int(0, 2));
    std::vector<int> char_ids(spec.characters);
    for (int i = 0; i < spec.characters; ++i) char_ids[i] = i;
    rng.shuffle(char_ids);
    char_ids.resize(present_n);
    std::vector<int> topic_ids(kTopics.size());
    for (std::size_t i = 0; i < kTopics.size(); ++i) topic_ids[i] = static_cast<int>(i);
    rng.shuffle(topic_ids);

    auto name_of = [&](int slot) { return names[char_ids[slot]]; };
    auto topic_of = [&](int slot) { return std::string(kTopics[topic_ids[slot]]); };

    auto other_slot = [&](int slot) {
      if (present_n == 1) return slot;
      int o = rng.uniform_int(0, present_n - 2);
      return o >= slot ? o + 1 : o;
    };

    const int total_utts = std::max(spec.utterances_per_scene, present_n);
    for (int ui = 0; ui < total_utts; ++ui) {
      SceneSentence content;
      int speaker_slot;
      if (ui < present_n) {
        // Introduce each character by name before any pronoun refers back.
        content = intro_sentence(rng, name_of(ui), topic_of(ui));
        speaker_slot = other_slot(ui);
      } else {
        const int subject = rng.uniform_int(0, present_n - 1);
        if (rng.bernoulli(0.25)) {
          content = first_person_sentence(rng, name_of(subject), topic_of(subject));
          speaker_slot = subject;
        } else if (rng.bernoulli(spec.pronoun_ratio)) {
          content = pronoun_sentence(rng, pronoun_for(char_ids[subject]),
                                     name_of(subject), topic_of(subject));
          speaker_slot = other_slot(subject);
        } else {
          content = named_sentence(rng, name_of(subject), topic_of(subject));
          speaker_slot = other_slot(subject);
        }
      }

      Utterance u;
      u.utterance_index = ui;
      u.speaker_ids = {name_of(speaker_slot)};
      int content_sentence = 0;
      if (rng.bernoulli(0.2)) {
        u.sentences.push_back(filler_sentence(rng));
        content_sentence = 1;
      }
      u.sentences.push_back(content.tokens);

      Mention m;
      m.utterance_index = ui;
      m.sentence_index = content_sentence;
      m.token_start = content.mention_start;
      m.token_end = content.mention_end;
      m.labels = {content.label};
      doc.mentions.push_back(std::move(m));
      doc.utterances.push_back(std::move(u));
    }

    std::sort(doc.mentions.begin(), doc.mentions.end(),
              [](const Mention& a, const Mention& b) {
                return std::tie(a.utterance_index, a.sentence_index, a.token_start) <
                       std::tie(b.utterance_index, b.sentence_index, b.token_start);
              });
    for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
      doc.mentions[i].mention_index = static_cast<int>(i);
      doc.mentions[i].speaker_id =
          doc.utterances[doc.mentions[i].utterance_index].speaker_ids.front();
    }
    all_scenes.push_back(std::move(doc));
  }

  int n_dev = static_cast<int>(std::lround(spec.scenes * spec.dev_fraction));
  int n_test = static_cast<int>(std::lround(spec.scenes * spec.test_fraction));
  if (spec.scenes >= 3) {
    n_dev = std::max(n_dev, 1);
    n_test = std::max(n_test, 1);
  }
  const int n_train = spec.scenes - n_dev - n_test;
  if (n_train <= 0)
    throw Error("synthetic corpus: split fractions leave no training scenes");

  Corpus corpus;
  for (int i = 0; i < spec.scenes; ++i) {
    const std::string split =
        i < n_train ? "train" : (i < n_train + n_dev ? "dev" : "test");
    corpus[split].push_back(std::move(all_scenes[i]));
  }
  return corpus;
}

}  // namespace corelink
