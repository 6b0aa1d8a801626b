#pragma once

#include <vector>

#include "corelink/autodiff.hpp"
#include "corelink/corpus.hpp"
#include "corelink/matrix.hpp"
#include "corelink/nn.hpp"
#include "corelink/rng.hpp"

namespace corelink {

// Antecedent scorers: a mention score FFNN_m (d -> 1) and a pairwise score
// FFNN_a (2d -> 1) over the concatenation [g_i, g_j] with i the later mention.
struct CorefHead {
  nn::FeedForward ffnn_m;
  nn::FeedForward ffnn_a;
  bool use_mention_score = true;

  static CorefHead create(ad::ParamStore& store, int d, int hidden,
                          bool use_mention_score, Rng& rng, double init_std);
};

// Character classifier FFNN_l (d -> m).
struct LinkHead {
  nn::FeedForward ffnn_l;

  static LinkHead create(ad::ParamStore& store, int d, int hidden, int classes,
                         Rng& rng, double init_std);
  int num_classes() const { return ffnn_l.fc2.out_dim(); }
};

// Ragged candidate scores: scores[i][0] is the dummy antecedent (always 0),
// scores[i][1 + j] is s(i, j) for antecedent j < i. Candidate set size for
// mention i is exactly i + 1.
struct AntecedentScores {
  std::vector<std::vector<double>> scores;

  int num_mentions() const { return static_cast<int>(scores.size()); }
};

// s(i, j) = s_m(i) + s_m(j) + s_a(i, j); the mention-score terms drop out when
// the head disables them.
AntecedentScores score_antecedents(const Matrix& reprs, const CorefHead& head);

// Softmax over each mention's candidate set.
std::vector<std::vector<double>> antecedent_distribution(const AntecedentScores& s);

// Softmax class distribution per mention, k x m.
Matrix linking_distribution(const Matrix& reprs, const LinkHead& head);

// Gold antecedents per mention: earlier mentions of the same gold cluster;
// empty means the gold antecedent is the dummy.
std::vector<std::vector<int>> gold_antecedent_sets(const Clustering& gold, int k);

// Negative log marginal likelihood of the gold antecedents, summed over
// mentions.
double coref_loss(const std::vector<std::vector<double>>& distributions,
                  const Clustering& gold);

// Negative log likelihood of the gold classes, summed over mentions.
double linking_loss(const Matrix& q, const std::vector<int>& gold_classes);

inline double joint_loss(double l_coref, double l_link) {
  return (l_coref + l_link) / 2;
}

struct LossReport {
  double coref = 0.0;
  double linking = 0.0;
  double joint = 0.0;
};

}  // namespace corelink
