#include "corelink/heads.hpp"

#include <cmath>

#include "corelink/errors.hpp"
#include "corelink/kernels.hpp"

namespace corelink {

CorefHead CorefHead::create(ad::ParamStore& store, int d, int hidden,
                            bool use_mention_score, Rng& rng, double init_std) {
  CorefHead h;
  h.ffnn_m = nn::FeedForward::create(store, "coref.ffnn_m", d, hidden, 1, rng, init_std);
  h.ffnn_a = nn::FeedForward::create(store, "coref.ffnn_a", 2 * d, hidden, 1, rng, init_std);
  h.use_mention_score = use_mention_score;
  return h;
}

LinkHead LinkHead::create(ad::ParamStore& store, int d, int hidden, int classes,
                          Rng& rng, double init_std) {
  if (classes < 2) throw ConfigError("linking head needs at least two classes");
  LinkHead h;
  h.ffnn_l = nn::FeedForward::create(store, "link.ffnn_l", d, hidden, classes, rng, init_std);
  return h;
}

AntecedentScores score_antecedents(const Matrix& reprs, const CorefHead& head) {
  const int k = reprs.rows;
  AntecedentScores out;
  out.scores.resize(k);
  if (k == 0) return out;

  Matrix sm;
  if (head.use_mention_score) sm = head.ffnn_m.forward(reprs);

  // Pairwise inputs [g_i, g_j] for all j < i, in (i asc, j asc) order.
  const int pairs = k * (k - 1) / 2;
  Matrix sa;
  if (pairs > 0) {
    std::vector<int> later, earlier;
    later.reserve(pairs);
    earlier.reserve(pairs);
    for (int i = 1; i < k; ++i)
      for (int j = 0; j < i; ++j) {
        later.push_back(i);
        earlier.push_back(j);
      }
    Matrix input = concat_cols({gather_rows(reprs, later), gather_rows(reprs, earlier)});
    sa = head.ffnn_a.forward(input);
  }

  for (int i = 0; i < k; ++i) {
    out.scores[i].resize(i + 1);
    out.scores[i][0] = 0.0;  // dummy antecedent
    for (int j = 0; j < i; ++j) {
      double s = sa(ad::pair_index(i, j), 0);
      if (head.use_mention_score) s += sm(i, 0) + sm(j, 0);
      out.scores[i][j + 1] = s;
    }
  }
  return out;
}

std::vector<std::vector<double>> antecedent_distribution(const AntecedentScores& s) {
  std::vector<std::vector<double>> out(s.scores.size());
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    const auto& row = s.scores[i];
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    out[i].resize(row.size());
    double z = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      out[i][j] = std::exp(row[j] - mx);
      z += out[i][j];
    }
    for (double& p : out[i]) p /= z;
  }
  return out;
}

Matrix linking_distribution(const Matrix& reprs, const LinkHead& head) {
  if (head.num_classes() < 2)
    throw ConfigError("linking distribution needs an inventory of size >= 2");
  return kernels::softmax_rows(head.ffnn_l.forward(reprs));
}

std::vector<std::vector<int>> gold_antecedent_sets(const Clustering& gold, int k) {
  std::vector<int> cluster_of = gold.mention_to_cluster(k);
  std::vector<std::vector<int>> sets(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < i; ++j)
      if (cluster_of[j] == cluster_of[i]) sets[i].push_back(j);
  return sets;
}

double coref_loss(const std::vector<std::vector<double>>& distributions,
                  const Clustering& gold) {
  const int k = static_cast<int>(distributions.size());
  std::vector<std::vector<int>> sets = gold_antecedent_sets(gold, k);
  double loss = 0.0;
  for (int i = 0; i < k; ++i) {
    double mass = 0.0;
    if (sets[i].empty()) {
      mass = distributions[i][0];  // dummy
    } else {
      for (int j : sets[i]) mass += distributions[i][j + 1];
    }
    loss -= std::log(mass);
  }
  return loss;
}

double linking_loss(const Matrix& q, const std::vector<int>& gold_classes) {
  if (static_cast<int>(gold_classes.size()) != q.rows)
    throw ValidationError("one gold class per mention is required");
  double loss = 0.0;
  for (int i = 0; i < q.rows; ++i) {
    const int z = gold_classes[i];
    if (z < 0 || z >= q.cols)
      throw ValidationError("gold class index " + std::to_string(z) +
                            " outside the inventory of " + std::to_string(q.cols));
    loss -= std::log(q(i, z));
  }
  return loss;
}

}  // namespace corelink
