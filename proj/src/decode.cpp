#include "corelink/decode.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "corelink/union_find.hpp"

namespace corelink {

using nlohmann::json;

std::pair<AntecedentAssignment, Clustering> decode_clusters(const AntecedentScores& s) {
  const int k = s.num_mentions();
  AntecedentAssignment assign;
  assign.antecedent.resize(k);
  UnionFind uf(std::max(k, 1));
  for (int i = 0; i < k; ++i) {
    const auto& row = s.scores[i];
    // Candidate 0 is the dummy; strict comparison keeps ties on the dummy and
    // then on the lowest antecedent index.
    int best = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[best]) best = static_cast<int>(c);
    assign.antecedent[i] = best - 1;
    if (best > 0) uf.unite(i, best - 1);
  }

  std::vector<int> root_ids(k);
  for (int i = 0; i < k; ++i) root_ids[i] = uf.find(i);
  Clustering clusters = k == 0 ? Clustering{} : Clustering::from_cluster_ids(root_ids);
  return {std::move(assign), std::move(clusters)};
}

std::vector<int> decode_characters(const Matrix& q) {
  std::vector<int> labels(q.rows);
  for (int i = 0; i < q.rows; ++i) {
    int best = 0;
    for (int c = 1; c < q.cols; ++c)
      if (q(i, c) > q(i, best)) best = c;
    labels[i] = best;
  }
  return labels;
}

ConsistencyReport consistency_report(const Clustering& clusters,
                                     const std::vector<int>& labels) {
  ConsistencyReport report;
  for (std::size_t c = 0; c < clusters.clusters.size(); ++c) {
    const auto& members = clusters.clusters[c];
    if (members.size() < 2) continue;
    ++report.nonsingleton;
    std::map<int, int> seen;
    for (int m : members) ++seen[labels.at(m)];
    if (seen.size() == 1) {
      ++report.uniform_nonsingleton;
    } else {
      ConsistencyViolation v;
      v.cluster_index = static_cast<int>(c);
      v.members = members;
      for (const auto& [label, _] : seen) v.labels.push_back(label);
      report.violations.push_back(std::move(v));
    }
  }
  report.ratio = report.nonsingleton == 0
                     ? 1.0
                     : static_cast<double>(report.uniform_nonsingleton) /
                           static_cast<double>(report.nonsingleton);
  return report;
}

std::string bundle_to_json(const PredictionBundle& bundle,
                           const CharacterInventory& inventory) {
  json j;
  j["scene_id"] = bundle.scene_id;
  j["antecedents"] = bundle.assignment.antecedent;
  j["clusters"] = bundle.clusters.clusters;
  json labels = json::array();
  for (int l : bundle.labels) labels.push_back(inventory.labels.at(l));
  j["labels"] = std::move(labels);
  json cons;
  cons["ratio"] = bundle.consistency.ratio;
  cons["nonsingleton_clusters"] = bundle.consistency.nonsingleton;
  cons["uniform_clusters"] = bundle.consistency.uniform_nonsingleton;
  cons["violations"] = json::array();
  for (const ConsistencyViolation& v : bundle.consistency.violations) {
    json jv;
    jv["cluster"] = v.members;
    json vl = json::array();
    for (int l : v.labels) vl.push_back(inventory.labels.at(l));
    jv["labels"] = std::move(vl);
    cons["violations"].push_back(std::move(jv));
  }
  j["consistency"] = std::move(cons);
  return j.dump();
}

}  // namespace corelink
