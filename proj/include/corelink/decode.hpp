#pragma once

#include <string>
#include <vector>

#include "corelink/corpus.hpp"
#include "corelink/heads.hpp"
#include "corelink/matrix.hpp"

namespace corelink {

// Chosen antecedent per mention; -1 is the dummy (start a new cluster).
struct AntecedentAssignment {
  std::vector<int> antecedent;
};

struct ConsistencyViolation {
  int cluster_index = 0;
  std::vector<int> members;
  std::vector<int> labels;  // distinct predicted classes in the cluster
};

// Cross-task diagnostic: predicted clusters whose members carry more than one
// predicted character label.
struct ConsistencyReport {
  std::vector<ConsistencyViolation> violations;
  int uniform_nonsingleton = 0;
  int nonsingleton = 0;
  double ratio = 1.0;  // uniform / nonsingleton; 1.0 when no nonsingletons
};

struct PredictionBundle {
  std::string scene_id;
  AntecedentAssignment assignment;
  Clustering clusters;
  std::vector<int> labels;  // class index per mention
  std::vector<std::vector<double>> antecedent_probs;
  Matrix linking_probs;
  ConsistencyReport consistency;
};

// Argmax over each candidate set (ties resolve toward the dummy, then the
// lowest index), then connected components of the antecedent graph.
std::pair<AntecedentAssignment, Clustering> decode_clusters(const AntecedentScores& s);

// Argmax class per mention; ties resolve toward the lowest class index.
std::vector<int> decode_characters(const Matrix& q);

ConsistencyReport consistency_report(const Clustering& clusters,
                                     const std::vector<int>& labels);

// Per-document prediction dump.
std::string bundle_to_json(const PredictionBundle& bundle,
                           const CharacterInventory& inventory);

}  // namespace corelink
