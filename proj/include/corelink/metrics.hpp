#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "corelink/corpus.hpp"

namespace corelink {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline PRF prf_from(double p, double r) {
  PRF x;
  x.precision = p;
  x.recall = r;
  x.f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  return x;
}

// (gold, pred) partitions of one document's mentions.
using DocPartitions = std::pair<Clustering, Clustering>;

// B-cubed with mention-wise pooling across documents.
PRF b_cubed(const std::vector<DocPartitions>& docs);
// CEAF under phi4(K, R) = 2|K n R| / (|K| + |R|) with an optimal one-to-one
// cluster alignment per document; totals pooled across documents.
PRF ceaf_phi4(const std::vector<DocPartitions>& docs);
// BLANC over within-document mention pairs, coreference and non-coreference
// link classes averaged; a class empty in both gold and pred is ignored.
PRF blanc(const std::vector<DocPartitions>& docs);

inline PRF b_cubed(const Clustering& gold, const Clustering& pred) {
  return b_cubed(std::vector<DocPartitions>{{gold, pred}});
}
inline PRF ceaf_phi4(const Clustering& gold, const Clustering& pred) {
  return ceaf_phi4(std::vector<DocPartitions>{{gold, pred}});
}
inline PRF blanc(const Clustering& gold, const Clustering& pred) {
  return blanc(std::vector<DocPartitions>{{gold, pred}});
}

struct PerClassScore {
  PRF prf;
  std::int64_t support = 0;
};

struct LinkingScores {
  PRF micro;  // pooled counts; equals accuracy in this single-label setting
  double macro_f1 = 0.0;  // unweighted mean over classes with gold support
  std::map<std::string, PerClassScore> per_class;
};

LinkingScores linking_f1(const std::vector<int>& gold_classes,
                         const std::vector<int>& pred_classes,
                         const CharacterInventory& inventory);

struct MetricsReport {
  PRF b3;
  PRF ceaf;
  PRF blanc_links;
  double coref_avg_f1 = 0.0;  // mean of the three coreference F1s
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::map<std::string, PerClassScore> per_character;

  // Aggregation across repeated runs; a single evaluation reports itself as
  // the mean with a placeholder std of zero.
  int runs = 1;
  bool std_is_placeholder = true;
  std::map<std::string, double> mean_values;
  std::map<std::string, double> std_values;
};

MetricsReport compute_metrics_report(const std::vector<DocPartitions>& docs,
                                     const std::vector<int>& gold_classes,
                                     const std::vector<int>& pred_classes,
                                     const CharacterInventory& inventory);

// Mean and sample standard deviation per metric; the coreference average F1
// is recomputed from the mean F1s.
MetricsReport aggregate_runs(const std::vector<MetricsReport>& reports);

std::string report_to_json(const MetricsReport& report);

// Markdown tables with the coreference-metric and per-character layouts.
std::string render_coref_table(
    const std::vector<std::pair<std::string, MetricsReport>>& rows);
std::string render_linking_table(
    const std::vector<std::pair<std::string, MetricsReport>>& rows);

}  // namespace corelink
