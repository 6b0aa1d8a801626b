#include "corelink/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "corelink/assignment.hpp"
#include "corelink/errors.hpp"

namespace corelink {

using nlohmann::json;

namespace {

struct DocMaps {
  int k = 0;
  std::vector<int> gold_of;
  std::vector<int> pred_of;
  std::vector<int> gold_sizes;
  std::vector<int> pred_sizes;
};

DocMaps doc_maps(const DocPartitions& doc) {
  DocMaps m;
  m.k = doc.first.num_mentions();
  if (doc.second.num_mentions() != m.k)
    throw ValidationError("gold and predicted partitions cover different mention sets");
  m.gold_of = doc.first.mention_to_cluster(m.k);
  m.pred_of = doc.second.mention_to_cluster(m.k);
  for (const auto& c : doc.first.clusters) m.gold_sizes.push_back(static_cast<int>(c.size()));
  for (const auto& c : doc.second.clusters) m.pred_sizes.push_back(static_cast<int>(c.size()));
  return m;
}

}  // namespace

PRF b_cubed(const std::vector<DocPartitions>& docs) {
  double p_sum = 0.0, r_sum = 0.0;
  std::int64_t n = 0;
  for (const DocPartitions& doc : docs) {
    DocMaps m = doc_maps(doc);
    // Overlap counts between each (gold cluster, pred cluster) pair.
    std::map<std::pair<int, int>, int> inter;
    for (int x = 0; x < m.k; ++x) ++inter[{m.gold_of[x], m.pred_of[x]}];
    for (int x = 0; x < m.k; ++x) {
      const int ov = inter[{m.gold_of[x], m.pred_of[x]}];
      p_sum += static_cast<double>(ov) / m.pred_sizes[m.pred_of[x]];
      r_sum += static_cast<double>(ov) / m.gold_sizes[m.gold_of[x]];
    }
    n += m.k;
  }
  if (n == 0) return prf_from(1.0, 1.0);
  return prf_from(p_sum / static_cast<double>(n), r_sum / static_cast<double>(n));
}

PRF ceaf_phi4(const std::vector<DocPartitions>& docs) {
  double phi_star = 0.0;
  std::int64_t gold_clusters = 0, pred_clusters = 0;
  for (const DocPartitions& doc : docs) {
    DocMaps m = doc_maps(doc);
    const int g = static_cast<int>(m.gold_sizes.size());
    const int p = static_cast<int>(m.pred_sizes.size());
    gold_clusters += g;
    pred_clusters += p;
    if (g == 0 || p == 0) continue;
    Matrix phi(g, p);
    std::map<std::pair<int, int>, int> inter;
    for (int x = 0; x < m.k; ++x) ++inter[{m.gold_of[x], m.pred_of[x]}];
    for (const auto& [gp, count] : inter)
      phi(gp.first, gp.second) = 2.0 * count /
                                 (m.gold_sizes[gp.first] + m.pred_sizes[gp.second]);
    phi_star += max_weight_assignment(phi);
  }
  if (gold_clusters == 0 && pred_clusters == 0) return prf_from(1.0, 1.0);
  const double p = pred_clusters > 0 ? phi_star / static_cast<double>(pred_clusters) : 0.0;
  const double r = gold_clusters > 0 ? phi_star / static_cast<double>(gold_clusters) : 0.0;
  return prf_from(p, r);
}

PRF blanc(const std::vector<DocPartitions>& docs) {
  // Pooled link counts; pairs are within-document only.
  std::int64_t coref_both = 0, coref_gold = 0, coref_pred = 0;
  std::int64_t non_both = 0, non_gold = 0, non_pred = 0;
  for (const DocPartitions& doc : docs) {
    DocMaps m = doc_maps(doc);
    for (int i = 0; i < m.k; ++i)
      for (int j = i + 1; j < m.k; ++j) {
        const bool g = m.gold_of[i] == m.gold_of[j];
        const bool p = m.pred_of[i] == m.pred_of[j];
        coref_gold += g;
        coref_pred += p;
        non_gold += !g;
        non_pred += !p;
        coref_both += g && p;
        non_both += !g && !p;
      }
  }

  // No pairs at all (at most one mention per document): the partitions are
  // necessarily identical, score 1.
  if (coref_gold + coref_pred + non_gold + non_pred == 0)
    return prf_from(1.0, 1.0);

  auto class_prf = [](std::int64_t both, std::int64_t gold, std::int64_t pred) {
    const double p = pred > 0 ? static_cast<double>(both) / pred : 0.0;
    const double r = gold > 0 ? static_cast<double>(both) / gold : 0.0;
    return prf_from(p, r);
  };
  const PRF c = class_prf(coref_both, coref_gold, coref_pred);
  const PRF n = class_prf(non_both, non_gold, non_pred);

  // A class empty in both gold and pred does not participate.
  if (coref_gold == 0 && coref_pred == 0) return n;
  if (non_gold == 0 && non_pred == 0) return c;
  PRF out;
  out.precision = (c.precision + n.precision) / 2;
  out.recall = (c.recall + n.recall) / 2;
  out.f1 = (c.f1 + n.f1) / 2;
  return out;
}

LinkingScores linking_f1(const std::vector<int>& gold_classes,
                         const std::vector<int>& pred_classes,
                         const CharacterInventory& inventory) {
  if (gold_classes.size() != pred_classes.size())
    throw ValidationError("gold and predicted label sequences have different lengths");
  const std::int64_t n = static_cast<std::int64_t>(gold_classes.size());
  const int m = inventory.size();

  std::vector<std::int64_t> tp(m, 0), fp(m, 0), fn(m, 0), support(m, 0);
  std::int64_t correct = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const int g = gold_classes[i], p = pred_classes[i];
    if (g < 0 || g >= m || p < 0 || p >= m)
      throw ValidationError("class index outside the inventory");
    ++support[g];
    if (g == p) {
      ++tp[g];
      ++correct;
    } else {
      ++fn[g];
      ++fp[p];
    }
  }

  LinkingScores out;
  const double acc = n > 0 ? static_cast<double>(correct) / n : 1.0;
  // Pooled counts: sum tp / (sum tp + sum fp) == accuracy here, since every
  // miss is one fp and one fn.
  std::int64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
  for (int c = 0; c < m; ++c) {
    tp_sum += tp[c];
    fp_sum += fp[c];
    fn_sum += fn[c];
  }
  const double micro_p = tp_sum + fp_sum > 0 ? static_cast<double>(tp_sum) / (tp_sum + fp_sum) : 1.0;
  const double micro_r = tp_sum + fn_sum > 0 ? static_cast<double>(tp_sum) / (tp_sum + fn_sum) : 1.0;
  out.micro = prf_from(micro_p, micro_r);
  if (std::fabs(out.micro.f1 - acc) > 1e-12)
    throw Error("micro F1 diverged from accuracy in a single-label setting");

  double macro_sum = 0.0;
  int macro_n = 0;
  for (int c = 0; c < m; ++c) {
    if (support[c] == 0) continue;
    const double p = tp[c] + fp[c] > 0 ? static_cast<double>(tp[c]) / (tp[c] + fp[c]) : 0.0;
    const double r = static_cast<double>(tp[c]) / (tp[c] + fn[c]);
    PerClassScore s;
    s.prf = prf_from(p, r);
    s.support = support[c];
    out.per_class[inventory.labels.at(c)] = s;
    macro_sum += s.prf.f1;
    ++macro_n;
  }
  out.macro_f1 = macro_n > 0 ? macro_sum / macro_n : 0.0;
  return out;
}

namespace {

std::map<std::string, double> flat_values(const MetricsReport& r) {
  return {
      {"b3_precision", r.b3.precision},
      {"b3_recall", r.b3.recall},
      {"b3_f1", r.b3.f1},
      {"ceaf_phi4_precision", r.ceaf.precision},
      {"ceaf_phi4_recall", r.ceaf.recall},
      {"ceaf_phi4_f1", r.ceaf.f1},
      {"blanc_precision", r.blanc_links.precision},
      {"blanc_recall", r.blanc_links.recall},
      {"blanc_f1", r.blanc_links.f1},
      {"coref_avg_f1", r.coref_avg_f1},
      {"micro_f1", r.micro_f1},
      {"macro_f1", r.macro_f1},
  };
}

}  // namespace

MetricsReport compute_metrics_report(const std::vector<DocPartitions>& docs,
                                     const std::vector<int>& gold_classes,
                                     const std::vector<int>& pred_classes,
                                     const CharacterInventory& inventory) {
  MetricsReport r;
  r.b3 = b_cubed(docs);
  r.ceaf = ceaf_phi4(docs);
  r.blanc_links = blanc(docs);
  r.coref_avg_f1 = (r.b3.f1 + r.ceaf.f1 + r.blanc_links.f1) / 3.0;
  LinkingScores link = linking_f1(gold_classes, pred_classes, inventory);
  r.micro_f1 = link.micro.f1;
  r.macro_f1 = link.macro_f1;
  r.per_character = std::move(link.per_class);
  r.runs = 1;
  r.std_is_placeholder = true;
  r.mean_values = flat_values(r);
  for (const auto& [k, _] : r.mean_values) r.std_values[k] = 0.0;
  return r;
}

MetricsReport aggregate_runs(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw Error("aggregate_runs needs at least one report");
  const auto keys = flat_values(reports.front());
  for (const MetricsReport& r : reports) {
    if (flat_values(r).size() != keys.size())
      throw Error("aggregate_runs: inconsistent metric keys");
    if (r.per_character.size() != reports.front().per_character.size())
      throw Error("aggregate_runs: inconsistent per-character keys");
    for (const auto& [name, _] : r.per_character)
      if (!reports.front().per_character.count(name))
        throw Error("aggregate_runs: inconsistent per-character keys");
  }

  const int n = static_cast<int>(reports.size());
  MetricsReport agg;
  std::map<std::string, double> mean, sd;
  for (const auto& [key, _] : keys) {
    double s = 0.0;
    for (const MetricsReport& r : reports) s += flat_values(r).at(key);
    mean[key] = s / n;
  }
  for (const auto& [key, _] : keys) {
    if (n < 2) {
      sd[key] = 0.0;
      continue;
    }
    double acc = 0.0;
    for (const MetricsReport& r : reports) {
      const double d = flat_values(r).at(key) - mean.at(key);
      acc += d * d;
    }
    sd[key] = std::sqrt(acc / (n - 1));
  }

  auto mean_prf = [&](const std::string& prefix) {
    PRF p;
    p.precision = mean.at(prefix + "_precision");
    p.recall = mean.at(prefix + "_recall");
    p.f1 = mean.at(prefix + "_f1");
    return p;
  };
  agg.b3 = mean_prf("b3");
  agg.ceaf = mean_prf("ceaf_phi4");
  agg.blanc_links = mean_prf("blanc");
  agg.coref_avg_f1 = (agg.b3.f1 + agg.ceaf.f1 + agg.blanc_links.f1) / 3.0;
  agg.micro_f1 = mean.at("micro_f1");
  agg.macro_f1 = mean.at("macro_f1");
  mean["coref_avg_f1"] = agg.coref_avg_f1;

  for (const auto& [name, first] : reports.front().per_character) {
    PerClassScore s;
    double p = 0, r = 0, f = 0;
    std::int64_t support = 0;
    for (const MetricsReport& rep : reports) {
      const PerClassScore& c = rep.per_character.at(name);
      p += c.prf.precision;
      r += c.prf.recall;
      f += c.prf.f1;
      support += c.support;
    }
    s.prf.precision = p / n;
    s.prf.recall = r / n;
    s.prf.f1 = f / n;
    s.support = support / n;
    agg.per_character[name] = s;
  }

  agg.runs = n;
  agg.std_is_placeholder = n < 2;
  agg.mean_values = std::move(mean);
  agg.std_values = std::move(sd);
  return agg;
}

std::string report_to_json(const MetricsReport& report) {
  json j;
  auto prf = [](const PRF& p) {
    json x;
    x["precision"] = p.precision;
    x["recall"] = p.recall;
    x["f1"] = p.f1;
    return x;
  };
  j["b3"] = prf(report.b3);
  j["ceaf_phi4"] = prf(report.ceaf);
  j["blanc"] = prf(report.blanc_links);
  j["coref_avg_f1"] = report.coref_avg_f1;
  j["micro_f1"] = report.micro_f1;
  j["macro_f1"] = report.macro_f1;
  json pc = json::object();
  for (const auto& [name, s] : report.per_character) {
    json x = prf(s.prf);
    x["support"] = s.support;
    pc[name] = std::move(x);
  }
  j["per_character"] = std::move(pc);
  j["mean"] = report.mean_values;
  json sd = report.std_values.empty() ? json::object() : json(report.std_values);
  sd["_runs"] = report.runs;
  sd["_placeholder"] = report.std_is_placeholder;
  j["std"] = std::move(sd);
  return j.dump(2) + "\n";
}

namespace {

std::string pct(double v, int digits = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << 100.0 * v;
  return os.str();
}

}  // namespace

std::string render_coref_table(
    const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::ostringstream os;
  os << "| Model | B3 Prec. | B3 Rec. | B3 F1 | CEAF_phi4 Prec. | CEAF_phi4 Rec. | "
        "CEAF_phi4 F1 | BLANC Prec. | BLANC Rec. | BLANC F1 | Avg. F1 |\n";
  os << "|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& [name, r] : rows) {
    os << "| " << name << " | " << pct(r.b3.precision) << " | " << pct(r.b3.recall)
       << " | " << pct(r.b3.f1) << " | " << pct(r.ceaf.precision) << " | "
       << pct(r.ceaf.recall) << " | " << pct(r.ceaf.f1) << " | "
       << pct(r.blanc_links.precision) << " | " << pct(r.blanc_links.recall)
       << " | " << pct(r.blanc_links.f1) << " | " << pct(r.coref_avg_f1);
    if (r.runs > 1) os << " (" << pct(r.std_values.at("coref_avg_f1")) << ")";
    os << " |\n";
  }
  return os.str();
}

std::string render_linking_table(
    const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  if (rows.empty()) return "";
  // Character columns from the first row, by support, capped at eight.
  std::vector<std::pair<std::string, std::int64_t>> chars;
  for (const auto& [name, s] : rows.front().per_character)
    chars.emplace_back(name, s.support);
  std::sort(chars.begin(), chars.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (chars.size() > 8) chars.resize(8);

  std::ostringstream os;
  os << "| Model |";
  for (const auto& [name, _] : chars) os << " " << name << " |";
  os << " Micro | Macro |\n|---|";
  for (std::size_t i = 0; i < chars.size(); ++i) os << "---|";
  os << "---|---|\n";
  for (const auto& [name, r] : rows) {
    os << "| " << name << " |";
    for (const auto& [cname, _] : chars) {
      auto it = r.per_character.find(cname);
      os << " " << (it == r.per_character.end() ? std::string("-") : pct(it->second.prf.f1, 1))
         << " |";
    }
    os << " " << pct(r.micro_f1, 1);
    if (r.runs > 1) os << " (" << pct(r.std_values.at("micro_f1"), 1) << ")";
    os << " | " << pct(r.macro_f1, 1);
    if (r.runs > 1) os << " (" << pct(r.std_values.at("macro_f1"), 1) << ")";
    os << " |\n";
  }
  return os.str();
}

}  // namespace corelink
