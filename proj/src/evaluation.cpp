#include "topicfuse/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "topicfuse/errors.hpp"
#include "topicfuse/fusion.hpp"

namespace topicfuse {

namespace {

bool predicts_class(const PredictionSet& pred, const std::string& class_name) {
  if (pred.is_emerging) return false;
  for (const auto& [name, prob] : pred.topics) {
    if (name == class_name) return true;
  }
  return false;
}

bool gold_has(const std::vector<int>& labels, int class_id) {
  return std::find(labels.begin(), labels.end(), class_id) != labels.end();
}

double safe_ratio(long num, long den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic_f1(double p, double r) {
  return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string percent2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f%%", v * 100.0);
  return buf;
}

}  // namespace

ClassMetrics metrics_from_counts(int class_id, long tp, long fp, long fn) {
  ClassMetrics m;
  m.class_id = class_id;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.support = tp + fn;
  m.precision = safe_ratio(tp, tp + fp);
  m.recall = safe_ratio(tp, tp + fn);
  m.f1 = harmonic_f1(m.precision, m.recall);
  return m;
}

ClassMetrics per_class_counts(const std::vector<PredictionSet>& preds,
                              const std::vector<std::vector<int>>& gold, int class_id) {
  if (preds.size() != gold.size()) {
    throw Error(ErrorKind::LengthMismatch,
                std::to_string(preds.size()) + " predictions vs " +
                    std::to_string(gold.size()) + " gold label sets");
  }
  if (class_id < 0 || class_id >= kTopicCount) {
    throw Error(ErrorKind::IdOutOfRange, "class id " + std::to_string(class_id));
  }
  const std::string& class_name = topic_names()[static_cast<size_t>(class_id)];

  long tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const bool predicted = predicts_class(preds[i], class_name);
    const bool actual = gold_has(gold[i], class_id);
    if (predicted && actual) ++tp;
    if (predicted && !actual) ++fp;
    if (!predicted && actual) ++fn;
  }
  return metrics_from_counts(class_id, tp, fp, fn);
}

Aggregates weighted_metrics(const std::vector<ClassMetrics>& per_class) {
  long total_support = 0;
  for (const auto& m : per_class) total_support += m.support;
  if (total_support == 0) {
    throw Error(ErrorKind::ZeroTotalSupport, "no class has gold-positive examples");
  }
  Aggregates agg;
  for (const auto& m : per_class) {
    const double w = static_cast<double>(m.support) / static_cast<double>(total_support);
    agg.precision += w * m.precision;
    agg.recall += w * m.recall;
    agg.f1 += w * m.f1;
  }
  return agg;
}

Aggregates micro_metrics(const std::vector<ClassMetrics>& per_class) {
  long tp = 0, fp = 0, fn = 0;
  for (const auto& m : per_class) {
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
  }
  Aggregates agg;
  agg.precision = safe_ratio(tp, tp + fp);
  agg.recall = safe_ratio(tp, tp + fn);
  agg.f1 = harmonic_f1(agg.precision, agg.recall);
  return agg;
}

double relative_improvement(double score_x, double score_y) {
  if (score_x == 0.0) {
    throw Error(ErrorKind::DivisionByZero, "baseline score is zero");
  }
  return (score_y - score_x) / score_x;
}

EvalReport evaluate_predictions(int variant, double threshold,
                                const std::vector<PredictionSet>& preds,
                                const std::vector<std::vector<int>>& gold) {
  EvalReport report;
  report.variant = variant;
  report.threshold = threshold;
  report.n = static_cast<int>(preds.size());
  report.per_class.reserve(kTopicCount);
  for (int c = 0; c < kTopicCount; ++c) {
    report.per_class.push_back(per_class_counts(preds, gold, c));
  }
  report.weighted = weighted_metrics(report.per_class);
  report.micro = micro_metrics(report.per_class);

  long emerging = 0;
  for (const auto& p : preds) {
    if (p.is_emerging) ++emerging;
    report.doc_ids.push_back(p.doc_id);
  }
  std::sort(report.doc_ids.begin(), report.doc_ids.end());
  report.emerging_rate = preds.empty() ? 0.0 : static_cast<double>(emerging) /
                                                   static_cast<double>(preds.size());
  return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& m : report.per_class) {
    per_class.push_back({{"id", m.class_id},
                         {"name", topic_names()[static_cast<size_t>(m.class_id)]},
                         {"support", m.support},
                         {"tp", m.tp},
                         {"fp", m.fp},
                         {"fn", m.fn},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1}});
  }
  return {{"variant", report.variant},
          {"threshold", report.threshold},
          {"n", report.n},
          {"weighted",
           {{"precision", report.weighted.precision},
            {"recall", report.weighted.recall},
            {"f1", report.weighted.f1}}},
          {"micro",
           {{"precision", report.micro.precision},
            {"recall", report.micro.recall},
            {"f1", report.micro.f1}}},
          {"per_class", per_class},
          {"emerging_rate", report.emerging_rate}};
}

namespace {

void require_same_test_sets(const std::map<int, EvalReport>& results) {
  const std::vector<std::string>* first = nullptr;
  int first_variant = 0;
  for (const auto& [variant, report] : results) {
    if (!first) {
      first = &report.doc_ids;
      first_variant = variant;
      continue;
    }
    if (report.doc_ids != *first) {
      throw Error(ErrorKind::InconsistentTestSets,
                  "variant " + std::to_string(variant) +
                      " was evaluated on a different document set than variant " +
                      std::to_string(first_variant));
    }
  }
}

}  // namespace

nlohmann::json comparison_report_json(const std::map<int, EvalReport>& results) {
  if (results.empty()) {
    throw Error(ErrorKind::EmptyDataset, "no evaluation results to compare");
  }
  require_same_test_sets(results);

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [variant, report] : results) {
    const VariantSpec& spec = variant_spec(variant);
    rows.push_back({{"variant", variant},
                    {"text_channel", spec.text_channel},
                    {"regex_channel", spec.regex_channel},
                    {"fusion_layer", spec.fusion_layer},
                    {"weighted_precision", report.weighted.precision},
                    {"weighted_recall", report.weighted.recall},
                    {"weighted_f1", report.weighted.f1},
                    {"micro_precision", report.micro.precision},
                    {"micro_recall", report.micro.recall},
                    {"micro_f1", report.micro.f1},
                    {"emerging_rate", report.emerging_rate}});
  }

  nlohmann::json improvements = nlohmann::json::array();
  for (const auto& [vx, rx] : results) {
    for (const auto& [vy, ry] : results) {
      if (vx == vy) continue;
      nlohmann::json entry = {{"from", vx}, {"to", vy}};
      if (rx.weighted.precision != 0.0)
        entry["precision"] = relative_improvement(rx.weighted.precision, ry.weighted.precision);
      if (rx.weighted.recall != 0.0)
        entry["recall"] = relative_improvement(rx.weighted.recall, ry.weighted.recall);
      if (rx.weighted.f1 != 0.0)
        entry["f1"] = relative_improvement(rx.weighted.f1, ry.weighted.f1);
      improvements.push_back(std::move(entry));
    }
  }

  return {{"rows", rows}, {"improvements", improvements}};
}

std::string comparison_report_text(const std::map<int, EvalReport>& results) {
  if (results.empty()) {
    throw Error(ErrorKind::EmptyDataset, "no evaluation results to compare");
  }
  require_same_test_sets(results);

  std::ostringstream out;
  out << "variant  text channel  regex channel       fusion         P(w)    R(w)    F1(w)\n";
  out << "-------  ------------  ------------------  -------------  ------  ------  ------\n";
  for (const auto& [variant, report] : results) {
    const VariantSpec& spec = variant_spec(variant);
    char line[160];
    std::snprintf(line, sizeof line, "%-7d  %-12s  %-18s  %-13s  %s  %s  %s\n", variant,
                  spec.text_channel.c_str(), spec.regex_channel.c_str(),
                  spec.fusion_layer.c_str(), fixed4(report.weighted.precision).c_str(),
                  fixed4(report.weighted.recall).c_str(), fixed4(report.weighted.f1).c_str());
    out << line;
  }

  if (results.size() > 1) {
    // Improvements of the best weighted-F1 variant over every other one.
    int best = results.begin()->first;
    for (const auto& [variant, report] : results) {
      if (report.weighted.f1 > results.at(best).weighted.f1) best = variant;
    }
    const EvalReport& top = results.at(best);
    out << "\nrelative improvement of variant " << best << " over:\n";
    for (const auto& [variant, report] : results) {
      if (variant == best) continue;
      out << "  variant " << variant << ":";
      if (report.weighted.precision != 0.0)
        out << "  precision " << percent2(relative_improvement(report.weighted.precision,
                                                               top.weighted.precision));
      if (report.weighted.recall != 0.0)
        out << "  recall " << percent2(relative_improvement(report.weighted.recall,
                                                            top.weighted.recall));
      if (report.weighted.f1 != 0.0)
        out << "  f1 " << percent2(relative_improvement(report.weighted.f1, top.weighted.f1));
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace topicfuse
