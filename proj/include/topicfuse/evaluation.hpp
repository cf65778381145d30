#pragma once

#include <map>
#include <string>
#include <vector>

#include "topicfuse/prediction.hpp"
#include "topicfuse/rulebook.hpp"

#include "json.hpp"

namespace topicfuse {

struct ClassMetrics {
  int class_id = 0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long support = 0;  // gold positives: tp + fn
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Aggregates {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  int variant = 0;
  double threshold = 0.5;
  int n = 0;
  Aggregates weighted;
  Aggregates micro;
  std::vector<ClassMetrics> per_class;
  double emerging_rate = 0.0;
  // Sorted; lets comparisons detect reports built from different test sets.
  std::vector<std::string> doc_ids;
};

// Fills support, precision, recall, and f1 from raw confusion counts with the
// zero-denominator conventions (0 where undefined).
ClassMetrics metrics_from_counts(int class_id, long tp, long fp, long fn);

// Documents count as predicted-positive for a class when its name appears in
// the prediction's retained topic list; emerging-topic predictions carry no
// positives for any of the 27 classes.
ClassMetrics per_class_counts(const std::vector<PredictionSet>& preds,
                              const std::vector<std::vector<int>>& gold, int class_id);

// Support-weighted averages over the metric fields; zero-support classes
// carry zero weight.
Aggregates weighted_metrics(const std::vector<ClassMetrics>& per_class);

// Pooled counts across classes; f1 is the harmonic mean of pooled p and r.
Aggregates micro_metrics(const std::vector<ClassMetrics>& per_class);

// (score_y - score_x) / score_x
double relative_improvement(double score_x, double score_y);

EvalReport evaluate_predictions(int variant, double threshold,
                                const std::vector<PredictionSet>& preds,
                                const std::vector<std::vector<int>>& gold);

nlohmann::json report_to_json(const EvalReport& report);

// Table of one row per variant plus pairwise relative improvements.
nlohmann::json comparison_report_json(const std::map<int, EvalReport>& results);
std::string comparison_report_text(const std::map<int, EvalReport>& results);

}  // namespace topicfuse
