#pragma once

#include <string>
#include <vector>

#include "topicfuse/encoder.hpp"
#include "topicfuse/evaluation.hpp"
#include "topicfuse/fusion.hpp"
#include "topicfuse/prediction.hpp"
#include "topicfuse/rulebook.hpp"
#include "topicfuse/training.hpp"

#include "json.hpp"

namespace topicfuse {

struct Dataset {
  std::vector<LabeledSample> samples;
  std::string source;
  int schema_version = 1;
};

// JSON-lines file, one {"id", "text", "labels"} object per line. Text is
// whitespace-normalized; doc ids must be unique and labels must name
// rulebook topics.
Dataset ingest(const std::string& path, const TopicRuleSet& rules);

// tag -> encode -> embed -> fuse -> classify, keeping topics at or above the
// threshold; an empty result is flagged emerging. The rules-only variant
// answers from classify_rules_only instead of a trained network.
PredictionSet predict(AssembledModel& assembled, const TopicRuleSet& rules,
                      const std::string& doc_id, const std::string& text,
                      double threshold);

// Newline-delimited bulk format: per prediction an action line
// {"index":{"_id":...}} then a document line {doc_id, topics, probabilities,
// is_emerging, model_variant, timestamp}. The caller supplies the timestamp
// so exports can be made byte-reproducible.
void export_bulk(const std::vector<PredictionSet>& predictions, const std::string& path,
                 int model_variant, const std::string& timestamp);

// Parses every document line of an export back into predictions.
std::vector<PredictionSet> parse_bulk(const std::string& path);

struct AblationConfig {
  TrainConfig train;            // seed drives split, init, and every shuffle
  double train_ratio = 0.7;
  FusionConfig fusion;          // regex mode / fusion layer overridden per variant
  MiniEncoderConfig encoder;    // d_model follows fusion.d_model
  std::vector<int> variants = {1, 2, 3, 4, 5};
};

struct VariantRun {
  int variant = 0;
  TrainHistory history;  // empty for the rules-only variant
  EvalReport report;
  AssembledModel model;
};

struct AblationResult {
  std::vector<VariantRun> runs;
  int test_regex_classifiable = 0;
  int test_not_classifiable = 0;
  nlohmann::json comparison;
  std::string comparison_text;
};

// Splits once, trains every requested learned variant on the shared train
// half, evaluates everything (rules-only included) on the shared test half.
AblationResult run_ablation(const Dataset& ds, const TopicRuleSet& rules,
                            const AblationConfig& cfg, const Clock& clock = Clock());

nlohmann::json ablation_summary_json(const AblationResult& result,
                                     const AblationConfig& cfg);

struct ThresholdPoint {
  double threshold = 0.0;
  double weighted_f1 = 0.0;
  double emerging_rate = 0.0;
};

// Scores one model over the same samples at several thresholds, reusing a
// single forward pass per sample.
std::vector<ThresholdPoint> sweep_threshold(AssembledModel& assembled,
                                            const TopicRuleSet& rules,
                                            const std::vector<LabeledSample>& samples,
                                            const std::vector<double>& thresholds);

nlohmann::json sweep_to_json(const std::vector<ThresholdPoint>& points);

}  // namespace topicfuse
