#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "topicfuse/fusion.hpp"
#include "topicfuse/rulebook.hpp"
#include "topicfuse/tensor.hpp"

#include "json.hpp"

namespace topicfuse {

struct LabeledSample {
  std::string doc_id;
  std::string text;
  std::vector<std::string> labels;  // topic names, subset of the 27
};

struct TrainConfig {
  double lr = 2e-5;
  int batch_size = 8;
  int max_epochs = 30;
  double val_fraction = 0.15;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  int patience = 5;  // <= 0 disables early stopping
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> wall_seconds;  // cumulative per recorded epoch
  int best_epoch = -1;               // zero-based index of the restored epoch
};

// Deterministic shuffled split; train gets round(n * train_ratio) samples.
std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> split_dataset(
    const std::vector<LabeledSample>& ds, double train_ratio, std::uint64_t seed);

// n x 27 rows of {0,1}; a row has 1 at every column named in its label set.
Tensor2 make_target_matrix(const std::vector<LabeledSample>& samples,
                           const TopicRuleSet& rules);

// Wall-clock source, injectable so recorded timings can be made reproducible.
using Clock = std::function<double()>;

// Carves the validation slice from the tail of a seeded shuffle, then runs
// seeded mini-batch epochs (tag, encode, fuse, classify, mean binary
// cross-entropy, optimizer step), tracking validation loss. Stops at
// max_epochs or when `patience` epochs pass without improvement, and leaves
// the model holding its best-validation-epoch parameters.
TrainHistory train(FusionModel& model, const std::vector<LabeledSample>& train_set,
                   const TopicRuleSet& rules, const TrainConfig& cfg,
                   const Clock& clock = Clock());

nlohmann::json history_to_json(const TrainHistory& history);

TrainConfig train_config_from_json(const nlohmann::json& j);
TrainConfig load_train_config(const std::string& path);

}  // namespace topicfuse
