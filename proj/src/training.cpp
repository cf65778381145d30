#include "topicfuse/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "topicfuse/adamw.hpp"
#include "topicfuse/errors.hpp"
#include "topicfuse/kernels.hpp"
#include "topicfuse/rng.hpp"

namespace topicfuse {

namespace {

void validate_config(const TrainConfig& cfg) {
  if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 0.5)) {
    throw Error(ErrorKind::ParseError,
                "train config: val_fraction must be in (0, 0.5), got " +
                    std::to_string(cfg.val_fraction));
  }
  if (cfg.batch_size < 1) {
    throw Error(ErrorKind::ParseError, "train config: batch_size must be >= 1");
  }
  if (cfg.max_epochs < 1) {
    throw Error(ErrorKind::ParseError, "train config: max_epochs must be >= 1");
  }
}

double default_now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> split_dataset(
    const std::vector<LabeledSample>& ds, double train_ratio, std::uint64_t seed) {
  if (ds.empty()) {
    throw Error(ErrorKind::EmptyDataset, "cannot split an empty dataset");
  }
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw Error(ErrorKind::ParseError, "train_ratio must be in (0, 1), got " +
                                           std::to_string(train_ratio));
  }
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const auto train_n = static_cast<std::size_t>(
      std::lround(static_cast<double>(ds.size()) * train_ratio));
  std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> out;
  out.first.reserve(train_n);
  out.second.reserve(ds.size() - train_n);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < train_n ? out.first : out.second).push_back(ds[order[i]]);
  }
  return out;
}

Tensor2 make_target_matrix(const std::vector<LabeledSample>& samples,
                           const TopicRuleSet& rules) {
  Tensor2 targets(static_cast<int>(samples.size()), kTopicCount);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (const std::string& label : samples[i].labels) {
      const int id = rules.id_of(label);
      if (id < 0) {
        throw Error(ErrorKind::UnknownLabel, "'" + label + "' in sample '" +
                                                 samples[i].doc_id + "'");
      }
      targets(static_cast<int>(i), id) = 1.0;
    }
  }
  return targets;
}

namespace {

// One sample's precomputed training inputs.
struct PreparedSample {
  const LabeledSample* sample = nullptr;
  RegexFeatureVector features;
  Tensor2 target{1, kTopicCount};
};

double evaluate_mean_loss(FusionModel& model, const std::vector<PreparedSample>& set) {
  double total = 0.0;
  Tensor2 grad(1, kTopicCount);
  const double denom = static_cast<double>(set.size()) * kTopicCount;
  for (const PreparedSample& ps : set) {
    const Tensor2 logits = model.forward(ps.sample->doc_id, ps.sample->text, ps.features);
    total += bce_with_logits(logits, ps.target, denom, grad);
  }
  return total;
}

}  // namespace

TrainHistory train(FusionModel& model, const std::vector<LabeledSample>& train_set,
                   const TopicRuleSet& rules, const TrainConfig& cfg, const Clock& clock) {
  validate_config(cfg);
  if (static_cast<int>(train_set.size()) < cfg.batch_size) {
    throw Error(ErrorKind::TooFewSamples,
                std::to_string(train_set.size()) + " samples for batch size " +
                    std::to_string(cfg.batch_size));
  }

  const Clock now = clock ? clock : Clock(&default_now);

  // Tag and target once; both are epoch-invariant.
  std::vector<PreparedSample> prepared(train_set.size());
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    prepared[i].sample = &train_set[i];
    prepared[i].features = tag(train_set[i].text, rules, kDefaultFeatureCap,
                               train_set[i].doc_id);
    std::vector<LabeledSample> one = {train_set[i]};
    prepared[i].target = make_target_matrix(one, rules);
  }

  Rng rng(cfg.seed);
  rng.shuffle(prepared);
  const auto val_n = static_cast<std::size_t>(
      std::lround(static_cast<double>(prepared.size()) * cfg.val_fraction));
  if (val_n == 0 || val_n >= prepared.size()) {
    throw Error(ErrorKind::TooFewSamples,
                "validation carve of " + std::to_string(val_n) + " from " +
                    std::to_string(prepared.size()) + " samples leaves no usable split");
  }
  std::vector<PreparedSample> val(prepared.end() - static_cast<long>(val_n), prepared.end());
  prepared.resize(prepared.size() - val_n);

  std::vector<Param*> params;
  model.collect_params(params);
  AdamWConfig opt_cfg;
  opt_cfg.lr = cfg.lr;
  AdamW optimizer(params, opt_cfg);

  TrainHistory history;
  std::vector<Tensor2> best_values;
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;
  const double t0 = now();

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(prepared);

    double epoch_loss = 0.0;  // sample-weighted mean of per-batch means
    int batch_index = 0;
    for (std::size_t start = 0; start < prepared.size();
         start += static_cast<std::size_t>(cfg.batch_size), ++batch_index) {
      const std::size_t end =
          std::min(prepared.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double denom = static_cast<double>(end - start) * kTopicCount;

      double batch_loss = 0.0;
      Tensor2 grad(1, kTopicCount);
      for (std::size_t i = start; i < end; ++i) {
        const Tensor2 logits = model.forward(prepared[i].sample->doc_id,
                                             prepared[i].sample->text, prepared[i].features);
        batch_loss += bce_with_logits(logits, prepared[i].target, denom, grad);
        model.backward(grad);
      }
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorKind::NonFiniteLoss, "epoch " + std::to_string(epoch) +
                                                  " batch " + std::to_string(batch_index));
      }
      optimizer.step();
      epoch_loss += batch_loss * static_cast<double>(end - start);
    }
    epoch_loss /= static_cast<double>(prepared.size());

    const double val_loss = evaluate_mean_loss(model, val);
    if (!std::isfinite(val_loss)) {
      throw Error(ErrorKind::NonFiniteLoss,
                  "epoch " + std::to_string(epoch) + " validation pass");
    }

    history.train_loss.push_back(epoch_loss);
    history.val_loss.push_back(val_loss);
    history.wall_seconds.push_back(now() - t0);

    if (val_loss < best_val) {
      best_val = val_loss;
      history.best_epoch = epoch;
      epochs_since_best = 0;
      best_values.clear();
      best_values.reserve(params.size());
      for (const Param* p : params) best_values.push_back(p->value);
    } else {
      ++epochs_since_best;
    }
    if (cfg.patience > 0 && epochs_since_best >= cfg.patience) break;
  }

  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  return history;
}

nlohmann::json history_to_json(const TrainHistory& history) {
  return {{"train_loss", history.train_loss},
          {"val_loss", history.val_loss},
          {"wall_seconds", history.wall_seconds},
          {"best_epoch", history.best_epoch}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  if (j.contains("lr")) cfg.lr = j.at("lr").get<double>();
  if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<int>();
  if (j.contains("max_epochs")) cfg.max_epochs = j.at("max_epochs").get<int>();
  if (j.contains("val_fraction")) cfg.val_fraction = j.at("val_fraction").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("threshold")) cfg.threshold = j.at("threshold").get<double>();
  if (j.contains("patience")) cfg.patience = j.at("patience").get<int>();
  validate_config(cfg);
  return cfg;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::MissingFile, "cannot open train config: " + path);
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
  return train_config_from_json(j);
}

}  // namespace topicfuse
