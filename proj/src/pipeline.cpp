#include "topicfuse/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <memory>
#include <set>

#include "topicfuse/errors.hpp"
#include "topicfuse/rng.hpp"

namespace topicfuse {

namespace {

std::string normalize_whitespace(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_gap = true;  // leading whitespace is dropped
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_gap = true;
      continue;
    }
    if (in_gap && !out.empty()) out.push_back(' ');
    in_gap = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

Dataset ingest(const std::string& path, const TopicRuleSet& rules) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::MissingFile, "cannot open dataset: " + path);
  }

  Dataset ds;
  ds.source = path;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    const std::string where = path + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::MalformedLine, where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("text") ||
        !j.contains("labels") || !j.at("id").is_string() || !j.at("text").is_string() ||
        !j.at("labels").is_array()) {
      throw Error(ErrorKind::MalformedLine,
                  where + ": expected {\"id\": string, \"text\": string, \"labels\": [string]}");
    }

    LabeledSample s;
    s.doc_id = j.at("id").get<std::string>();
    s.text = normalize_whitespace(j.at("text").get<std::string>());
    if (s.doc_id.empty() || s.text.empty()) {
      throw Error(ErrorKind::MalformedLine, where + ": id and text must be non-empty");
    }
    for (const auto& label : j.at("labels")) {
      if (!label.is_string()) {
        throw Error(ErrorKind::MalformedLine, where + ": labels must be strings");
      }
      const std::string name = label.get<std::string>();
      if (rules.id_of(name) < 0) {
        throw Error(ErrorKind::UnknownLabel, "'" + name + "' at " + where);
      }
      s.labels.push_back(name);
    }
    if (!seen.insert(s.doc_id).second) {
      throw Error(ErrorKind::DuplicateDocId, "'" + s.doc_id + "' at " + where);
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

PredictionSet predict(AssembledModel& assembled, const TopicRuleSet& rules,
                      const std::string& doc_id, const std::string& text,
                      double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::ParseError,
                "threshold must be in [0, 1], got " + std::to_string(threshold));
  }
  if (assembled.variant == 1) {
    PredictionSet p = classify_rules_only(text, rules, doc_id);
    p.threshold = threshold;
    return p;
  }
  if (!assembled.model) {
    throw Error(ErrorKind::UnknownVariant,
                "variant " + std::to_string(assembled.variant) + " has no model");
  }

  const RegexFeatureVector fv =
      tag(text, rules, assembled.model->config().cap, doc_id);
  const std::vector<double> probs = assembled.model->probabilities(doc_id, text, fv);

  PredictionSet p;
  p.doc_id = doc_id;
  p.threshold = threshold;
  for (int c = 0; c < kTopicCount; ++c) {
    const double prob = probs[static_cast<std::size_t>(c)];
    if (prob >= threshold) {
      p.topics.emplace_back(topic_names()[static_cast<std::size_t>(c)], prob);
    }
  }
  p.is_emerging = p.topics.empty();
  return p;
}

void export_bulk(const std::vector<PredictionSet>& predictions, const std::string& path,
                 int model_variant, const std::string& timestamp) {
  if (predictions.empty()) {
    throw Error(ErrorKind::EmptyDataset, "no predictions to export");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot open for writing: " + path);
  }
  for (const PredictionSet& p : predictions) {
    nlohmann::json action = {{"index", {{"_id", p.doc_id}}}};
    nlohmann::json topics = nlohmann::json::array();
    nlohmann::json probabilities = nlohmann::json::array();
    for (const auto& [name, prob] : p.topics) {
      topics.push_back(name);
      probabilities.push_back(prob);
    }
    nlohmann::json doc = {{"doc_id", p.doc_id},
                          {"topics", topics},
                          {"probabilities", probabilities},
                          {"is_emerging", p.is_emerging},
                          {"model_variant", model_variant},
                          {"timestamp", timestamp}};
    out << action.dump() << "\n" << doc.dump() << "\n";
  }
  out.flush();
  if (!out) {
    throw Error(ErrorKind::IoError, "write failed: " + path);
  }
}

std::vector<PredictionSet> parse_bulk(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::MissingFile, "cannot open export: " + path);
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.size() % 2 != 0) {
    throw Error(ErrorKind::ParseError, path + ": odd line count for an action/document format");
  }

  std::vector<PredictionSet> out;
  for (std::size_t i = 0; i < lines.size(); i += 2) {
    const std::string where = path + ":" + std::to_string(i + 2);
    nlohmann::json action;
    nlohmann::json doc;
    try {
      action = nlohmann::json::parse(lines[i]);
      doc = nlohmann::json::parse(lines[i + 1]);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::ParseError, where + ": " + e.what());
    }

    PredictionSet p;
    p.doc_id = doc.at("doc_id").get<std::string>();
    if (action.at("index").at("_id").get<std::string>() != p.doc_id) {
      throw Error(ErrorKind::ParseError, where + ": action id does not match document");
    }
    const auto& topics = doc.at("topics");
    const auto& probabilities = doc.at("probabilities");
    if (topics.size() != probabilities.size()) {
      throw Error(ErrorKind::ParseError, where + ": topics/probabilities length mismatch");
    }
    for (std::size_t t = 0; t < topics.size(); ++t) {
      p.topics.emplace_back(topics[t].get<std::string>(), probabilities[t].get<double>());
    }
    p.is_emerging = doc.at("is_emerging").get<bool>();
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

std::vector<int> gold_ids(const LabeledSample& sample, const TopicRuleSet& rules) {
  std::vector<int> ids;
  for (const std::string& label : sample.labels) {
    const int id = rules.id_of(label);
    if (id < 0) {
      throw Error(ErrorKind::UnknownLabel, "'" + label + "' in sample '" + sample.doc_id + "'");
    }
    ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

AblationResult run_ablation(const Dataset& ds, const TopicRuleSet& rules,
                            const AblationConfig& cfg, const Clock& clock) {
  if (cfg.variants.empty()) {
    throw Error(ErrorKind::ParseError, "no variants requested");
  }
  std::set<int> unique_variants;
  for (int v : cfg.variants) {
    (void)variant_spec(v);  // rejects unknown variants
    if (!unique_variants.insert(v).second) {
      throw Error(ErrorKind::ParseError, "variant " + std::to_string(v) + " requested twice");
    }
  }

  const auto [train_set, test_set] =
      split_dataset(ds.samples, cfg.train_ratio, cfg.train.seed);

  AblationResult result;
  std::vector<std::vector<int>> gold;
  gold.reserve(test_set.size());
  for (const LabeledSample& s : test_set) {
    gold.push_back(gold_ids(s, rules));
    const RegexFeatureVector fv = tag(s.text, rules, kDefaultFeatureCap, s.doc_id);
    const bool classifiable = fv.feature_ids != std::vector<int>{rules.no_topic_id()};
    if (classifiable) {
      ++result.test_regex_classifiable;
    } else {
      ++result.test_not_classifiable;
    }
  }

  std::vector<std::string> train_texts;
  train_texts.reserve(train_set.size());
  for (const LabeledSample& s : train_set) train_texts.push_back(s.text);
  const Vocabulary vocab = build_vocab(train_texts);

  MiniEncoderConfig enc_cfg = cfg.encoder;
  enc_cfg.d_model = cfg.fusion.d_model;

  const double threshold = cfg.train.threshold;
  std::map<int, EvalReport> reports;
  for (int variant : cfg.variants) {
    VariantRun run;
    run.variant = variant;
    if (variant == 1) {
      run.model.variant = 1;
    } else {
      run.model = assemble_model(variant, std::make_shared<MiniEncoder>(vocab, enc_cfg),
                                 cfg.fusion);
      Rng rng(cfg.train.seed);
      run.model.model->init(rng);
      run.history = train(*run.model.model, train_set, rules, cfg.train, clock);
    }

    std::vector<PredictionSet> preds;
    preds.reserve(test_set.size());
    for (const LabeledSample& s : test_set) {
      preds.push_back(predict(run.model, rules, s.doc_id, s.text, threshold));
    }
    run.report = evaluate_predictions(variant, threshold, preds, gold);
    reports[variant] = run.report;
    result.runs.push_back(std::move(run));
  }

  result.comparison = comparison_report_json(reports);
  result.comparison_text = comparison_report_text(reports);
  return result;
}

nlohmann::json ablation_summary_json(const AblationResult& result,
                                     const AblationConfig& cfg) {
  nlohmann::json variants = nlohmann::json::array();
  for (const VariantRun& run : result.runs) variants.push_back(run.variant);
  return {{"seed", cfg.train.seed},
          {"train_ratio", cfg.train_ratio},
          {"threshold", cfg.train.threshold},
          {"d_model", cfg.fusion.d_model},
          {"variants", variants},
          {"test_regex_classifiable", result.test_regex_classifiable},
          {"test_not_classifiable", result.test_not_classifiable}};
}

std::vector<ThresholdPoint> sweep_threshold(AssembledModel& assembled,
                                            const TopicRuleSet& rules,
                                            const std::vector<LabeledSample>& samples,
                                            const std::vector<double>& thresholds) {
  if (samples.empty()) {
    throw Error(ErrorKind::EmptyDataset, "nothing to sweep over");
  }
  if (thresholds.empty()) {
    throw Error(ErrorKind::ParseError, "no thresholds requested");
  }
  for (double t : thresholds) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw Error(ErrorKind::ParseError,
                  "threshold must be in [0, 1], got " + std::to_string(t));
    }
  }

  // One forward pass per sample; each threshold only re-cuts the scores.
  std::vector<std::vector<double>> scores;
  std::vector<std::vector<int>> gold;
  scores.reserve(samples.size());
  gold.reserve(samples.size());
  for (const LabeledSample& s : samples) {
    gold.push_back(gold_ids(s, rules));
    if (assembled.variant == 1) {
      const PredictionSet p = classify_rules_only(s.text, rules, s.doc_id);
      std::vector<double> row(kTopicCount, 0.0);
      for (const auto& [name, prob] : p.topics) {
        row[static_cast<std::size_t>(rules.id_of(name))] = prob;
      }
      scores.push_back(std::move(row));
    } else {
      if (!assembled.model) {
        throw Error(ErrorKind::UnknownVariant,
                    "variant " + std::to_string(assembled.variant) + " has no model");
      }
      const RegexFeatureVector fv =
          tag(s.text, rules, assembled.model->config().cap, s.doc_id);
      scores.push_back(assembled.model->probabilities(s.doc_id, s.text, fv));
    }
  }

  std::vector<ThresholdPoint> out;
  out.reserve(thresholds.size());
  for (double threshold : thresholds) {
    std::vector<PredictionSet> preds;
    preds.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      PredictionSet p;
      p.doc_id = samples[i].doc_id;
      p.threshold = threshold;
      for (int c = 0; c < kTopicCount; ++c) {
        const double prob = scores[i][static_cast<std::size_t>(c)];
        if (prob >= threshold && prob > 0.0) {
          p.topics.emplace_back(topic_names()[static_cast<std::size_t>(c)], prob);
        }
      }
      p.is_emerging = p.topics.empty();
      preds.push_back(std::move(p));
    }
    const EvalReport report =
        evaluate_predictions(assembled.variant, threshold, preds, gold);
    out.push_back({threshold, report.weighted.f1, report.emerging_rate});
  }
  return out;
}

nlohmann::json sweep_to_json(const std::vector<ThresholdPoint>& points) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ThresholdPoint& p : points) {
    rows.push_back({{"threshold", p.threshold},
                    {"weighted_f1", p.weighted_f1},
                    {"emerging_rate", p.emerging_rate}});
  }
  return {{"points", rows}};
}

}  // namespace topicfuse
