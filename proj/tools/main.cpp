// topicfuse command line: tag, train, evaluate, predict, ablate, export,
// sweep-threshold, gen-corpus. Exit codes: 0 success, 2 validation error,
// 3 runtime/numeric error.

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "topicfuse/checkpoint.hpp"
#include "topicfuse/corpus.hpp"
#include "topicfuse/errors.hpp"
#include "topicfuse/pipeline.hpp"

namespace {

using namespace topicfuse;
using nlohmann::json;

constexpr const char* kDefaultRulebook = TOPICFUSE_DATA_DIR "/rulebook.tsv";

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open for writing: " + path);
  out << content;
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + path);
}

// Empty path means stdout.
void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    write_text(path, content);
  }
}

std::string utc_now_iso() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Everything a training-shaped subcommand can override. The config file is
// applied first, explicit flags win over it.
struct RunFlags {
  std::string config_path;
  std::string rulebook = kDefaultRulebook;
  std::string vectors;
  bool fixed_clock = false;

  std::optional<int> variant;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::optional<int> d_model;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<int> batch_size;
  std::optional<double> val_fraction;
  std::optional<int> patience;
  std::optional<int> layers;
  std::optional<int> heads;
  std::optional<int> max_seq_len;
  std::optional<double> train_ratio;
  std::vector<int> variants;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file; flags override it");
  cmd->add_option("--rulebook", f.rulebook, "regex rulebook TSV")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "seed for split, init, and shuffles");
  cmd->add_option("--threshold", f.threshold, "decision threshold tau");
  cmd->add_option("--d-model", f.d_model, "embedding width");
  cmd->add_option("--epochs", f.epochs, "max training epochs");
  cmd->add_option("--lr", f.lr, "learning rate");
  cmd->add_option("--batch-size", f.batch_size, "mini-batch size");
  cmd->add_option("--val-fraction", f.val_fraction, "validation share of the train set");
  cmd->add_option("--patience", f.patience, "early-stopping patience; <=0 disables");
  cmd->add_option("--layers", f.layers, "text encoder blocks");
  cmd->add_option("--heads", f.heads, "attention heads (encoder and fusion)");
  cmd->add_option("--max-seq-len", f.max_seq_len, "token budget per document");
  cmd->add_option("--vectors", f.vectors,
                  "precomputed document vectors TSV; replaces the mini encoder");
  cmd->add_flag("--fixed-clock", f.fixed_clock,
                "record zero wall-clock times so artifacts are byte-reproducible");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

AblationConfig resolve_config(const RunFlags& f) {
  AblationConfig cfg;
  if (!f.config_path.empty()) {
    const json j = read_json_file(f.config_path);
    if (j.contains("train")) cfg.train = train_config_from_json(j.at("train"));
    if (j.contains("fusion")) cfg.fusion = fusion_config_from_json(j.at("fusion"));
    if (j.contains("encoder")) {
      const json& e = j.at("encoder");
      if (e.contains("layers")) cfg.encoder.layers = e.at("layers").get<int>();
      if (e.contains("heads")) cfg.encoder.heads = e.at("heads").get<int>();
      if (e.contains("max_seq_len"))
        cfg.encoder.max_seq_len = e.at("max_seq_len").get<int>();
    }
    if (j.contains("train_ratio")) cfg.train_ratio = j.at("train_ratio").get<double>();
    if (j.contains("variants")) cfg.variants = j.at("variants").get<std::vector<int>>();
  }

  if (f.seed) cfg.train.seed = *f.seed;
  if (f.threshold) cfg.train.threshold = *f.threshold;
  if (f.epochs) cfg.train.max_epochs = *f.epochs;
  if (f.lr) cfg.train.lr = *f.lr;
  if (f.batch_size) cfg.train.batch_size = *f.batch_size;
  if (f.val_fraction) cfg.train.val_fraction = *f.val_fraction;
  if (f.patience) cfg.train.patience = *f.patience;
  if (f.d_model) cfg.fusion.d_model = *f.d_model;
  if (f.heads) {
    cfg.fusion.heads = *f.heads;
    cfg.encoder.heads = *f.heads;
  }
  if (f.layers) cfg.encoder.layers = *f.layers;
  if (f.max_seq_len) cfg.encoder.max_seq_len = *f.max_seq_len;
  if (f.train_ratio) cfg.train_ratio = *f.train_ratio;
  if (!f.variants.empty()) cfg.variants = f.variants;

  cfg.encoder.d_model = cfg.fusion.d_model;
  return cfg;
}

Clock make_clock(bool fixed) {
  if (fixed) return [] { return 0.0; };
  return Clock();  // train falls back to the real wall clock
}

json prediction_to_json(const PredictionSet& p) {
  json topics = json::array();
  for (const auto& [name, prob] : p.topics) {
    topics.push_back({{"name", name}, {"probability", prob}});
  }
  return {{"doc_id", p.doc_id},
          {"topics", std::move(topics)},
          {"is_emerging", p.is_emerging},
          {"threshold", p.threshold}};
}

PredictionSet prediction_from_json(const json& j, const std::string& where) {
  try {
    PredictionSet p;
    p.doc_id = j.at("doc_id").get<std::string>();
    for (const json& t : j.at("topics")) {
      p.topics.emplace_back(t.at("name").get<std::string>(),
                            t.at("probability").get<double>());
    }
    p.is_emerging = j.at("is_emerging").get<bool>();
    p.threshold = j.value("threshold", 0.5);
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedLine, where + ": " + e.what());
  }
}

std::vector<PredictionSet> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open: " + path);
  std::vector<PredictionSet> preds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::MalformedLine, where + ": " + e.what());
    }
    preds.push_back(prediction_from_json(j, where));
  }
  return preds;
}

// A model argument is either a checkpoint prefix (prefix.ckpt + prefix.json)
// or `--variant 1` for the parameterless rules-only classifier.
AssembledModel load_model_arg(const std::string& prefix, const RunFlags& f) {
  if (prefix.empty()) {
    if (f.variant.value_or(0) != 1) {
      throw Error(ErrorKind::ParseError,
                  "supply --model PREFIX, or --variant 1 for the rules-only path");
    }
    AssembledModel rules_only;
    rules_only.variant = 1;
    return rules_only;
  }

  const std::string sidecar_path = prefix + ".json";
  const json sidecar = read_json_file(sidecar_path);
  std::shared_ptr<TextEncoder> precomputed;
  if (sidecar.contains("encoder") &&
      sidecar.at("encoder").value("kind", "") == "precomputed") {
    if (f.vectors.empty()) {
      throw Error(ErrorKind::ParseError,
                  sidecar_path + " describes a precomputed text channel; pass --vectors");
    }
    const int d = sidecar.at("encoder").at("d_model").get<int>();
    precomputed = load_precomputed_vectors(f.vectors, d);
  }
  return load_model(prefix + ".ckpt", sidecar_path, std::move(precomputed));
}

std::vector<std::vector<int>> gold_ids(const std::vector<LabeledSample>& samples,
                                       const TopicRuleSet& rules) {
  std::vector<std::vector<int>> gold;
  gold.reserve(samples.size());
  for (const auto& s : samples) {
    std::vector<int> ids;
    for (const auto& name : s.labels) ids.push_back(rules.id_of(name));
    std::sort(ids.begin(), ids.end());
    gold.push_back(std::move(ids));
  }
  return gold;
}

int run_tag(const std::string& input, const std::string& text, const std::string& id,
            const RunFlags& f, int cap, const std::string& output) {
  const TopicRuleSet rules = load_rulebook(f.rulebook);
  std::vector<LabeledSample> samples;
  if (!text.empty()) {
    samples.push_back({id, text, {}});
  } else {
    samples = ingest(input, rules).samples;
  }

  std::string out;
  for (const auto& s : samples) {
    const RegexFeatureVector fv = tag(s.text, rules, cap, s.doc_id);
    json names = json::array();
    for (int fid : fv.feature_ids) {
      if (fid != rules.no_topic_id()) names.push_back(rules.by_id(fid).name);
    }
    const json line = {{"doc_id", fv.doc_id},
                       {"feature_ids", fv.feature_ids},
                       {"topics", std::move(names)},
                       {"truncated", fv.truncated}};
    out += line.dump() + "\n";
  }
  emit(output, out);
  return 0;
}

int run_train(const std::string& input, const std::string& out_prefix, const RunFlags& f) {
  const int variant = f.variant.value_or(5);
  if (variant == 1) {
    throw Error(ErrorKind::ParseError,
                "variant 1 has no trainable parameters; train expects variants 2-5");
  }
  (void)variant_spec(variant);

  const TopicRuleSet rules = load_rulebook(f.rulebook);
  const Dataset ds = ingest(input, rules);
  const AblationConfig cfg = resolve_config(f);

  std::shared_ptr<TextEncoder> encoder;
  if (!f.vectors.empty()) {
    encoder = load_precomputed_vectors(f.vectors, cfg.fusion.d_model);
  } else {
    std::vector<std::string> texts;
    for (const auto& s : ds.samples) texts.push_back(s.text);
    encoder = std::make_shared<MiniEncoder>(build_vocab(texts), cfg.encoder);
  }

  AssembledModel assembled = assemble_model(variant, std::move(encoder), cfg.fusion);
  Rng rng(cfg.train.seed);
  assembled.model->init(rng);

  const TrainHistory history =
      train(*assembled.model, ds.samples, rules, cfg.train, make_clock(f.fixed_clock));

  save_model(out_prefix + ".ckpt", out_prefix + ".json", assembled);
  write_text(out_prefix + ".history.json", history_to_json(history).dump(2) + "\n");

  std::printf("trained variant %d on %zu samples: %zu epochs, best epoch %d\n", variant,
              ds.samples.size(), history.train_loss.size(), history.best_epoch);
  std::printf("wrote %s.ckpt, %s.json, %s.history.json\n", out_prefix.c_str(),
              out_prefix.c_str(), out_prefix.c_str());
  return 0;
}

int run_evaluate(const std::string& input, const std::string& model_prefix,
                 const RunFlags& f, const std::string& output) {
  const TopicRuleSet rules = load_rulebook(f.rulebook);
  const Dataset ds = ingest(input, rules);
  AssembledModel assembled = load_model_arg(model_prefix, f);

  const double tau = f.threshold.value_or(0.5);
  std::vector<PredictionSet> preds;
  preds.reserve(ds.samples.size());
  for (const auto& s : ds.samples) {
    preds.push_back(predict(assembled, rules, s.doc_id, s.text, tau));
  }

  const EvalReport report =
      evaluate_predictions(assembled.variant, tau, preds, gold_ids(ds.samples, rules));
  emit(output, report_to_json(report).dump(2) + "\n");
  return 0;
}

int run_predict(const std::string& input, const std::string& text, const std::string& id,
                const std::string& model_prefix, const RunFlags& f,
                const std::string& output) {
  const TopicRuleSet rules = load_rulebook(f.rulebook);
  AssembledModel assembled = load_model_arg(model_prefix, f);
  const double tau = f.threshold.value_or(0.5);

  std::vector<LabeledSample> samples;
  if (!text.empty()) {
    samples.push_back({id, text, {}});
  } else {
    samples = ingest(input, rules).samples;
  }

  std::string out;
  for (const auto& s : samples) {
    out += prediction_to_json(predict(assembled, rules, s.doc_id, s.text, tau)).dump() +
           "\n";
  }
  emit(output, out);
  return 0;
}

int run_export(const std::string& input, const std::string& output, int variant,
               std::string timestamp) {
  if (timestamp.empty()) timestamp = utc_now_iso();
  const std::vector<PredictionSet> preds = read_predictions(input);
  export_bulk(preds, output, variant, timestamp);
  std::printf("wrote %zu predictions (%zu lines) to %s\n", preds.size(),
              2 * preds.size(), output.c_str());
  return 0;
}

int run_ablate(const std::string& input, const std::string& out_dir, const RunFlags& f) {
  const TopicRuleSet rules = load_rulebook(f.rulebook);
  const Dataset ds = ingest(input, rules);
  const AblationConfig cfg = resolve_config(f);

  const AblationResult result =
      run_ablation(ds, rules, cfg, make_clock(f.fixed_clock));

  std::filesystem::create_directories(out_dir);
  for (const auto& run : result.runs) {
    const std::string stem = out_dir + "/variant-" + std::to_string(run.variant);
    save_model(stem + ".ckpt", stem + ".json", run.model);
    write_text(stem + ".history.json", history_to_json(run.history).dump(2) + "\n");
    write_text(stem + ".report.json", report_to_json(run.report).dump(2) + "\n");
  }
  write_text(out_dir + "/comparison.json", result.comparison.dump(2) + "\n");
  write_text(out_dir + "/comparison.txt", result.comparison_text);
  write_text(out_dir + "/summary.json",
             ablation_summary_json(result, cfg).dump(2) + "\n");

  std::cout << result.comparison_text;
  std::printf("artifacts in %s\n", out_dir.c_str());
  return 0;
}

int run_sweep(const std::string& input, const std::string& model_prefix,
              const RunFlags& f, std::vector<double> thresholds, int grid,
              const std::string& output) {
  const TopicRuleSet rules = load_rulebook(f.rulebook);
  const Dataset ds = ingest(input, rules);
  AssembledModel assembled = load_model_arg(model_prefix, f);

  if (thresholds.empty()) {
    if (grid < 1) throw Error(ErrorKind::ParseError, "--grid must be at least 1");
    for (int i = 0; i <= grid; ++i) {
      thresholds.push_back(static_cast<double>(i) / grid);
    }
  }

  const auto points = sweep_threshold(assembled, rules, ds.samples, thresholds);
  emit(output, sweep_to_json(points).dump(2) + "\n");
  return 0;
}

int run_gen_corpus(const CorpusConfig& cfg, const std::string& output) {
  const std::vector<LabeledSample> samples = generate_corpus(cfg);
  std::string out;
  for (const auto& s : samples) {
    const json line = {{"id", s.doc_id}, {"text", s.text}, {"labels", s.labels}};
    out += line.dump() + "\n";
  }
  emit(output, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regex-rule + text-encoder fusion topic classifier"};
  app.require_subcommand(1);

  RunFlags flags;

  std::string input, text, doc_id = "doc", output, model_prefix, out_prefix, out_dir;
  std::string timestamp;
  int cap = kDefaultFeatureCap;
  int export_variant = 0;
  int grid = 20;
  std::vector<double> thresholds;
  CorpusConfig corpus_cfg;

  CLI::App* tag_cmd = app.add_subcommand("tag", "run the regex rulebook over text");
  tag_cmd->add_option("--input", input, "JSON-lines dataset");
  tag_cmd->add_option("--text", text, "tag a single string instead of a file");
  tag_cmd->add_option("--id", doc_id, "doc id for --text")->capture_default_str();
  tag_cmd->add_option("--cap", cap, "max regex features per document")
      ->capture_default_str();
  tag_cmd->add_option("--output", output, "output path (default stdout)");
  tag_cmd->add_option("--rulebook", flags.rulebook, "regex rulebook TSV")
      ->capture_default_str();

  CLI::App* train_cmd = app.add_subcommand("train", "fit one model variant");
  train_cmd->add_option("--input", input, "JSON-lines training set")->required();
  train_cmd->add_option("--out", out_prefix, "checkpoint prefix")->required();
  train_cmd->add_option("--variant", flags.variant, "model variant 2-5 (default 5)");
  add_run_flags(train_cmd, flags);

  CLI::App* eval_cmd = app.add_subcommand("evaluate", "score a model on labeled data");
  eval_cmd->add_option("--input", input, "JSON-lines labeled dataset")->required();
  eval_cmd->add_option("--model", model_prefix, "checkpoint prefix from train/ablate");
  eval_cmd->add_option("--variant", flags.variant, "1 evaluates the rules-only path");
  eval_cmd->add_option("--output", output, "report path (default stdout)");
  add_run_flags(eval_cmd, flags);

  CLI::App* predict_cmd = app.add_subcommand("predict", "threshold topic probabilities");
  predict_cmd->add_option("--input", input, "JSON-lines dataset");
  predict_cmd->add_option("--text", text, "predict a single string instead of a file");
  predict_cmd->add_option("--id", doc_id, "doc id for --text")->capture_default_str();
  predict_cmd->add_option("--model", model_prefix, "checkpoint prefix from train/ablate");
  predict_cmd->add_option("--variant", flags.variant, "1 predicts with rules only");
  predict_cmd->add_option("--output", output, "output path (default stdout)");
  add_run_flags(predict_cmd, flags);

  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "train and compare variants on one split");
  ablate_cmd->add_option("--input", input, "JSON-lines labeled dataset")->required();
  ablate_cmd->add_option("--out-dir", out_dir, "artifact directory")->required();
  ablate_cmd->add_option("--variants", flags.variants, "variant subset (default 1-5)");
  ablate_cmd->add_option("--train-ratio", flags.train_ratio, "train share of the split");
  add_run_flags(ablate_cmd, flags);

  CLI::App* export_cmd =
      app.add_subcommand("export", "rewrite predictions as bulk index actions");
  export_cmd->add_option("--input", input, "predictions from `predict`")->required();
  export_cmd->add_option("--output", output, "bulk file path")->required();
  export_cmd->add_option("--variant", export_variant, "model variant recorded per row")
      ->required();
  export_cmd->add_option("--timestamp", timestamp,
                         "fixed timestamp (default: current UTC)");

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep-threshold", "weighted F1 and emerging rate vs tau");
  sweep_cmd->add_option("--input", input, "JSON-lines labeled dataset")->required();
  sweep_cmd->add_option("--model", model_prefix, "checkpoint prefix from train/ablate");
  sweep_cmd->add_option("--variant", flags.variant, "1 sweeps the rules-only path");
  sweep_cmd->add_option("--thresholds", thresholds, "explicit threshold list");
  sweep_cmd->add_option("--grid", grid, "evenly spaced points 0..1 when no list given")
      ->capture_default_str();
  sweep_cmd->add_option("--output", output, "output path (default stdout)");
  add_run_flags(sweep_cmd, flags);

  CLI::App* gen_cmd = app.add_subcommand("gen-corpus", "emit a seeded synthetic dataset");
  gen_cmd->add_option("--n", corpus_cfg.n, "sample count")->capture_default_str();
  gen_cmd->add_option("--seed", corpus_cfg.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--paraphrase-frac", corpus_cfg.paraphrase_frac,
                      "share of labeled samples the regex cannot match")
      ->capture_default_str();
  gen_cmd->add_option("--background-frac", corpus_cfg.background_frac,
                      "share of samples off every known topic")
      ->capture_default_str();
  gen_cmd->add_option("--multi-topic-frac", corpus_cfg.multi_topic_frac,
                      "share of labeled samples carrying two topics")
      ->capture_default_str();
  gen_cmd->add_option("--output", output, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (tag_cmd->parsed()) {
      if (text.empty() == input.empty()) {
        throw Error(ErrorKind::ParseError, "pass exactly one of --input or --text");
      }
      return run_tag(input, text, doc_id, flags, cap, output);
    }
    if (train_cmd->parsed()) return run_train(input, out_prefix, flags);
    if (eval_cmd->parsed()) return run_evaluate(input, model_prefix, flags, output);
    if (predict_cmd->parsed()) {
      if (text.empty() == input.empty()) {
        throw Error(ErrorKind::ParseError, "pass exactly one of --input or --text");
      }
      return run_predict(input, text, doc_id, model_prefix, flags, output);
    }
    if (ablate_cmd->parsed()) return run_ablate(input, out_dir, flags);
    if (export_cmd->parsed()) return run_export(input, output, export_variant, timestamp);
    if (sweep_cmd->parsed()) {
      return run_sweep(input, model_prefix, flags, thresholds, grid, output);
    }
    if (gen_cmd->parsed()) return run_gen_corpus(corpus_cfg, output);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.category() == ErrorCategory::Validation ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
