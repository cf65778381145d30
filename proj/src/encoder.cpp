#include "topicfuse/encoder.hpp"

#include <cctype>
#include <fstream>

#include "json.hpp"

namespace topicfuse {

std::vector<std::string> word_split(const std::string& text) {
  std::vector<std::string> words;
  std::string current;
  for (char raw : text) {
    auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

Vocabulary build_vocab(const std::vector<std::string>& corpus, int min_freq) {
  if (corpus.empty()) {
    throw Error(ErrorKind::EmptyCorpus, "cannot build a vocabulary from zero texts");
  }
  std::map<std::string, int> freq;
  for (const std::string& text : corpus) {
    for (std::string& w : word_split(text)) ++freq[std::move(w)];
  }
  Vocabulary vocab;
  int next_id = 3;  // std::map iterates tokens lexicographically, so ids are stable
  for (const auto& [token, count] : freq) {
    if (count >= min_freq) vocab.token_to_id.emplace(token, next_id++);
  }
  return vocab;
}

std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab, int max_len) {
  std::vector<int> ids;
  ids.push_back(Vocabulary::kCls);
  for (const std::string& w : word_split(text)) {
    if (static_cast<int>(ids.size()) >= max_len) break;
    ids.push_back(vocab.id_of(w));
  }
  return ids;
}

MiniEncoder::MiniEncoder(Vocabulary vocab, const MiniEncoderConfig& config)
    : vocab_(std::move(vocab)),
      config_(config),
      token_emb_("encoder.token_emb", vocab_.size(), config.d_model),
      position_emb_("encoder.position_emb", config.max_seq_len, config.d_model),
      pool_("encoder.pool", config.d_model, config.d_model) {
  blocks_.reserve(static_cast<size_t>(config.layers));
  for (int l = 0; l < config.layers; ++l) {
    blocks_.emplace_back("encoder.block" + std::to_string(l), config.d_model, config.heads,
                         config.block_extras);
  }
}

void MiniEncoder::init(Rng& rng) {
  token_emb_.init(rng);
  position_emb_.init(rng);
  for (TransformerBlock& b : blocks_) b.init(rng);
  pool_.init(rng);
}

Tensor2 MiniEncoder::encode(const std::string&, const std::string& text) {
  return encode_ids(tokenize(text, vocab_, config_.max_seq_len));
}

Tensor2 MiniEncoder::encode_ids(const std::vector<int>& ids) {
  if (ids.empty() || ids[0] != Vocabulary::kCls) {
    throw Error(ErrorKind::ParseError, "token ids must start with the CLS id");
  }
  if (static_cast<int>(ids.size()) > config_.max_seq_len) {
    throw Error(ErrorKind::SequenceTooLong,
                std::to_string(ids.size()) + " ids exceed the position table of " +
                    std::to_string(config_.max_seq_len));
  }
  last_ids_ = ids;
  std::vector<int> positions(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i);

  Tensor2 h = token_emb_.forward(ids);
  Tensor2 pos = position_emb_.forward(positions);
  for (size_t i = 0; i < h.data.size(); ++i) h.data[i] += pos.data[i];

  std::vector<char> no_pads(ids.size(), 0);
  for (TransformerBlock& block : blocks_) h = block.forward(h, no_pads);

  Tensor2 h0(1, config_.d_model);
  for (int c = 0; c < config_.d_model; ++c) h0(0, c) = h(0, c);
  return pool_act_.forward(pool_.forward(h0));
}

void MiniEncoder::backward(const Tensor2& grad_out) {
  Tensor2 dh0 = pool_.backward(pool_act_.backward(grad_out));
  Tensor2 dh(static_cast<int>(last_ids_.size()), config_.d_model);
  for (int c = 0; c < config_.d_model; ++c) dh(0, c) = dh0(0, c);
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) dh = it->backward(dh);
  token_emb_.backward(dh);
  position_emb_.backward(dh);
}

void MiniEncoder::collect_params(std::vector<Param*>& out) {
  token_emb_.collect_params(out);
  position_emb_.collect_params(out);
  for (TransformerBlock& b : blocks_) b.collect_params(out);
  pool_.collect_params(out);
}

PrecomputedEncoder::PrecomputedEncoder(std::map<std::string, std::vector<double>> vectors,
                                       int d_model)
    : vectors_(std::move(vectors)), d_model_(d_model) {
  for (const auto& [id, vec] : vectors_) {
    if (static_cast<int>(vec.size()) != d_model_) {
      throw Error(ErrorKind::DimensionMismatch,
                  "vector for '" + id + "' has " + std::to_string(vec.size()) +
                      " entries, expected " + std::to_string(d_model_));
    }
  }
}

Tensor2 PrecomputedEncoder::encode(const std::string& doc_id, const std::string&) {
  auto it = vectors_.find(doc_id);
  if (it == vectors_.end()) {
    throw Error(ErrorKind::UnknownDocId, "no stored vector for '" + doc_id + "'");
  }
  Tensor2 out(1, d_model_);
  for (int c = 0; c < d_model_; ++c) out(0, c) = it->second[static_cast<size_t>(c)];
  return out;
}

std::unique_ptr<PrecomputedEncoder> load_precomputed_vectors(const std::string& path,
                                                             int d_model) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::MissingFile, "cannot open vectors file: " + path);
  }
  std::map<std::string, std::vector<double>> vectors;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::ParseError,
                  path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.contains("id") || !obj["id"].is_string() || !obj.contains("vector") ||
        !obj["vector"].is_array()) {
      throw Error(ErrorKind::ParseError, path + ":" + std::to_string(line_no) +
                                             ": expected {\"id\", \"vector\"}");
    }
    std::vector<double> vec = obj["vector"].get<std::vector<double>>();
    if (static_cast<int>(vec.size()) != d_model) {
      throw Error(ErrorKind::DimensionMismatch,
                  path + ":" + std::to_string(line_no) + ": vector of length " +
                      std::to_string(vec.size()) + ", expected " + std::to_string(d_model));
    }
    vectors[obj["id"].get<std::string>()] = std::move(vec);
  }
  return std::make_unique<PrecomputedEncoder>(std::move(vectors), d_model);
}

}  // namespace topicfuse
