#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "topicfuse/kernels.hpp"
#include "topicfuse/rng.hpp"
#include "topicfuse/tensor.hpp"

namespace topicfuse {

// Word-level vocabulary with fixed special ids. Regular tokens get ids from
// 3 upward in lexicographic order, which makes rebuilt vocabularies
// identical for identical corpora.
struct Vocabulary {
  static constexpr int kCls = 0;
  static constexpr int kPad = 1;
  static constexpr int kUnk = 2;

  std::map<std::string, int> token_to_id;

  int size() const { return 3 + static_cast<int>(token_to_id.size()); }
  int id_of(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? kUnk : it->second;
  }
};

// Lowercases and splits on every non-alphanumeric character.
std::vector<std::string> word_split(const std::string& text);

Vocabulary build_vocab(const std::vector<std::string>& corpus, int min_freq = 1);

// [CLS] followed by word ids, truncated to max_len ids total. Total: any
// string, including empty, yields at least the [CLS] id.
std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab, int max_len = 250);

// Produces the pooled 1 x d_model text representation. The trainable
// implementation backpropagates into its own parameters; the frozen one
// ignores gradients entirely.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;

  // Frozen encoders keep their no-op default.
  virtual void init(Rng&) {}

  virtual Tensor2 encode(const std::string& doc_id, const std::string& text) = 0;
  // Gradient of the loss with respect to the most recent encode output.
  virtual void backward(const Tensor2& grad_out) = 0;
  virtual void collect_params(std::vector<Param*>& out) = 0;
  virtual int d_model() const = 0;
  virtual bool trainable() const = 0;
};

struct MiniEncoderConfig {
  int d_model = 64;
  int max_seq_len = 250;
  int layers = 2;
  int heads = 4;
  bool block_extras = false;
};

// Desk-scale trainable encoder: token + learned position embeddings, a stack
// of self-attention blocks, then pooled = tanh(W_p h_0 + b_p) read from
// position 0.
class MiniEncoder : public TextEncoder {
 public:
  MiniEncoder(Vocabulary vocab, const MiniEncoderConfig& config);

  void init(Rng& rng) override;

  Tensor2 encode(const std::string& doc_id, const std::string& text) override;
  void backward(const Tensor2& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;
  int d_model() const override { return config_.d_model; }
  bool trainable() const override { return true; }

  // The numeric core of encode, exposed so ids can be driven directly.
  Tensor2 encode_ids(const std::vector<int>& ids);

  const Vocabulary& vocab() const { return vocab_; }
  const MiniEncoderConfig& config() const { return config_; }

 private:
  Vocabulary vocab_;
  MiniEncoderConfig config_;
  Embedding token_emb_;
  Embedding position_emb_;
  std::vector<TransformerBlock> blocks_;
  Linear pool_;
  Tanh pool_act_;
  std::vector<int> last_ids_;
};

// Frozen doc_id -> vector store loaded from a JSON-lines file.
class PrecomputedEncoder : public TextEncoder {
 public:
  PrecomputedEncoder(std::map<std::string, std::vector<double>> vectors, int d_model);

  Tensor2 encode(const std::string& doc_id, const std::string& text) override;
  void backward(const Tensor2&) override {}
  void collect_params(std::vector<Param*>&) override {}
  int d_model() const override { return d_model_; }
  bool trainable() const override { return false; }

 private:
  std::map<std::string, std::vector<double>> vectors_;
  int d_model_;
};

std::unique_ptr<PrecomputedEncoder> load_precomputed_vectors(const std::string& path,
                                                             int d_model);

}  // namespace topicfuse
