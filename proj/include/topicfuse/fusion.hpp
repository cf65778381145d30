#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "topicfuse/encoder.hpp"
#include "topicfuse/kernels.hpp"
#include "topicfuse/rulebook.hpp"

namespace topicfuse {

// The regex embedding table has one row per discrete feature (27 topics plus
// the no-topic sentinel) and one learned PAD row used to fill the fixed-arity
// ordinary sequence.
inline constexpr int kRegexPadRow = kFeatureCount;       // id 28
inline constexpr int kRegexTableRows = kFeatureCount + 1;  // 29

enum class RegexMode { None, Ordinary, Bag };
enum class FusionLayer { SelfAttention, Linear };
enum class Readout { Position0, MeanPool };

struct FusionConfig {
  int d_model = 64;
  RegexMode regex_mode = RegexMode::Ordinary;
  FusionLayer fusion_layer = FusionLayer::SelfAttention;
  int heads = 4;
  int cap = kDefaultFeatureCap;
  bool mask_padding = true;
  int head_hidden = 0;  // 0 means d_model
  Readout readout = Readout::Position0;
  bool block_extras = false;

  int resolved_head_hidden() const { return head_hidden > 0 ? head_hidden : d_model; }
  // Rows contributed by the regex channel to the fused sequence.
  int regex_rows() const {
    switch (regex_mode) {
      case RegexMode::None: return 0;
      case RegexMode::Ordinary: return cap;
      case RegexMode::Bag: return 1;
    }
    return 0;
  }
};

// The trainable classifier: pooled text representation and embedded regex
// features are stacked into one short sequence, fused by self-attention (with
// residual) or by a linear map over the flattened sequence, then pushed
// through a two-layer head ending in 27 sigmoid units.
class FusionModel {
 public:
  FusionModel(std::shared_ptr<TextEncoder> encoder, const FusionConfig& config);

  void init(Rng& rng);

  // Returns 1 x 27 logits; sigmoid happens in probabilities()/predict paths.
  Tensor2 forward(const std::string& doc_id, const std::string& text,
                  const RegexFeatureVector& fv);
  void backward(const Tensor2& grad_logits);
  void collect_params(std::vector<Param*>& out);

  std::vector<double> probabilities(const std::string& doc_id, const std::string& text,
                                    const RegexFeatureVector& fv);

  // Stacks the pooled text row on top of the embedded regex rows; refreshes
  // the padding flags queried below.
  Tensor2 build_sequence(const Tensor2& text_vec, const RegexFeatureVector& fv);

  const FusionConfig& config() const { return config_; }
  TextEncoder& encoder() { return *encoder_; }
  Param& regex_table() { return regex_emb_.table; }
  int last_sequence_rows() const { return seq_rows_; }
  const std::vector<char>& last_padding() const { return pad_; }

 private:
  std::shared_ptr<TextEncoder> encoder_;
  FusionConfig config_;
  Embedding regex_emb_;
  std::optional<TransformerBlock> fusion_attn_;
  std::optional<Linear> fusion_linear_;
  Relu fusion_relu_;
  Linear head1_;
  Relu head_relu_;
  Linear head2_;

  std::vector<char> pad_;       // per fused-sequence row, 1 = PAD filler
  std::vector<int> bag_ids_;    // bag mode: ids averaged in the last forward
  int seq_rows_ = 0;
};

// Table-row descriptors used by reports.
struct VariantSpec {
  int variant;
  std::string text_channel;
  std::string regex_channel;
  std::string fusion_layer;
};

const VariantSpec& variant_spec(int variant);  // throws UnknownVariant

// Variant 1 is the parameterless rules-only classifier, so `model` stays
// null there and callers dispatch on it.
struct AssembledModel {
  int variant = 0;
  std::unique_ptr<FusionModel> model;
};

AssembledModel assemble_model(int variant, std::shared_ptr<TextEncoder> encoder,
                              FusionConfig config);

}  // namespace topicfuse
