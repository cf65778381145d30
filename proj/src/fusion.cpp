#include "topicfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "topicfuse/errors.hpp"

namespace topicfuse {

FusionModel::FusionModel(std::shared_ptr<TextEncoder> encoder, const FusionConfig& config)
    : encoder_(std::move(encoder)),
      config_(config),
      regex_emb_("regex_emb", kRegexTableRows, config.d_model),
      head1_("head1", config.d_model, config.resolved_head_hidden()),
      head2_("head2", config.resolved_head_hidden(), kTopicCount) {
  if (!encoder_) {
    throw Error(ErrorKind::DimensionMismatch, "fusion model requires a text encoder");
  }
  if (encoder_->d_model() != config_.d_model) {
    throw Error(ErrorKind::DimensionMismatch,
                "encoder width " + std::to_string(encoder_->d_model()) +
                    " != fusion d_model " + std::to_string(config_.d_model));
  }
  if (config_.cap < 1) {
    throw Error(ErrorKind::DimensionMismatch, "feature cap must be at least 1");
  }
  if (config_.fusion_layer == FusionLayer::SelfAttention) {
    fusion_attn_.emplace("fusion", config_.d_model, config_.heads, config_.block_extras);
  } else {
    const int flat = (1 + config_.regex_rows()) * config_.d_model;
    fusion_linear_.emplace("fusion.linear", flat, config_.d_model);
  }
}

void FusionModel::init(Rng& rng) {
  encoder_->init(rng);
  regex_emb_.init(rng);
  if (fusion_attn_) fusion_attn_->init(rng);
  if (fusion_linear_) fusion_linear_->init(rng);
  head1_.init(rng);
  head2_.init(rng);
}

Tensor2 FusionModel::build_sequence(const Tensor2& text_vec, const RegexFeatureVector& fv) {
  require_shape(text_vec, 1, config_.d_model, "fusion text vector");
  const int d = config_.d_model;
  const int regex_rows = config_.regex_rows();
  seq_rows_ = 1 + regex_rows;
  pad_.assign(static_cast<size_t>(seq_rows_), 0);
  bag_ids_.clear();

  Tensor2 s(seq_rows_, d);
  for (int c = 0; c < d; ++c) s(0, c) = text_vec(0, c);

  if (config_.regex_mode == RegexMode::Ordinary) {
    if (static_cast<int>(fv.feature_ids.size()) > config_.cap) {
      throw Error(ErrorKind::LengthMismatch,
                  "feature vector has " + std::to_string(fv.feature_ids.size()) +
                      " ids, cap is " + std::to_string(config_.cap));
    }
    std::vector<int> ids = fv.feature_ids;
    while (static_cast<int>(ids.size()) < config_.cap) ids.push_back(kRegexPadRow);
    const Tensor2 rows = regex_emb_.forward(ids);
    for (int r = 0; r < config_.cap; ++r) {
      if (ids[static_cast<size_t>(r)] == kRegexPadRow) pad_[static_cast<size_t>(1 + r)] = 1;
      for (int c = 0; c < d; ++c) s(1 + r, c) = rows(r, c);
    }
  } else if (config_.regex_mode == RegexMode::Bag) {
    if (fv.feature_ids.empty()) {
      throw Error(ErrorKind::LengthMismatch, "bag mode needs at least one feature id");
    }
    bag_ids_ = fv.feature_ids;
    const Tensor2 rows = regex_emb_.forward(bag_ids_);
    const double inv = 1.0 / static_cast<double>(rows.rows);
    for (int c = 0; c < d; ++c) {
      double sum = 0.0;
      for (int r = 0; r < rows.rows; ++r) sum += rows(r, c);
      s(1, c) = sum * inv;
    }
  }
  return s;
}

Tensor2 FusionModel::forward(const std::string& doc_id, const std::string& text,
                             const RegexFeatureVector& fv) {
  const Tensor2 text_vec = encoder_->encode(doc_id, text);
  const Tensor2 s = build_sequence(text_vec, fv);

  Tensor2 fused(1, config_.d_model);
  if (fusion_attn_) {
    std::vector<char> key_pad = pad_;
    if (!config_.mask_padding) key_pad.assign(pad_.size(), 0);
    const Tensor2 out = fusion_attn_->forward(s, key_pad);
    if (config_.readout == Readout::Position0) {
      for (int c = 0; c < config_.d_model; ++c) fused(0, c) = out(0, c);
    } else {
      int kept = 0;
      for (int r = 0; r < out.rows; ++r) {
        if (config_.mask_padding && pad_[static_cast<size_t>(r)]) continue;
        ++kept;
        for (int c = 0; c < config_.d_model; ++c) fused(0, c) += out(r, c);
      }
      const double inv = 1.0 / static_cast<double>(kept);
      for (int c = 0; c < config_.d_model; ++c) fused(0, c) *= inv;
    }
  } else {
    Tensor2 flat(1, seq_rows_ * config_.d_model);
    for (int r = 0; r < seq_rows_; ++r)
      for (int c = 0; c < config_.d_model; ++c)
        flat(0, r * config_.d_model + c) = s(r, c);
    fused = fusion_relu_.forward(fusion_linear_->forward(flat));
  }

  return head2_.forward(head_relu_.forward(head1_.forward(fused)));
}

void FusionModel::backward(const Tensor2& grad_logits) {
  require_shape(grad_logits, 1, kTopicCount, "fusion logit gradient");
  const int d = config_.d_model;
  const Tensor2 dfused =
      head1_.backward(head_relu_.backward(head2_.backward(grad_logits)));

  Tensor2 ds(seq_rows_, d);
  if (fusion_attn_) {
    Tensor2 dout(seq_rows_, d);
    if (config_.readout == Readout::Position0) {
      for (int c = 0; c < d; ++c) dout(0, c) = dfused(0, c);
    } else {
      int kept = 0;
      for (int r = 0; r < seq_rows_; ++r)
        if (!(config_.mask_padding && pad_[static_cast<size_t>(r)])) ++kept;
      const double inv = 1.0 / static_cast<double>(kept);
      for (int r = 0; r < seq_rows_; ++r) {
        if (config_.mask_padding && pad_[static_cast<size_t>(r)]) continue;
        for (int c = 0; c < d; ++c) dout(r, c) = dfused(0, c) * inv;
      }
    }
    ds = fusion_attn_->backward(dout);
  } else {
    const Tensor2 dflat = fusion_linear_->backward(fusion_relu_.backward(dfused));
    for (int r = 0; r < seq_rows_; ++r)
      for (int c = 0; c < d; ++c) ds(r, c) = dflat(0, r * d + c);
  }

  if (config_.regex_mode == RegexMode::Ordinary) {
    Tensor2 dregex(config_.cap, d);
    for (int r = 0; r < config_.cap; ++r)
      for (int c = 0; c < d; ++c) dregex(r, c) = ds(1 + r, c);
    regex_emb_.backward(dregex);
  } else if (config_.regex_mode == RegexMode::Bag) {
    const int m = static_cast<int>(bag_ids_.size());
    const double inv = 1.0 / static_cast<double>(m);
    Tensor2 dregex(m, d);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < d; ++c) dregex(r, c) = ds(1, c) * inv;
    regex_emb_.backward(dregex);
  }

  if (encoder_->trainable()) {
    Tensor2 dtext(1, d);
    for (int c = 0; c < d; ++c) dtext(0, c) = ds(0, c);
    encoder_->backward(dtext);
  }
}

void FusionModel::collect_params(std::vector<Param*>& out) {
  if (encoder_->trainable()) encoder_->collect_params(out);
  if (config_.regex_mode != RegexMode::None) regex_emb_.collect_params(out);
  if (fusion_attn_) fusion_attn_->collect_params(out);
  if (fusion_linear_) fusion_linear_->collect_params(out);
  head1_.collect_params(out);
  head2_.collect_params(out);
}

std::vector<double> FusionModel::probabilities(const std::string& doc_id,
                                               const std::string& text,
                                               const RegexFeatureVector& fv) {
  const Tensor2 logits = forward(doc_id, text, fv);
  // sigmoid rounds to exactly 0.0 or 1.0 once |logit| passes ~37; the
  // classifier contract is strict (0,1), so pin to the nearest interior
  // doubles. Thresholding behavior is unchanged.
  const double lo = std::numeric_limits<double>::denorm_min();
  const double hi = std::nextafter(1.0, 0.0);
  std::vector<double> probs(kTopicCount);
  for (int i = 0; i < kTopicCount; ++i) {
    probs[static_cast<size_t>(i)] = std::clamp(sigmoid(logits(0, i)), lo, hi);
  }
  return probs;
}

const VariantSpec& variant_spec(int variant) {
  static const VariantSpec specs[] = {
      {1, "N/A", "RegexRules", "N/A"},
      {2, "TextEncoder", "N/A", "SelfAttention"},
      {3, "TextEncoder", "RegexEmbeddingBag", "SelfAttention"},
      {4, "TextEncoder", "RegexEmbedding", "Linear"},
      {5, "TextEncoder", "RegexEmbedding", "SelfAttention"},
  };
  if (variant < 1 || variant > 5) {
    throw Error(ErrorKind::UnknownVariant, "variant " + std::to_string(variant) +
                                               " (expected 1..5)");
  }
  return specs[variant - 1];
}

AssembledModel assemble_model(int variant, std::shared_ptr<TextEncoder> encoder,
                              FusionConfig config) {
  variant_spec(variant);  // validates the id
  AssembledModel out;
  out.variant = variant;
  if (variant == 1) return out;

  switch (variant) {
    case 2:
      config.regex_mode = RegexMode::None;
      config.fusion_layer = FusionLayer::SelfAttention;
      break;
    case 3:
      config.regex_mode = RegexMode::Bag;
      config.fusion_layer = FusionLayer::SelfAttention;
      break;
    case 4:
      config.regex_mode = RegexMode::Ordinary;
      config.fusion_layer = FusionLayer::Linear;
      break;
    case 5:
      config.regex_mode = RegexMode::Ordinary;
      config.fusion_layer = FusionLayer::SelfAttention;
      break;
    default:
      break;
  }
  out.model = std::make_unique<FusionModel>(std::move(encoder), config);
  return out;
}

}  // namespace topicfuse
